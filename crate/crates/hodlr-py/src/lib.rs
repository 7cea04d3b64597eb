//! Python bindings. Matrices move across the boundary as lists of row
//! lists; vectors as flat float lists. `HMatrix.factorize()` returns a
//! `Factorized` handle with `solve`/`solve_adjoint` and the operation
//! tallies, and raises `HierarchicalSingularity` when a diagonal block or a
//! low-rank correction is exactly singular.

use hodlr::{
    random_regular, setup, tridiagonal_model, DenseMatrix, FactorError, FactorizedHMatrix,
    HMatrix, OpCounter,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use std::collections::HashMap;

create_exception!(
    hodlr_py,
    HierarchicalSingularity,
    PyArithmeticError,
    "Setup hit an exactly singular diagonal block or low-rank correction; \
     the message carries the subtree path."
);

fn matrix_from_rows(name: &str, rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).ok_or_else(|| {
        PyValueError::new_err(format!("{name} must be a non-empty rectangular list of rows"))
    })
}

fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

fn ops_dict(c: OpCounter) -> HashMap<&'static str, u64> {
    HashMap::from([
        ("add_sub", c.add_sub),
        ("mul", c.mul),
        ("div", c.div),
        ("storage", c.storage),
        ("total", c.total()),
    ])
}

/// Hierarchical matrix with dense leaf blocks and rank-k off-diagonal
/// couplings.
#[pyclass(name = "HMatrix", module = "hodlr_py")]
#[derive(Clone)]
struct PyHMatrix {
    inner: HMatrix,
}

#[pymethods]
impl PyHMatrix {
    /// Wraps a dense square block as a leaf.
    #[staticmethod]
    fn leaf(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let block = matrix_from_rows("leaf", rows)?;
        let inner = HMatrix::new_leaf(block).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHMatrix { inner })
    }

    /// Combines two children one level down with the four coupling factors,
    /// each given as an m x k list of rows.
    #[staticmethod]
    fn node(
        child1: PyRef<'_, PyHMatrix>,
        child2: PyRef<'_, PyHMatrix>,
        a1: Vec<Vec<f64>>,
        b1: Vec<Vec<f64>>,
        a2: Vec<Vec<f64>>,
        b2: Vec<Vec<f64>>,
    ) -> PyResult<Self> {
        let inner = HMatrix::new_node(
            child1.inner.clone(),
            child2.inner.clone(),
            matrix_from_rows("a1", a1)?,
            matrix_from_rows("b1", b1)?,
            matrix_from_rows("a2", a2)?,
            matrix_from_rows("b2", b2)?,
        )
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHMatrix { inner })
    }

    /// Seeded rank-1 tridiagonal test matrix of dimension n0 * 2^levels.
    #[staticmethod]
    fn tridiagonal(n0: usize, levels: usize, seed: u64) -> PyResult<Self> {
        let inner = tridiagonal_model(n0, levels, seed)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHMatrix { inner })
    }

    /// Seeded random instance with rank-k couplings and diagonally dominant
    /// leaves.
    #[staticmethod]
    fn random_regular(n0: usize, levels: usize, rank: usize, seed: u64) -> PyResult<Self> {
        let inner = random_regular(n0, levels, rank, seed)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHMatrix { inner })
    }

    /// Parses the JSON document format produced by `to_json`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner =
            HMatrix::from_json(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHMatrix { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn level(&self) -> usize {
        self.inner.level()
    }

    #[getter]
    fn leaf_size(&self) -> usize {
        self.inner.leaf_size()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Scalar count of the hierarchical representation.
    #[getter]
    fn storage(&self) -> u64 {
        self.inner.storage()
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .matvec(&x)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn matvec_adjoint(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .matvec_adjoint(&x)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Expands to a dense row-major list of rows. Refuses dimensions above
    /// the library's expansion cap.
    fn to_dense(&self) -> PyResult<Vec<Vec<f64>>> {
        let dense = self
            .inner
            .to_dense()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(matrix_to_rows(&dense))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_json_pretty(&self) -> String {
        self.inner.to_json_pretty()
    }

    /// Runs the recursive setup and returns a solve handle.
    fn factorize(&self) -> PyResult<PyFactorized> {
        match setup(self.inner.clone()) {
            Ok(inner) => Ok(PyFactorized { inner }),
            Err(e @ FactorError::HierarchicalSingularity { .. }) => {
                Err(HierarchicalSingularity::new_err(e.to_string()))
            }
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "HMatrix(dim={}, level={}, leaf_size={}, rank={})",
            self.inner.dim(),
            self.inner.level(),
            self.inner.leaf_size(),
            self.inner.rank()
        )
    }
}

/// Factorized hierarchical matrix; solves run in O(n log n) operations.
#[pyclass(name = "Factorized", module = "hodlr_py")]
struct PyFactorized {
    inner: FactorizedHMatrix,
}

#[pymethods]
impl PyFactorized {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.matrix().dim()
    }

    fn solve(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .solve(&z)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn solve_adjoint(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .solve_adjoint(&z)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Operation tallies recorded during setup, as a dict with keys
    /// add_sub, mul, div, storage and total.
    fn setup_ops(&self) -> HashMap<&'static str, u64> {
        ops_dict(self.inner.setup_ops())
    }

    /// Operation tallies of one solve, same keys as `setup_ops`.
    fn solve_ops(&self) -> HashMap<&'static str, u64> {
        ops_dict(self.inner.solve_ops())
    }

    fn __repr__(&self) -> String {
        format!("Factorized(dim={})", self.inner.matrix().dim())
    }
}

#[pymodule]
fn hodlr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHMatrix>()?;
    m.add_class::<PyFactorized>()?;
    m.add(
        "HierarchicalSingularity",
        m.py().get_type::<HierarchicalSingularity>(),
    )?;
    Ok(())
}
