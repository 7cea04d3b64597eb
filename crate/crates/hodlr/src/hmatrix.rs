//! Hierarchical matrices with low-rank off-diagonal blocks (HODLR format).
//!
//! A level-0 matrix is a dense `n0 x n0` leaf block. A level-`l` matrix of
//! dimension `n = n0 * 2^l` consists of two level-`l-1` diagonal blocks `A1`
//! and `A2` together with four factor matrices `a1, b1, a2, b2` of shape
//! `n/2 x k`:
//!
//! ```text
//!     [ A1        a1 b1^T ]
//!     [ b2 a2^T   A2      ]
//! ```
//!
//! The leaf size `n0` and the off-diagonal rank `k` are uniform across the
//! tree. All matrices are real with `f64` entries and immutable once built,
//! so shared references can be used concurrently.

use crate::dense::DenseMatrix;
use thiserror::Error;

/// Default guard for [`HMatrix::to_dense`]; larger matrices need
/// [`HMatrix::to_dense_with_cap`].
pub const DENSE_CAP_DEFAULT: usize = 4096;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("leaf block must be square, got {rows}x{cols}")]
    NonSquareLeaf { rows: usize, cols: usize },
    #[error("leaf block must be non-empty")]
    EmptyLeaf,
    #[error("children differ in level ({left} vs {right}) or dimension ({left_dim} vs {right_dim})")]
    ChildMismatch {
        left: usize,
        right: usize,
        left_dim: usize,
        right_dim: usize,
    },
    #[error("factor {name} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    FactorShape {
        name: &'static str,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("child carries rank {child} but the node factors have rank {node}")]
    RankMismatch { child: usize, node: usize },
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("dense expansion of dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },
}

/// Internal node: two children plus the four off-diagonal factors.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HNode {
    pub(crate) a1: DenseMatrix,
    pub(crate) b1: DenseMatrix,
    pub(crate) a2: DenseMatrix,
    pub(crate) b2: DenseMatrix,
    pub(crate) child1: HMatrix,
    pub(crate) child2: HMatrix,
    dim: usize,
    level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tree {
    Leaf(DenseMatrix),
    Node(Box<HNode>),
}

/// Hierarchical matrix, either a dense leaf block or a node with two
/// half-size children and rank-`k` off-diagonal factors. Construction goes
/// through [`HMatrix::new_leaf`] and [`HMatrix::new_node`], which maintain
/// the structural invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    pub(crate) tree: Tree,
}

impl HMatrix {
    /// Wraps a square dense block as a level-0 matrix.
    pub fn new_leaf(block: DenseMatrix) -> Result<Self, StructureError> {
        if block.rows() == 0 || block.cols() == 0 {
            return Err(StructureError::EmptyLeaf);
        }
        if block.rows() != block.cols() {
            return Err(StructureError::NonSquareLeaf {
                rows: block.rows(),
                cols: block.cols(),
            });
        }
        Ok(HMatrix {
            tree: Tree::Leaf(block),
        })
    }

    /// Combines two equal-level children with factor matrices into a node
    /// one level up. All four factors must be `m x k` where `m` is the child
    /// dimension; node children must already carry the same rank `k`.
    pub fn new_node(
        child1: HMatrix,
        child2: HMatrix,
        a1: DenseMatrix,
        b1: DenseMatrix,
        a2: DenseMatrix,
        b2: DenseMatrix,
    ) -> Result<Self, StructureError> {
        if child1.level() != child2.level() || child1.dim() != child2.dim() {
            return Err(StructureError::ChildMismatch {
                left: child1.level(),
                right: child2.level(),
                left_dim: child1.dim(),
                right_dim: child2.dim(),
            });
        }
        let m = child1.dim();
        let k = a1.cols();
        if k == 0 {
            return Err(StructureError::ZeroRank);
        }
        for (name, f) in [("a1", &a1), ("b1", &b1), ("a2", &a2), ("b2", &b2)] {
            if f.rows() != m || f.cols() != k {
                return Err(StructureError::FactorShape {
                    name,
                    rows: f.rows(),
                    cols: f.cols(),
                    expected_rows: m,
                    expected_cols: k,
                });
            }
        }
        for child in [&child1, &child2] {
            if let Tree::Node(n) = &child.tree {
                if n.a1.cols() != k {
                    return Err(StructureError::RankMismatch {
                        child: n.a1.cols(),
                        node: k,
                    });
                }
            }
        }
        let level = child1.level() + 1;
        Ok(HMatrix {
            tree: Tree::Node(Box::new(HNode {
                a1,
                b1,
                a2,
                b2,
                child1,
                child2,
                dim: 2 * m,
                level,
            })),
        })
    }

    pub(crate) fn leaf_unchecked(block: DenseMatrix) -> Self {
        debug_assert_eq!(block.rows(), block.cols());
        HMatrix {
            tree: Tree::Leaf(block),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.tree {
            Tree::Leaf(block) => block.rows(),
            Tree::Node(n) => n.dim,
        }
    }

    /// Number of subdivision levels above the leaves; a leaf is level 0.
    pub fn level(&self) -> usize {
        match &self.tree {
            Tree::Leaf(_) => 0,
            Tree::Node(n) => n.level,
        }
    }

    /// Dimension of the dense leaf blocks.
    pub fn leaf_size(&self) -> usize {
        match &self.tree {
            Tree::Leaf(block) => block.rows(),
            Tree::Node(n) => n.child1.leaf_size(),
        }
    }

    /// Off-diagonal rank `k`; reported as 1 for a bare leaf, which stores no
    /// factors.
    pub fn rank(&self) -> usize {
        match &self.tree {
            Tree::Leaf(_) => 1,
            Tree::Node(n) => n.a1.cols(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.tree, Tree::Leaf(_))
    }

    /// Number of scalars held by the representation: leaf blocks plus factor
    /// matrices. For leaf size `n0`, rank `k` and level `l` this equals
    /// `(2*k*l + n0) * dim`.
    pub fn storage(&self) -> u64 {
        match &self.tree {
            Tree::Leaf(block) => (block.rows() * block.cols()) as u64,
            Tree::Node(n) => {
                let factors = 4 * n.a1.rows() * n.a1.cols();
                factors as u64 + n.child1.storage() + n.child2.storage()
            }
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, StructureError> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; self.dim()];
        let mut scratch = vec![0.0; self.rank()];
        self.matvec_into(x, &mut y, &mut scratch);
        Ok(y)
    }

    /// `y = A^T x`.
    pub fn matvec_adjoint(&self, x: &[f64]) -> Result<Vec<f64>, StructureError> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; self.dim()];
        let mut scratch = vec![0.0; self.rank()];
        self.matvec_adjoint_into(x, &mut y, &mut scratch);
        Ok(y)
    }

    fn matvec_into(&self, x: &[f64], y: &mut [f64], scratch: &mut [f64]) {
        match &self.tree {
            Tree::Leaf(block) => block.matvec_into(x, y),
            Tree::Node(n) => {
                let h = n.child1.dim();
                let (x1, x2) = x.split_at(h);
                let (y1, y2) = y.split_at_mut(h);
                let k = n.a1.cols();
                n.child1.matvec_into(x1, y1, scratch);
                for m in 0..k {
                    scratch[m] = n.b1.col_dot(m, x2);
                }
                for m in 0..k {
                    n.a1.col_axpy(m, scratch[m], y1);
                }
                n.child2.matvec_into(x2, y2, scratch);
                for m in 0..k {
                    scratch[m] = n.a2.col_dot(m, x1);
                }
                for m in 0..k {
                    n.b2.col_axpy(m, scratch[m], y2);
                }
            }
        }
    }

    fn matvec_adjoint_into(&self, x: &[f64], y: &mut [f64], scratch: &mut [f64]) {
        match &self.tree {
            Tree::Leaf(block) => block.matvec_transpose_into(x, y),
            Tree::Node(n) => {
                let h = n.child1.dim();
                let (x1, x2) = x.split_at(h);
                let (y1, y2) = y.split_at_mut(h);
                let k = n.a1.cols();
                n.child1.matvec_adjoint_into(x1, y1, scratch);
                for m in 0..k {
                    scratch[m] = n.b2.col_dot(m, x2);
                }
                for m in 0..k {
                    n.a2.col_axpy(m, scratch[m], y1);
                }
                n.child2.matvec_adjoint_into(x2, y2, scratch);
                for m in 0..k {
                    scratch[m] = n.a1.col_dot(m, x1);
                }
                for m in 0..k {
                    n.b1.col_axpy(m, scratch[m], y2);
                }
            }
        }
    }

    /// Expands the represented matrix entrywise, guarded by
    /// [`DENSE_CAP_DEFAULT`].
    pub fn to_dense(&self) -> Result<DenseMatrix, StructureError> {
        self.to_dense_with_cap(DENSE_CAP_DEFAULT)
    }

    /// Expands the represented matrix entrywise when `dim <= cap`.
    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseMatrix, StructureError> {
        if self.dim() > cap {
            return Err(StructureError::DenseCapExceeded {
                dim: self.dim(),
                cap,
            });
        }
        Ok(self.expand())
    }

    fn expand(&self) -> DenseMatrix {
        match &self.tree {
            Tree::Leaf(block) => block.clone(),
            Tree::Node(n) => {
                let h = n.child1.dim();
                let k = n.a1.cols();
                let mut out = DenseMatrix::zeros(2 * h, 2 * h);
                let d1 = n.child1.expand();
                let d2 = n.child2.expand();
                for i in 0..h {
                    for j in 0..h {
                        out.set(i, j, d1.get(i, j));
                        out.set(h + i, h + j, d2.get(i, j));
                    }
                }
                for i in 0..h {
                    for j in 0..h {
                        let mut upper = 0.0;
                        let mut lower = 0.0;
                        for m in 0..k {
                            upper += n.a1.get(i, m) * n.b1.get(j, m);
                            lower += n.b2.get(i, m) * n.a2.get(j, m);
                        }
                        out.set(i, h + j, upper);
                        out.set(h + i, j, lower);
                    }
                }
                out
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), StructureError> {
        if len != self.dim() {
            return Err(StructureError::DimMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}
