//! Dense reference solver.
//!
//! A plain partially pivoted LU factorization with explicit `L` and `U`
//! matrices. It shares no solver code with the hierarchical factorization, so
//! the two routes can be compared against each other in tests and in the
//! `verify` command.

use crate::dense::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("pivot breakdown at elimination step {step}")]
    PivotBreakdown { step: usize },
}

/// Factorization `P A = L U` with unit lower triangular `L`.
///
/// `perm[i]` is the row of `A` that became row `i` of `P A`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lower: DenseMatrix,
    upper: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn upper(&self) -> &DenseMatrix {
        &self.upper
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
}

/// Factors a square matrix with partial pivoting.
///
/// A pivot is rejected when its magnitude is at most
/// `64 * f64::EPSILON * max_abs(A)`.
pub fn dense_lu(a: &DenseMatrix) -> Result<DenseLu, OracleError> {
    if a.rows() != a.cols() {
        return Err(OracleError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let tol = 64.0 * f64::EPSILON * a.max_abs();
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for step in 0..n {
        let mut pivot_row = step;
        let mut pivot_mag = work.get(step, step).abs();
        for r in step + 1..n {
            let mag = work.get(r, step).abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag <= tol {
            return Err(OracleError::PivotBreakdown { step });
        }
        if pivot_row != step {
            perm.swap(step, pivot_row);
            for j in 0..n {
                let tmp = work.get(step, j);
                work.set(step, j, work.get(pivot_row, j));
                work.set(pivot_row, j, tmp);
            }
        }
        let pivot = work.get(step, step);
        for r in step + 1..n {
            let factor = work.get(r, step) / pivot;
            work.set(r, step, factor);
            for j in step + 1..n {
                let v = work.get(r, j) - factor * work.get(step, j);
                work.set(r, j, v);
            }
        }
    }

    let mut lower = DenseMatrix::identity(n);
    let mut upper = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            lower.set(i, j, work.get(i, j));
        }
        for j in i..n {
            upper.set(i, j, work.get(i, j));
        }
    }
    Ok(DenseLu { lower, upper, perm })
}

/// Solves `A x = b` from the factorization.
pub fn dense_solve(lu: &DenseLu, b: &[f64]) -> Vec<f64> {
    let n = lu.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");

    // L y = P b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[lu.perm[i]];
        for j in 0..i {
            acc -= lu.lower.get(i, j) * y[j];
        }
        y[i] = acc;
    }
    // U x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= lu.upper.get(i, j) * x[j];
        }
        x[i] = acc / lu.upper.get(i, i);
    }
    x
}

/// Solves `A^T x = b` from the factorization of `A`.
pub fn dense_solve_adjoint(lu: &DenseLu, b: &[f64]) -> Vec<f64> {
    let n = lu.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");

    // U^T w = b
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[i];
        for j in 0..i {
            acc -= lu.upper.get(j, i) * w[j];
        }
        w[i] = acc / lu.upper.get(i, i);
    }
    // L^T v = w
    let mut v = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = w[i];
        for j in i + 1..n {
            acc -= lu.lower.get(j, i) * v[j];
        }
        v[i] = acc;
    }
    // x = P^T v
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[lu.perm[i]] = v[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_factors_trivially() {
        let lu = dense_lu(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(lu.perm(), &[0, 1, 2, 3]);
        assert_eq!(lu.lower(), &DenseMatrix::identity(4));
        assert_eq!(lu.upper(), &DenseMatrix::identity(4));
    }

    #[test]
    fn swap_matrix_is_pure_permutation() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let lu = dense_lu(&a).unwrap();
        assert_eq!(lu.perm(), &[1, 0]);
        assert_eq!(lu.upper(), &DenseMatrix::identity(2));
        let x = dense_solve(&lu, &[3.0, 7.0]);
        assert_eq!(x, vec![7.0, 3.0]);
    }

    #[test]
    fn two_by_two_upper_factor() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
        let lu = dense_lu(&a).unwrap();
        assert_eq!(lu.upper().get(0, 0), 4.0);
        assert_eq!(lu.upper().get(0, 1), 1.0);
        assert_eq!(lu.upper().get(1, 0), 0.0);
        assert_eq!(lu.upper().get(1, 1), 3.75);
        assert_eq!(lu.lower().get(1, 0), 0.25);
    }

    #[test]
    fn rejects_singular_and_non_square() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            dense_lu(&s),
            Err(OracleError::PivotBreakdown { step: 1 })
        ));
        let r = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            dense_lu(&r),
            Err(OracleError::NonSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn reconstructs_solution_of_random_system() {
        // Fixed small system with a known hand-checked solution.
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0, 0.0],
            vec![1.0, 4.0, 1.0, 0.0],
            vec![0.0, 1.0, 4.0, 1.0],
            vec![0.0, 0.0, 1.0, 4.0],
        ])
        .unwrap();
        let lu = dense_lu(&a).unwrap();
        let x = dense_solve(&lu, &[1.0, 0.0, 0.0, 0.0]);
        let expected = [56.0 / 209.0, -15.0 / 209.0, 4.0 / 209.0, -1.0 / 209.0];
        for (got, want) in x.iter().zip(expected) {
            assert_relative_eq!(got, &want, max_relative = 1e-14);
        }
        // Residual check on a second right-hand side.
        let b = [5.0, 6.0, 6.0, 5.0];
        let x = dense_solve(&lu, &b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(b) {
            assert_relative_eq!(ri, &bi, max_relative = 1e-13);
        }
    }

    #[test]
    fn adjoint_solve_matches_transposed_system() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![-1.0, 3.0, 1.0],
            vec![0.25, -0.5, 4.0],
        ])
        .unwrap();
        let lu = dense_lu(&a).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = dense_solve_adjoint(&lu, &b);
        let r = a.matvec_transpose(&x);
        for (ri, bi) in r.iter().zip(b) {
            assert_relative_eq!(ri, &bi, max_relative = 1e-13);
        }
    }
}
