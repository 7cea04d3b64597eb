//! Exact direct solver for hierarchical matrices with low-rank
//! off-diagonal blocks.
//!
//! The matrix format splits a square matrix recursively into four blocks:
//! dense diagonal children and rank-`k` off-diagonal outer products. For
//! such matrices, [`setup`] computes an exact block-LU style factorization
//! by recursion over the tree, and the resulting [`FactorizedHMatrix`]
//! answers linear systems `A x = z` and `A^T x = z` without any
//! approximation beyond floating-point rounding. Setup costs
//! `O(n log^2 n)` arithmetic operations and each solve `O(n log n)`; the
//! exact counts are tracked per run in an [`OpCounter`].
//!
//! ```
//! use hodlr::{generate, setup};
//!
//! let a = generate::tridiagonal_model(2, 3, 1).unwrap();
//! let f = setup(a).unwrap();
//! let x = f.solve(&vec![1.0; 16]).unwrap();
//! let r = f.matrix().matvec(&x).unwrap();
//! assert!(r.iter().all(|ri| (ri - 1.0).abs() < 1e-12));
//! ```
//!
//! The [`oracle`] module holds an independent dense LU solver used as
//! ground truth in tests; it shares no code with the hierarchical solver.

pub mod count;
pub mod dense;
pub mod factor;
pub mod generate;
pub mod hmatrix;
pub mod oracle;
pub mod serialize;

pub use count::OpCounter;
pub use dense::DenseMatrix;
pub use factor::{setup, setup_parallel, FactorError, FactorizedHMatrix};
pub use generate::{random_regular, tridiagonal_model, GenerateError, SplitMix64};
pub use hmatrix::{HMatrix, StructureError, DENSE_CAP_DEFAULT};
pub use serialize::ParseError;
