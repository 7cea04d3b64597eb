//! File-based solve: read a serialized matrix and a right-hand-side vector,
//! factor, and return the solution.

use hodlr::{setup, FactorError, HMatrix, ParseError};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("matrix file: {0}")]
    Matrix(#[from] ParseError),
    #[error("rhs file line {line}: cannot parse {text:?} as a number")]
    Rhs { line: usize, text: String },
    #[error("rhs has {got} entries but the matrix has dimension {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Singular(#[from] FactorError),
}

fn read_file(path: &Path) -> Result<String, SolveError> {
    fs::read_to_string(path).map_err(|source| SolveError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One decimal number per line, newline-terminated; blank lines are not
/// allowed except for the terminating newline.
pub fn parse_rhs(text: &str) -> Result<Vec<f64>, SolveError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.trim().parse::<f64>().map_err(|_| SolveError::Rhs {
                line: i + 1,
                text: line.to_string(),
            })
        })
        .collect()
}

pub fn run_solve(matrix_path: &Path, rhs_path: &Path, adjoint: bool) -> Result<Vec<f64>, SolveError> {
    let matrix = HMatrix::from_json(&read_file(matrix_path)?)?;
    let rhs = parse_rhs(&read_file(rhs_path)?)?;
    if rhs.len() != matrix.dim() {
        return Err(SolveError::DimMismatch {
            expected: matrix.dim(),
            got: rhs.len(),
        });
    }
    let f = setup(matrix)?;
    let x = if adjoint {
        f.solve_adjoint(&rhs)
    } else {
        f.solve(&rhs)
    }
    .expect("length was checked");
    Ok(x)
}
