//! JSON persistence for hierarchical matrices.
//!
//! Document schema:
//!
//! ```text
//! { "n0": <leaf size>, "rank": <k>, "root": NODE }
//! NODE = { "leaf": [[row], ...] }
//!      | { "node": { "a1": [[col], ...], "b1": ..., "a2": ..., "b2": ...,
//!                    "child1": NODE, "child2": NODE } }
//! ```
//!
//! Leaf blocks are written as rows, factor matrices as `k` columns of
//! `n_{l-1}` numbers each. Scalars go through shortest round-trip decimal
//! printing, so a write/read cycle reproduces every entry bit for bit.

use crate::dense::DenseMatrix;
use crate::hmatrix::{HMatrix, Tree};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: &str, reason: impl Into<String>) -> ParseError {
    ParseError::Invalid {
        path: path.to_string(),
        reason: reason.into(),
    }
}

#[derive(Serialize, Deserialize)]
struct HDoc {
    n0: usize,
    rank: usize,
    root: NodeDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NodeDoc {
    Leaf(Vec<Vec<f64>>),
    Node(Box<InnerDoc>),
}

#[derive(Serialize, Deserialize)]
struct InnerDoc {
    a1: Vec<Vec<f64>>,
    b1: Vec<Vec<f64>>,
    a2: Vec<Vec<f64>>,
    b2: Vec<Vec<f64>>,
    child1: NodeDoc,
    child2: NodeDoc,
}

fn columns(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j)).collect())
        .collect()
}

fn tree_doc(hm: &HMatrix) -> NodeDoc {
    match &hm.tree {
        Tree::Leaf(block) => {
            NodeDoc::Leaf((0..block.rows()).map(|i| block.row(i).to_vec()).collect())
        }
        Tree::Node(n) => NodeDoc::Node(Box::new(InnerDoc {
            a1: columns(&n.a1),
            b1: columns(&n.b1),
            a2: columns(&n.a2),
            b2: columns(&n.b2),
            child1: tree_doc(&n.child1),
            child2: tree_doc(&n.child2),
        })),
    }
}

fn factor_from_columns(
    cols: &[Vec<f64>],
    name: &str,
    m: usize,
    rank: usize,
    path: &str,
) -> Result<DenseMatrix, ParseError> {
    if cols.len() != rank {
        return Err(invalid(
            path,
            format!("factor {name} has {} columns, expected rank {rank}", cols.len()),
        ));
    }
    let mut out = DenseMatrix::zeros(m, rank);
    for (j, col) in cols.iter().enumerate() {
        if col.len() != m {
            return Err(invalid(
                path,
                format!(
                    "factor {name} column {j} has {} entries, expected child dimension {m}",
                    col.len()
                ),
            ));
        }
        for (i, &v) in col.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid(
                    path,
                    format!("factor {name} entry ({i},{j}) is not finite"),
                ));
            }
            out.set(i, j, v);
        }
    }
    Ok(out)
}

fn build(doc: &NodeDoc, n0: usize, rank: usize, path: &str) -> Result<HMatrix, ParseError> {
    match doc {
        NodeDoc::Leaf(rows) => {
            if rows.len() != n0 {
                return Err(invalid(
                    path,
                    format!("leaf has {} rows, expected n0 = {n0}", rows.len()),
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != n0 {
                    return Err(invalid(
                        path,
                        format!("leaf row {i} has {} entries, expected n0 = {n0}", row.len()),
                    ));
                }
                for (j, v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(invalid(path, format!("leaf entry ({i},{j}) is not finite")));
                    }
                }
            }
            let block = DenseMatrix::from_rows(rows)
                .ok_or_else(|| invalid(path, "leaf block is empty or ragged"))?;
            HMatrix::new_leaf(block).map_err(|e| invalid(path, e.to_string()))
        }
        NodeDoc::Node(inner) => {
            let child1 = build(&inner.child1, n0, rank, &format!("{path}.child1"))?;
            let child2 = build(&inner.child2, n0, rank, &format!("{path}.child2"))?;
            let m = child1.dim();
            let a1 = factor_from_columns(&inner.a1, "a1", m, rank, path)?;
            let b1 = factor_from_columns(&inner.b1, "b1", m, rank, path)?;
            let a2 = factor_from_columns(&inner.a2, "a2", m, rank, path)?;
            let b2 = factor_from_columns(&inner.b2, "b2", m, rank, path)?;
            HMatrix::new_node(child1, child2, a1, b1, a2, b2)
                .map_err(|e| invalid(path, e.to_string()))
        }
    }
}

impl HMatrix {
    /// Serializes the representation to a compact JSON document.
    pub fn to_json(&self) -> String {
        let doc = HDoc {
            n0: self.leaf_size(),
            rank: self.rank(),
            root: tree_doc(self),
        };
        serde_json::to_string(&doc).expect("in-memory serialization cannot fail")
    }

    /// Serializes the representation to an indented JSON document.
    pub fn to_json_pretty(&self) -> String {
        let doc = HDoc {
            n0: self.leaf_size(),
            rank: self.rank(),
            root: tree_doc(self),
        };
        serde_json::to_string_pretty(&doc).expect("in-memory serialization cannot fail")
    }

    /// Parses a document produced by [`HMatrix::to_json`], validating every
    /// structural invariant. Errors name the offending location, e.g.
    /// `root.child1`.
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let doc: HDoc = serde_json::from_str(text)?;
        if doc.n0 == 0 {
            return Err(invalid("n0", "leaf size must be at least 1"));
        }
        if doc.rank == 0 {
            return Err(invalid("rank", "rank must be at least 1"));
        }
        build(&doc.root, doc.n0, doc.rank, "root")
    }
}
