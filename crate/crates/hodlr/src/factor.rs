//! Exact factorization and solves.
//!
//! `setup` walks the tree bottom-up. Leaves get a partially pivoted LU
//! factorization. Every node precomputes the solve products
//!
//! ```text
//! C = A1^-T a2      D = A2^-1 b2      Gamma = C^T a1      Delta = (b1^T D) Gamma
//! ```
//!
//! using the already factored children, plus a factorization of the small
//! `k x k` matrix `I - Delta` (stored as the scalar `1 - delta` when
//! `k = 1`). A solve then costs one downward sweep: eliminate the first
//! half, solve the second half recursively, apply the rank-`k` correction
//! through `I - Delta`, and back-substitute into the first half. Nothing is
//! ever truncated, so solutions are exact up to rounding.
//!
//! A `FactorizedHMatrix` is immutable; concurrent solves on separate
//! right-hand-side buffers are safe.

use crate::count::{NoTally, OpCounter, Tally};
use crate::dense::DenseMatrix;
use crate::hmatrix::{HMatrix, HNode, StructureError, Tree};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FactorError {
    /// A diagonal block or a node's `I - Delta` matrix failed the pivot
    /// test. `path` is the subtree descent string: '0' for child 1, '1' for
    /// child 2, empty for the root.
    #[error("hierarchical singularity at subtree path '{path}'")]
    HierarchicalSingularity { path: String },
}

/// Pivot rejection rule shared by leaf blocks and `I - Delta`: a pivot is
/// singular when its magnitude is at most `64 * eps * max_abs(block)`.
fn pivot_tolerance(max_abs: f64) -> f64 {
    64.0 * f64::EPSILON * max_abs
}

/// Packed partially pivoted LU of a small dense block: unit lower factor
/// below the diagonal, upper factor on and above it, with the row swap
/// made at each elimination step.
#[derive(Debug)]
pub(crate) struct LeafFactor {
    lu: DenseMatrix,
    swaps: Vec<usize>,
}

impl LeafFactor {
    fn new<T: Tally>(block: &DenseMatrix, tally: &mut T) -> Result<Self, usize> {
        let n = block.rows();
        debug_assert_eq!(n, block.cols());
        let tol = pivot_tolerance(block.max_abs());
        let mut lu = block.clone();
        let mut swaps = vec![0; n];

        for step in 0..n {
            let mut pivot_row = step;
            let mut pivot_mag = lu.get(step, step).abs();
            for r in step + 1..n {
                let mag = lu.get(r, step).abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag <= tol {
                return Err(step);
            }
            swaps[step] = pivot_row;
            if pivot_row != step {
                for j in 0..n {
                    let tmp = lu.get(step, j);
                    lu.set(step, j, lu.get(pivot_row, j));
                    lu.set(pivot_row, j, tmp);
                }
            }
            let pivot = lu.get(step, step);
            for r in step + 1..n {
                let factor = lu.get(r, step) / pivot;
                lu.set(r, step, factor);
                for j in step + 1..n {
                    let v = lu.get(r, j) - factor * lu.get(step, j);
                    lu.set(r, j, v);
                }
            }
            let m = (n - step - 1) as u64;
            tally.op(m * m, m * m, m);
        }
        Ok(LeafFactor { lu, swaps })
    }

    fn dim(&self) -> usize {
        self.swaps.len()
    }

    /// In-place solve of `A x = b`.
    fn solve_in_place<T: Tally>(&self, x: &mut [f64], tally: &mut T) {
        let n = self.dim();
        for s in 0..n {
            if self.swaps[s] != s {
                x.swap(s, self.swaps[s]);
            }
        }
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
            tally.op(i as u64, i as u64, 0);
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
            let m = (n - i - 1) as u64;
            tally.op(m, m, 1);
        }
    }

    /// In-place solve of `A^T x = b`.
    fn solve_adjoint_in_place<T: Tally>(&self, x: &mut [f64], tally: &mut T) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(j, i) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
            tally.op(i as u64, i as u64, 1);
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.get(j, i) * x[j];
            }
            x[i] = acc;
            let m = (n - i - 1) as u64;
            tally.op(m, m, 0);
        }
        for s in (0..n).rev() {
            if self.swaps[s] != s {
                x.swap(s, self.swaps[s]);
            }
        }
    }
}

/// Factorization of the `k x k` correction matrix `I - Delta`.
#[derive(Debug)]
enum SmwFactor {
    /// `1 - delta` for rank 1.
    Scalar(f64),
    Factored(LeafFactor),
}

/// Per-node solve products, all fixed at setup time.
#[derive(Debug)]
pub(crate) struct NodeFactors {
    /// `A1^-T a2`, shape `m x k`.
    c: DenseMatrix,
    /// `A2^-1 b2`, shape `m x k`.
    d: DenseMatrix,
    /// `C^T a1`, shape `k x k`.
    gamma: DenseMatrix,
    /// `(b1^T D) Gamma`, shape `k x k`. The solves only touch its factored
    /// form in `smw`.
    #[allow(dead_code)]
    delta: DenseMatrix,
    smw: SmwFactor,
}

#[derive(Debug)]
enum FactorTree {
    Leaf(LeafFactor),
    Node {
        factors: NodeFactors,
        child1: Box<FactorTree>,
        child2: Box<FactorTree>,
    },
}

/// A hierarchical matrix together with everything `solve` and
/// `solve_adjoint` need.
#[derive(Debug)]
pub struct FactorizedHMatrix {
    matrix: HMatrix,
    tree: FactorTree,
    setup_ops: OpCounter,
}

/// Prepares a matrix for repeated solves. Consumes the representation; it
/// stays available through [`FactorizedHMatrix::matrix`].
pub fn setup(matrix: HMatrix) -> Result<FactorizedHMatrix, FactorError> {
    let mut counter = OpCounter::default();
    let mut path = Vec::new();
    let mut scratch = vec![0.0; 2 * matrix.rank()];
    let tree = setup_rec(&matrix, &mut path, &mut scratch, &mut counter)?;
    counter.storage = matrix.storage();
    Ok(FactorizedHMatrix {
        matrix,
        tree,
        setup_ops: counter,
    })
}

/// Like [`setup`], but factors independent subtrees through `rayon::join`.
/// Run inside a configured thread pool to bound the parallelism. Results
/// and operation counts are identical to the sequential version.
pub fn setup_parallel(matrix: HMatrix) -> Result<FactorizedHMatrix, FactorError> {
    let (tree, mut counter) = setup_rec_par(&matrix, Vec::new())?;
    counter.storage = matrix.storage();
    Ok(FactorizedHMatrix {
        matrix,
        tree,
        setup_ops: counter,
    })
}

/// Subtrees below this dimension are factored sequentially.
const PARALLEL_CUTOFF: usize = 2048;

fn setup_rec_par(hm: &HMatrix, path: Vec<u8>) -> Result<(FactorTree, OpCounter), FactorError> {
    match &hm.tree {
        Tree::Node(n) if n.child1.dim() >= PARALLEL_CUTOFF => {
            let mut path1 = path.clone();
            path1.push(b'0');
            let mut path2 = path.clone();
            path2.push(b'1');
            let (r1, r2) = rayon::join(
                || setup_rec_par(&n.child1, path1),
                || setup_rec_par(&n.child2, path2),
            );
            let (f1, c1) = r1?;
            let (f2, c2) = r2?;
            let mut counter = OpCounter::default();
            counter.absorb(&c1);
            counter.absorb(&c2);
            let mut scratch = vec![0.0; 2 * hm.rank()];
            let factors =
                node_factors(n, &f1, &f2, &path, &mut scratch, &mut counter)?;
            Ok((
                FactorTree::Node {
                    factors,
                    child1: Box::new(f1),
                    child2: Box::new(f2),
                },
                counter,
            ))
        }
        _ => {
            let mut counter = OpCounter::default();
            let mut path = path;
            let mut scratch = vec![0.0; 2 * hm.rank()];
            let tree = setup_rec(hm, &mut path, &mut scratch, &mut counter)?;
            Ok((tree, counter))
        }
    }
}

fn setup_rec(
    hm: &HMatrix,
    path: &mut Vec<u8>,
    scratch: &mut [f64],
    tally: &mut OpCounter,
) -> Result<FactorTree, FactorError> {
    match &hm.tree {
        Tree::Leaf(block) => LeafFactor::new(block, tally)
            .map(FactorTree::Leaf)
            .map_err(|_| singularity(path)),
        Tree::Node(n) => {
            path.push(b'0');
            let f1 = setup_rec(&n.child1, path, scratch, tally)?;
            *path.last_mut().unwrap() = b'1';
            let f2 = setup_rec(&n.child2, path, scratch, tally)?;
            path.pop();
            let factors = node_factors(n, &f1, &f2, path, scratch, tally)?;
            Ok(FactorTree::Node {
                factors,
                child1: Box::new(f1),
                child2: Box::new(f2),
            })
        }
    }
}

fn node_factors(
    n: &HNode,
    f1: &FactorTree,
    f2: &FactorTree,
    path: &[u8],
    scratch: &mut [f64],
    tally: &mut OpCounter,
) -> Result<NodeFactors, FactorError> {
    let h = n.child1.dim();
    let k = n.a1.cols();
    let mut buf = vec![0.0; h];

    // C = A1^-T a2, column by column through the adjoint solver.
    let mut c = n.a2.clone();
    for m in 0..k {
        for i in 0..h {
            buf[i] = c.get(i, m);
        }
        solve_adjoint_rec(f1, &n.child1, &mut buf, scratch, tally);
        for i in 0..h {
            c.set(i, m, buf[i]);
        }
    }

    // D = A2^-1 b2.
    let mut d = n.b2.clone();
    for m in 0..k {
        for i in 0..h {
            buf[i] = d.get(i, m);
        }
        solve_rec(f2, &n.child2, &mut buf, scratch, tally);
        for i in 0..h {
            d.set(i, m, buf[i]);
        }
    }

    // Gamma = C^T a1.
    let mut gamma = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0.0;
            for r in 0..h {
                acc += c.get(r, i) * n.a1.get(r, j);
            }
            gamma.set(i, j, acc);
            tally.inner(h);
        }
    }

    // Delta = (b1^T D) Gamma.
    let mut b1d = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0.0;
            for r in 0..h {
                acc += n.b1.get(r, i) * d.get(r, j);
            }
            b1d.set(i, j, acc);
            tally.inner(h);
        }
    }
    let mut delta = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0.0;
            for s in 0..k {
                acc += b1d.get(i, s) * gamma.get(s, j);
            }
            delta.set(i, j, acc);
            tally.inner(k);
        }
    }

    let smw = if k == 1 {
        let one_minus = 1.0 - delta.get(0, 0);
        // The pivot rule degenerates to an exact zero test on a 1x1 block.
        if one_minus == 0.0 {
            return Err(singularity(path));
        }
        SmwFactor::Scalar(one_minus)
    } else {
        let mut eye_minus = DenseMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let v = if i == j { 1.0 } else { 0.0 };
                eye_minus.set(i, j, v - delta.get(i, j));
            }
        }
        tally.op((k * k) as u64, 0, 0);
        let lf = LeafFactor::new(&eye_minus, tally).map_err(|_| singularity(path))?;
        SmwFactor::Factored(lf)
    };

    Ok(NodeFactors {
        c,
        d,
        gamma,
        delta,
        smw,
    })
}

fn singularity(path: &[u8]) -> FactorError {
    FactorError::HierarchicalSingularity {
        path: String::from_utf8(path.to_vec()).expect("path bytes are '0'/'1'"),
    }
}

fn solve_rec<T: Tally>(
    ft: &FactorTree,
    hm: &HMatrix,
    x: &mut [f64],
    scratch: &mut [f64],
    tally: &mut T,
) {
    match (ft, &hm.tree) {
        (FactorTree::Leaf(lf), Tree::Leaf(_)) => lf.solve_in_place(x, tally),
        (
            FactorTree::Node {
                factors,
                child1,
                child2,
            },
            Tree::Node(n),
        ) => {
            let h = n.child1.dim();
            let k = n.a1.cols();
            let (x1, x2) = x.split_at_mut(h);
            if k == 1 {
                let alpha1 = factors.c.col_dot(0, x1);
                tally.inner(h);
                n.b2.col_axpy(0, -alpha1, x2);
                tally.axpy(h);
                solve_rec(child2, &n.child2, x2, scratch, tally);
                let alpha2 = n.b1.col_dot(0, x2);
                tally.inner(h);
                let SmwFactor::Scalar(one_minus) = factors.smw else {
                    unreachable!("rank-1 node stores a scalar correction factor");
                };
                let alpha3 = factors.gamma.get(0, 0) * alpha2 / one_minus;
                tally.smw_scalar();
                factors.d.col_axpy(0, alpha3, x2);
                tally.axpy(h);
                let alpha4 = n.b1.col_dot(0, x2);
                tally.inner(h);
                n.a1.col_axpy(0, -alpha4, x1);
                tally.axpy(h);
                solve_rec(child1, &n.child1, x1, scratch, tally);
            } else {
                {
                    let (s, _) = scratch.split_at_mut(k);
                    for m in 0..k {
                        s[m] = factors.c.col_dot(m, x1);
                        tally.inner(h);
                    }
                    for m in 0..k {
                        n.b2.col_axpy(m, -s[m], x2);
                        tally.axpy(h);
                    }
                }
                solve_rec(child2, &n.child2, x2, scratch, tally);
                {
                    let (s, u) = scratch.split_at_mut(k);
                    for m in 0..k {
                        s[m] = n.b1.col_dot(m, x2);
                        tally.inner(h);
                    }
                    let SmwFactor::Factored(lf) = &factors.smw else {
                        unreachable!("rank-k node stores a factored correction matrix");
                    };
                    lf.solve_in_place(s, tally);
                    for (i, ui) in u.iter_mut().enumerate().take(k) {
                        let mut acc = 0.0;
                        for (j, sj) in s.iter().enumerate() {
                            acc += factors.gamma.get(i, j) * sj;
                        }
                        *ui = acc;
                        tally.inner(k);
                    }
                    for m in 0..k {
                        factors.d.col_axpy(m, u[m], x2);
                        tally.axpy(h);
                    }
                    for m in 0..k {
                        s[m] = n.b1.col_dot(m, x2);
                        tally.inner(h);
                    }
                    for m in 0..k {
                        n.a1.col_axpy(m, -s[m], x1);
                        tally.axpy(h);
                    }
                }
                solve_rec(child1, &n.child1, x1, scratch, tally);
            }
        }
        _ => unreachable!("factor tree mirrors the matrix tree"),
    }
}

fn solve_adjoint_rec<T: Tally>(
    ft: &FactorTree,
    hm: &HMatrix,
    x: &mut [f64],
    scratch: &mut [f64],
    tally: &mut T,
) {
    match (ft, &hm.tree) {
        (FactorTree::Leaf(lf), Tree::Leaf(_)) => lf.solve_adjoint_in_place(x, tally),
        (
            FactorTree::Node {
                factors,
                child1,
                child2,
            },
            Tree::Node(n),
        ) => {
            let h = n.child1.dim();
            let k = n.a1.cols();
            let (x1, x2) = x.split_at_mut(h);
            solve_adjoint_rec(child1, &n.child1, x1, scratch, tally);
            if k == 1 {
                let alpha1 = n.a1.col_dot(0, x1);
                tally.inner(h);
                n.b1.col_axpy(0, -alpha1, x2);
                tally.axpy(h);
                let alpha2 = factors.d.col_dot(0, x2);
                tally.inner(h);
                let SmwFactor::Scalar(one_minus) = factors.smw else {
                    unreachable!("rank-1 node stores a scalar correction factor");
                };
                let alpha3 = factors.gamma.get(0, 0) * alpha2 / one_minus;
                tally.smw_scalar();
                // The transposed elimination adds its correction along b1;
                // the sign really is positive, in contrast to the three
                // subtractive updates around it.
                n.b1.col_axpy(0, alpha3, x2);
                tally.axpy(h);
                solve_adjoint_rec(child2, &n.child2, x2, scratch, tally);
                let alpha4 = n.b2.col_dot(0, x2);
                tally.inner(h);
                factors.c.col_axpy(0, -alpha4, x1);
                tally.axpy(h);
            } else {
                {
                    let (s, u) = scratch.split_at_mut(k);
                    for m in 0..k {
                        s[m] = n.a1.col_dot(m, x1);
                        tally.inner(h);
                    }
                    for m in 0..k {
                        n.b1.col_axpy(m, -s[m], x2);
                        tally.axpy(h);
                    }
                    for m in 0..k {
                        s[m] = factors.d.col_dot(m, x2);
                        tally.inner(h);
                    }
                    for (i, ui) in u.iter_mut().enumerate().take(k) {
                        let mut acc = 0.0;
                        for (j, sj) in s.iter().enumerate() {
                            acc += factors.gamma.get(j, i) * sj;
                        }
                        *ui = acc;
                        tally.inner(k);
                    }
                    let SmwFactor::Factored(lf) = &factors.smw else {
                        unreachable!("rank-k node stores a factored correction matrix");
                    };
                    lf.solve_adjoint_in_place(u, tally);
                    // Additive correction, mirroring the rank-1 case.
                    for m in 0..k {
                        n.b1.col_axpy(m, u[m], x2);
                        tally.axpy(h);
                    }
                }
                solve_adjoint_rec(child2, &n.child2, x2, scratch, tally);
                {
                    let (s, _) = scratch.split_at_mut(k);
                    for m in 0..k {
                        s[m] = n.b2.col_dot(m, x2);
                        tally.inner(h);
                    }
                    for m in 0..k {
                        factors.c.col_axpy(m, -s[m], x1);
                        tally.axpy(h);
                    }
                }
            }
        }
        _ => unreachable!("factor tree mirrors the matrix tree"),
    }
}

impl FactorizedHMatrix {
    pub fn matrix(&self) -> &HMatrix {
        &self.matrix
    }

    /// Operation tallies recorded while this factorization was built,
    /// including the representation's scalar storage.
    pub fn setup_ops(&self) -> OpCounter {
        self.setup_ops
    }

    /// Operation tallies of a single solve. The cost depends only on the
    /// structure, so this runs one counted solve on a scratch vector.
    pub fn solve_ops(&self) -> OpCounter {
        let mut x = vec![0.0; self.matrix.dim()];
        self.solve_in_place_counted(&mut x)
            .expect("scratch vector has matching length")
    }

    /// Solves `A x = z` in place: `x` holds `z` on entry and the solution on
    /// return.
    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<(), StructureError> {
        self.matrix.check_len(x.len())?;
        let mut scratch = vec![0.0; 2 * self.matrix.rank()];
        solve_rec(&self.tree, &self.matrix, x, &mut scratch, &mut NoTally);
        Ok(())
    }

    /// Solves `A^T x = z` in place.
    pub fn solve_adjoint_in_place(&self, x: &mut [f64]) -> Result<(), StructureError> {
        self.matrix.check_len(x.len())?;
        let mut scratch = vec![0.0; 2 * self.matrix.rank()];
        solve_adjoint_rec(&self.tree, &self.matrix, x, &mut scratch, &mut NoTally);
        Ok(())
    }

    /// In-place solve that returns the operation tallies.
    pub fn solve_in_place_counted(&self, x: &mut [f64]) -> Result<OpCounter, StructureError> {
        self.matrix.check_len(x.len())?;
        let mut counter = OpCounter::default();
        let mut scratch = vec![0.0; 2 * self.matrix.rank()];
        solve_rec(&self.tree, &self.matrix, x, &mut scratch, &mut counter);
        Ok(counter)
    }

    /// In-place adjoint solve that returns the operation tallies.
    pub fn solve_adjoint_in_place_counted(
        &self,
        x: &mut [f64],
    ) -> Result<OpCounter, StructureError> {
        self.matrix.check_len(x.len())?;
        let mut counter = OpCounter::default();
        let mut scratch = vec![0.0; 2 * self.matrix.rank()];
        solve_adjoint_rec(&self.tree, &self.matrix, x, &mut scratch, &mut counter);
        Ok(counter)
    }

    /// Copying wrapper around [`Self::solve_in_place`].
    pub fn solve(&self, z: &[f64]) -> Result<Vec<f64>, StructureError> {
        let mut x = z.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Copying wrapper around [`Self::solve_adjoint_in_place`].
    pub fn solve_adjoint(&self, z: &[f64]) -> Result<Vec<f64>, StructureError> {
        let mut x = z.to_vec();
        self.solve_adjoint_in_place(&mut x)?;
        Ok(x)
    }
}
