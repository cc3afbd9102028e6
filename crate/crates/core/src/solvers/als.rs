//! Alternating nonnegative least squares.
//!
//! Each half-sweep solves the block subproblem exactly: the rows of `V` (then
//! the rows of `U`) decouple into independent NNLS columns against the fixed
//! other factor, all sharing one Gram matrix.

use crate::matrix::{DenseMatrix, DenseVector};
use crate::model::FactorPair;
use crate::nnls::solve_nnls_gram;

/// One ALS sweep. Returns the updated pair plus a stall flag raised when an
/// inner NNLS hit its swap budget; the best iterate is still used, and a row
/// is only replaced when it does not increase its column residual, so the
/// sweep remains nonincreasing either way.
pub fn als_sweep(a: &DenseMatrix, fp: &FactorPair) -> (FactorPair, bool) {
    let mut out = fp.clone();
    let mut degenerate = false;

    // V half: row j of V fits column j of A against U.
    let gram = out.u.gram();
    let mut stalled_half = half_sweep(&gram, &out.u, a, &mut out.v, false);
    degenerate |= stalled_half;

    // U half against the fresh V: row i of U fits row i of A.
    let gram = out.v.gram();
    stalled_half = half_sweep(&gram, &out.v, a, &mut out.u, true);
    degenerate |= stalled_half;

    (out, degenerate)
}

/// Solve every row of `target_factor` against the fixed factor. When
/// `transpose` is set the data columns are the rows of `a`.
fn half_sweep(
    gram: &DenseMatrix,
    fixed: &DenseMatrix,
    a: &DenseMatrix,
    target_factor: &mut DenseMatrix,
    transpose: bool,
) -> bool {
    let n_rows = target_factor.rows();
    let mut degenerate = false;
    for j in 0..n_rows {
        let col: DenseVector = if transpose {
            a.row_copy(j)
        } else {
            DenseVector::from_slice(a.col(j))
        };
        let rhs = fixed.matvec_t(&col);
        let solved = match solve_nnls_gram(gram, &rhs) {
            Ok(v) => v,
            Err(failure) => {
                degenerate = true;
                failure.best
            }
        };
        // Residual via the quadratic form; keep the old row if the solve
        // (possibly truncated) would regress it.
        let old = target_factor.row_copy(j);
        if residual_sq(gram, &rhs, &solved) <= residual_sq(gram, &rhs, &old) {
            for (k, &x) in solved.iter().enumerate() {
                target_factor[(j, k)] = x;
            }
        }
    }
    degenerate
}

/// `||a - U v||^2` up to the constant `||a||^2`: `v^T G v - 2 v^T rhs`.
fn residual_sq(gram: &DenseMatrix, rhs: &DenseVector, v: &DenseVector) -> f64 {
    let gv = gram.matvec(v);
    let mut s = 0.0;
    for i in 0..v.len() {
        s += v[i] * (gv[i] - 2.0 * rhs[i]);
    }
    s
}
