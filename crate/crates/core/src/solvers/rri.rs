//! Rank-one residue iteration.
//!
//! Cycles over the factor columns and replaces each one by the closed-form
//! global minimizer of its rank-one subproblem
//! `min_{v >= 0} 1/2 ||R_t - u_t v^T||_F^2` with residue
//! `R_t = A - sum_{i != t} u_i v_i^T`. The residue is never materialized:
//! `R_t^T u_t` is assembled as `A^T u_t - sum_{i != t} v_i (u_i^T u_t)`, so a
//! full sweep over the `2r` columns costs `O(mnr)`.

use crate::matrix::{dot, norm2_sq, DenseMatrix};
use crate::model::FactorPair;

/// `R_t^T u_t` for the current column, via the Gram-correction form.
pub(crate) fn residue_t_apply_u(a: &DenseMatrix, fp: &FactorPair, t: usize) -> Vec<f64> {
    let u_t = fp.u.col(t);
    let mut w = a.matvec_t(u_t).0;
    for i in 0..fp.rank() {
        if i == t {
            continue;
        }
        let c = dot(fp.u.col(i), u_t);
        if c == 0.0 {
            continue;
        }
        for (wj, &vj) in w.iter_mut().zip(fp.v.col(i)) {
            *wj -= c * vj;
        }
    }
    w
}

/// `R_t v_t` for the current column.
pub(crate) fn residue_apply_v(a: &DenseMatrix, fp: &FactorPair, t: usize) -> Vec<f64> {
    let v_t = fp.v.col(t);
    let mut w = a.matvec(v_t).0;
    for i in 0..fp.rank() {
        if i == t {
            continue;
        }
        let c = dot(fp.v.col(i), v_t);
        if c == 0.0 {
            continue;
        }
        for (wj, &uj) in w.iter_mut().zip(fp.u.col(i)) {
            *wj -= c * uj;
        }
    }
    w
}

/// Closed-form column update `[w + psi * old]_+ / (pivot_sq + psi)`.
///
/// With `psi = 0` this is the plain rank-one update including its zero
/// branches: a zero positive part (or zero pivot column) zeroes the column.
pub(crate) fn column_update(w: &[f64], old: &[f64], pivot_sq: f64, psi: f64) -> Vec<f64> {
    let den = pivot_sq + psi;
    if den == 0.0 {
        return vec![0.0; w.len()];
    }
    w.iter()
        .zip(old)
        .map(|(&wi, &oi)| (wi + psi * oi).max(0.0) / den)
        .collect()
}

fn update_column_pair(a: &DenseMatrix, fp: &mut FactorPair, t: usize, psi: f64) {
    let w = residue_t_apply_u(a, fp, t);
    let nu = norm2_sq(fp.u.col(t));
    let v_new = column_update(&w, fp.v.col(t), nu, psi);
    fp.v.set_col(t, &v_new);

    let w = residue_apply_v(a, fp, t);
    let nv = norm2_sq(fp.v.col(t));
    let u_new = column_update(&w, fp.u.col(t), nv, psi);
    fp.u.set_col(t, &u_new);
}

/// One plain RRI sweep: for `t = 1..r`, update `v_t` then `u_t`.
pub fn rri_sweep(a: &DenseMatrix, fp: &FactorPair) -> FactorPair {
    let mut out = fp.clone();
    for t in 0..out.rank() {
        update_column_pair(a, &mut out, t, 0.0);
    }
    out
}

/// One damped sweep: the closed-form updates of the proximal problem with
/// damping `psi >= 0`, dummy anchors eliminated. `psi = 0` reduces to
/// [`rri_sweep`] exactly.
pub fn damped_rri_sweep(a: &DenseMatrix, fp: &FactorPair, psi: f64) -> FactorPair {
    let mut out = fp.clone();
    for t in 0..out.rank() {
        update_column_pair(a, &mut out, t, psi);
    }
    out
}

/// Blockwise alternative order: all `v_t` first, then all `u_t`.
pub fn rri_sweep_blockwise(a: &DenseMatrix, fp: &FactorPair, psi: f64) -> FactorPair {
    let mut out = fp.clone();
    for t in 0..out.rank() {
        let w = residue_t_apply_u(a, &out, t);
        let nu = norm2_sq(out.u.col(t));
        let v_new = column_update(&w, out.v.col(t), nu, psi);
        out.v.set_col(t, &v_new);
    }
    for t in 0..out.rank() {
        let w = residue_apply_v(a, &out, t);
        let nv = norm2_sq(out.v.col(t));
        let u_new = column_update(&w, out.u.col(t), nv, psi);
        out.u.set_col(t, &u_new);
    }
    out
}

/// Revive a dead column pair (`u_t = v_t = 0`) by the rank-one substitution
/// `u_t = e_{i*}`, `v_t = [R_t^T e_{i*}]_+` with `i*` the row of the residue
/// whose positive part carries the most energy. Returns whether the
/// substitution was applied; it is a no-op when `R_t <= 0`.
pub fn substitute_zero_column(a: &DenseMatrix, fp: &mut FactorPair, t: usize) -> bool {
    debug_assert!(fp.u.col(t).iter().all(|&x| x == 0.0));
    debug_assert!(fp.v.col(t).iter().all(|&x| x == 0.0));
    // Residue rows: with the column pair at zero, R_t = A - U V^T.
    let approx = fp.product();
    let mut best_row = 0usize;
    let mut best_gain = 0.0f64;
    for i in 0..a.rows() {
        let mut gain = 0.0;
        for j in 0..a.cols() {
            let r = a[(i, j)] - approx[(i, j)];
            if r > 0.0 {
                gain += r * r;
            }
        }
        if gain > best_gain {
            best_gain = gain;
            best_row = i;
        }
    }
    if best_gain == 0.0 {
        return false;
    }
    let mut u = vec![0.0; a.rows()];
    u[best_row] = 1.0;
    fp.u.set_col(t, &u);
    let v: Vec<f64> = (0..a.cols())
        .map(|j| (a[(best_row, j)] - approx[(best_row, j)]).max(0.0))
        .collect();
    fp.v.set_col(t, &v);
    true
}

/// Sweep with an in-loop substitution budget: whenever a column pair dies,
/// the substitution is attempted immediately, at most `budget` times in
/// total. Returns the number of substitutions applied this sweep.
pub(crate) fn sweep_with_substitution(
    a: &DenseMatrix,
    fp: &mut FactorPair,
    psi: f64,
    blockwise: bool,
    budget_left: usize,
) -> usize {
    let mut used = 0usize;
    if blockwise {
        *fp = rri_sweep_blockwise(a, fp, psi);
        for t in 0..fp.rank() {
            if used < budget_left && column_pair_is_zero(fp, t) && substitute_zero_column(a, fp, t)
            {
                used += 1;
            }
        }
        return used;
    }
    for t in 0..fp.rank() {
        update_column_pair(a, fp, t, psi);
        if used < budget_left && column_pair_is_zero(fp, t) && substitute_zero_column(a, fp, t) {
            used += 1;
        }
    }
    used
}

fn column_pair_is_zero(fp: &FactorPair, t: usize) -> bool {
    fp.u.col(t).iter().all(|&x| x == 0.0) && fp.v.col(t).iter().all(|&x| x == 0.0)
}
