//! Active-set nonnegative least squares.
//!
//! Solves `min_{v >= 0} 1/2 ||a - U v||_2^2` by the Lawson-Hanson passive-set
//! method, with the inner unconstrained solves done through the normal
//! equations and a dense Cholesky factorization. The subproblems that arise
//! in alternating least squares are tiny (r columns, r much smaller than m),
//! so the Gram matrix `U^T U` is formed once and shared across solves.

use crate::error::Error;
use crate::matrix::{DenseMatrix, DenseVector};
use std::fmt;

/// One nonnegative least squares instance.
#[derive(Debug, Clone)]
pub struct NnlsProblem {
    pub design: DenseMatrix,
    pub target: DenseVector,
}

/// The active-set iteration exceeded its swap budget. Carries the best
/// feasible iterate reached so far.
#[derive(Debug, Clone)]
pub struct NnlsFailure {
    pub best: DenseVector,
}

impl fmt::Display for NnlsFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nnls active-set swap budget exceeded")
    }
}

impl std::error::Error for NnlsFailure {}

impl From<NnlsFailure> for Error {
    fn from(_: NnlsFailure) -> Error {
        Error::NnlsDegenerate
    }
}

/// Relative KKT tolerance: zero coordinates must satisfy
/// `(U^T U v - U^T a)_i >= -KKT_TOL * ||U^T a||_inf`.
pub const KKT_TOL: f64 = 1e-9;

/// Solve one NNLS instance. The swap budget is `3 r`.
pub fn solve_nnls(p: &NnlsProblem) -> Result<DenseVector, NnlsFailure> {
    let gram = p.design.gram();
    let rhs = p.design.matvec_t(&p.target);
    solve_nnls_gram(&gram, &rhs)
}

/// Lawson-Hanson on the normal equations `G v = rhs`, `G = U^T U`,
/// `rhs = U^T a`. Exposed so that alternating least squares can reuse one
/// Gram matrix across a whole half-sweep.
pub fn solve_nnls_gram(gram: &DenseMatrix, rhs: &DenseVector) -> Result<DenseVector, NnlsFailure> {
    let r = gram.rows();
    debug_assert_eq!(gram.cols(), r);
    debug_assert_eq!(rhs.len(), r);
    let max_swaps = 3 * r;
    let tol = KKT_TOL * rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut v = vec![0.0f64; r];
    let mut passive = vec![false; r];
    let mut swaps = 0usize;

    loop {
        // Dual w = rhs - G v; the entering variable is the most negative
        // gradient coordinate, i.e. the largest w. Ties keep the smallest
        // index because only a strictly larger w replaces the candidate.
        let w = residual_dual(gram, rhs, &v);
        let mut enter: Option<usize> = None;
        for i in 0..r {
            if !passive[i] && w[i] > tol && enter.is_none_or(|b| w[i] > w[b]) {
                enter = Some(i);
            }
        }
        let Some(enter) = enter else {
            return Ok(DenseVector(v));
        };
        passive[enter] = true;
        swaps += 1;
        if swaps > max_swaps {
            return Err(NnlsFailure {
                best: DenseVector(v),
            });
        }

        // Restore feasibility of the passive-set least squares solution.
        loop {
            let support: Vec<usize> = (0..r).filter(|&i| passive[i]).collect();
            let Some(z) = solve_on_support(gram, rhs, &support) else {
                return Err(NnlsFailure {
                    best: DenseVector(v),
                });
            };
            if z.iter().all(|&zi| zi > 0.0) {
                v.iter_mut().for_each(|x| *x = 0.0);
                for (&i, &zi) in support.iter().zip(&z) {
                    v[i] = zi;
                }
                break;
            }
            // Step toward z until the first coordinate hits zero, then drop it.
            let mut alpha = f64::INFINITY;
            for (&i, &zi) in support.iter().zip(&z) {
                if zi <= 0.0 {
                    let step = v[i] / (v[i] - zi);
                    alpha = alpha.min(step);
                }
            }
            for (&i, &zi) in support.iter().zip(&z) {
                v[i] += alpha * (zi - v[i]);
            }
            let vmax = v.iter().fold(0.0f64, |m, x| m.max(*x));
            for (&i, &zi) in support.iter().zip(&z) {
                if zi <= 0.0 && v[i] <= 1e-12 * vmax.max(1.0) {
                    v[i] = 0.0;
                    passive[i] = false;
                }
            }
            swaps += 1;
            if swaps > max_swaps {
                return Err(NnlsFailure {
                    best: DenseVector(v),
                });
            }
        }
    }
}

fn residual_dual(gram: &DenseMatrix, rhs: &DenseVector, v: &[f64]) -> Vec<f64> {
    let gv = gram.matvec(v);
    rhs.iter().zip(gv.iter()).map(|(&r, &g)| r - g).collect()
}

/// Unconstrained least squares on the support via Cholesky of the reduced
/// Gram block. `None` if the block is numerically singular.
fn solve_on_support(gram: &DenseMatrix, rhs: &DenseVector, support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut g = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (p, &i) in support.iter().enumerate() {
        b[p] = rhs[i];
        for (q, &j) in support.iter().enumerate() {
            g[q * k + p] = gram[(i, j)];
        }
    }
    cholesky_solve(&mut g, &mut b, k)?;
    Some(b)
}

/// In-place Cholesky solve of a k x k SPD system (column-major `g`).
fn cholesky_solve(g: &mut [f64], b: &mut [f64], k: usize) -> Option<()> {
    let max_diag = (0..k).fold(0.0f64, |m, i| m.max(g[i * k + i]));
    for j in 0..k {
        for kk in 0..j {
            let l = g[kk * k + j];
            for i in j..k {
                g[j * k + i] -= l * g[kk * k + i];
            }
        }
        let d = g[j * k + j];
        if d <= 1e-13 * max_diag.max(f64::MIN_POSITIVE) {
            return None;
        }
        let s = d.sqrt();
        for i in j..k {
            g[j * k + i] /= s;
        }
    }
    // Forward substitution L y = b.
    for j in 0..k {
        b[j] /= g[j * k + j];
        for i in (j + 1)..k {
            b[i] -= g[j * k + i] * b[j];
        }
    }
    // Back substitution L^T x = y.
    for j in (0..k).rev() {
        for i in (j + 1)..k {
            b[j] -= g[j * k + i] * b[i];
        }
        b[j] /= g[j * k + j];
    }
    Some(())
}
