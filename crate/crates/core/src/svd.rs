//! Unconstrained low-rank baselines built on a one-sided Jacobi SVD.
//!
//! The truncated SVD is the global minimizer of the unconstrained rank-r
//! problem; its nonnegative part and the nonnegative dominant singular pair
//! give reference errors that bound what any nonnegative factorization can
//! achieve. These routines serve as independent oracles for the solvers, so
//! they deliberately share no code with them.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2_sq, DenseMatrix, DenseVector};

/// Relative off-diagonal tolerance for the Jacobi sweep convergence test.
const JACOBI_TOL: f64 = 1e-14;
/// Sweep cap; a 30x20 dense matrix converges in well under ten sweeps.
const JACOBI_MAX_SWEEPS: usize = 60;
/// Singular values below `cutoff * sigma_max` are treated as zero.
const NULL_CUTOFF: f64 = 1e-13;

/// Thin singular value decomposition `A = P diag(sigma) Q^T`.
///
/// `left` is m x k and `right` is n x k with orthonormal columns, where
/// `k = min(m, n)`; `singulars` is nonincreasing and nonnegative.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: DenseMatrix,
    pub singulars: DenseVector,
    pub right: DenseMatrix,
}

impl SvdResult {
    /// Rank of `A` up to the null cutoff.
    pub fn numerical_rank(&self) -> usize {
        let smax = self.singulars.first().copied().unwrap_or(0.0);
        self.singulars
            .iter()
            .filter(|&&s| s > NULL_CUTOFF * smax && s > 0.0)
            .count()
    }

    /// Materialize `P diag(sigma) Q^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        scaled_outer_sum(
            &self.left,
            &self.right,
            &self.singulars,
            0..self.singulars.len(),
        )
    }
}

/// Full-accuracy SVD by one-sided Jacobi rotations.
///
/// Wide matrices are handled by factoring the transpose. Fails only if the
/// rotation sweeps do not reach the off-diagonal tolerance within the cap.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.data().iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite { what: "svd input" });
    }
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(SvdResult {
            left: t.right,
            singulars: t.singulars,
            right: t.left,
        });
    }

    let (m, n) = a.shape();
    let mut b = a.clone();
    let mut q = DenseMatrix::identity(n);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let (aii, ajj, d) = {
                    let bi = b.col(i);
                    let bj = b.col(j);
                    (norm2_sq(bi), norm2_sq(bj), dot(bi, bj))
                };
                if d.abs() <= JACOBI_TOL * (aii * ajj).sqrt() || d == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * d);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_cols(&mut b, i, j, cs, sn);
                rotate_cols(&mut q, i, j, cs, sn);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    // Column norms of the rotated B are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<f64> = (0..n).map(|j| norm2_sq(b.col(j)).sqrt()).collect();
    order.sort_by(|&x, &y| sigmas[y].partial_cmp(&sigmas[x]).unwrap());

    let smax = sigmas[order[0]];
    let mut left = DenseMatrix::zeros(m, n);
    let mut right = DenseMatrix::zeros(n, n);
    let mut singulars = DenseVector::zeros(n);
    let mut null_cols = Vec::new();
    for (pos, &src) in order.iter().enumerate() {
        let s = sigmas[src];
        singulars[pos] = s;
        right.set_col(pos, q.col(src));
        if s > NULL_CUTOFF * smax && s > 0.0 {
            let scaled: Vec<f64> = b.col(src).iter().map(|&x| x / s).collect();
            left.set_col(pos, &scaled);
        } else {
            singulars[pos] = 0.0;
            null_cols.push(pos);
        }
    }
    complete_orthonormal(&mut left, &null_cols);

    Ok(SvdResult {
        left,
        singulars,
        right,
    })
}

fn rotate_cols(m: &mut DenseMatrix, i: usize, j: usize, cs: f64, sn: f64) {
    let rows = m.rows();
    for row in 0..rows {
        let x = m[(row, i)];
        let y = m[(row, j)];
        m[(row, i)] = cs * x - sn * y;
        m[(row, j)] = sn * x + cs * y;
    }
}

/// Fill the listed columns with vectors orthonormal to every other column.
fn complete_orthonormal(u: &mut DenseMatrix, cols: &[usize]) {
    let m = u.rows();
    for &target in cols {
        let mut filled = false;
        for cand in 0..m {
            let mut v = vec![0.0; m];
            v[cand] = 1.0;
            for j in 0..u.cols() {
                if j == target {
                    continue;
                }
                let proj = dot(&v, u.col(j));
                for (vi, &uj) in v.iter_mut().zip(u.col(j)) {
                    *vi -= proj * uj;
                }
            }
            let nrm = norm2_sq(&v).sqrt();
            if nrm > 0.5 {
                for vi in v.iter_mut() {
                    *vi /= nrm;
                }
                u.set_col(target, &v);
                filled = true;
                break;
            }
        }
        debug_assert!(filled, "orthonormal completion exhausted the basis");
    }
}

/// Sum of `sigma_i * p_i q_i^T` over the index range.
fn scaled_outer_sum(
    p: &DenseMatrix,
    q: &DenseMatrix,
    sigma: &DenseVector,
    idx: impl Iterator<Item = usize>,
) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(p.rows(), q.rows());
    for i in idx {
        let s = sigma[i];
        if s == 0.0 {
            continue;
        }
        let pi = p.col(i);
        for jq in 0..q.rows() {
            let w = s * q[(jq, i)];
            let col = out.col_mut(jq);
            for (o, &pv) in col.iter_mut().zip(pi) {
                *o += pv * w;
            }
        }
    }
    out
}

/// Best rank-r approximation `A_r` from a precomputed SVD.
pub fn truncate(s: &SvdResult, r: usize) -> Result<DenseMatrix> {
    let k = s.singulars.len();
    if r < 1 || r > k {
        return Err(Error::RankOutOfRange { rank: r, max: k });
    }
    Ok(scaled_outer_sum(&s.left, &s.right, &s.singulars, 0..r))
}

/// Squared error of the best rank-r approximation: `sum_{i>r} sigma_i^2`.
pub fn truncation_error_sq(s: &SvdResult, r: usize) -> f64 {
    s.singulars.iter().skip(r).map(|&x| x * x).sum()
}

/// Nonnegative part `[A_r]_+` of the truncated SVD together with its error
/// `||A - [A_r]_+||_F`. Requires `A >= 0`; the error never exceeds
/// `||A - A_r||_F`.
pub fn nonneg_part_baseline(a: &DenseMatrix, r: usize) -> Result<(DenseMatrix, f64)> {
    if !a.is_nonnegative() {
        return Err(Error::NegativeInput {
            what: "nonneg_part_baseline input",
        });
    }
    let s = svd(a)?;
    let ar = truncate(&s, r)?;
    let arp = ar.project_nonneg();
    let err = a.sub(&arp)?.norm_fro();
    Ok((arp, err))
}

/// Global minimizer of the rank-one nonnegative problem: the dominant
/// singular pair of `A >= 0`, sign-fixed into the nonnegative orthant and
/// balanced so that `u v^T = sigma_1 p_1 q_1^T`.
pub fn rank_one_global(a: &DenseMatrix) -> Result<(DenseVector, DenseVector)> {
    if !a.is_nonnegative() {
        return Err(Error::NegativeInput {
            what: "rank_one_global input",
        });
    }
    let s = svd(a)?;
    let sigma = s.singulars[0];
    let mut u: Vec<f64> = s.left.col(0).to_vec();
    let mut v: Vec<f64> = s.right.col(0).to_vec();
    // A nonnegative matrix always admits a nonnegative dominant pair; flip the
    // computed one if its largest-magnitude entry came out negative.
    let flip = u
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap_or(1.0);
    if flip < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let w = sigma.sqrt();
    let u = DenseVector(u.iter().map(|&x| (x * w).max(0.0)).collect());
    let v = DenseVector(v.iter().map(|&x| (x * w).max(0.0)).collect());
    Ok((u, v))
}

/// Outcome of perturbing a stationary rank-r truncation in both directions.
#[derive(Debug, Clone)]
pub struct SaddleWitness {
    pub epsilon: f64,
    pub base_error_sq: f64,
    pub upper_error_sq: f64,
    pub lower_error_sq: f64,
    /// `||A - upper|| > ||A - base||` held strictly.
    pub increase_found: bool,
    /// `||A - lower|| < ||A - base||` held strictly.
    pub decrease_found: bool,
}

/// Probe the stationary point built from the singular subset `kept`.
///
/// Constructs the two epsilon-perturbations of the stationary rank-r point:
/// one inflating its largest kept singular value, one coupling its smallest
/// kept value with the largest dropped one through a rank-preserving 2x2
/// block. For a non-dominant subset both strict inequalities hold, exhibiting
/// the saddle; for the dominant subset no decrease direction exists.
///
/// `eps` overrides the default step `min(0.1, 0.5 * sqrt(2 * gap))` where
/// `gap` is the dropped-minus-kept singular value difference being exploited.
pub fn saddle_probe(
    a: &DenseMatrix,
    r: usize,
    kept: &[usize],
    eps: Option<f64>,
) -> Result<SaddleWitness> {
    let s = svd(a)?;
    let k = s.singulars.len();
    if r < 1 || r >= k {
        return Err(Error::RankOutOfRange {
            rank: r,
            max: k.saturating_sub(1),
        });
    }
    if kept.len() != r {
        return Err(Error::InvalidArg {
            msg: format!("kept subset has {} indices, expected {r}", kept.len()),
        });
    }
    let mut seen = vec![false; k];
    for &i in kept {
        if i >= k || seen[i] {
            return Err(Error::InvalidArg {
                msg: format!("kept index {i} out of range or duplicated"),
            });
        }
        seen[i] = true;
    }

    let weakest_kept = *kept
        .iter()
        .min_by(|&&x, &&y| s.singulars[x].partial_cmp(&s.singulars[y]).unwrap())
        .unwrap();
    let strongest_kept = *kept
        .iter()
        .max_by(|&&x, &&y| s.singulars[x].partial_cmp(&s.singulars[y]).unwrap())
        .unwrap();
    let strongest_dropped = (0..k)
        .filter(|i| !seen[*i])
        .max_by(|&x, &y| s.singulars[x].partial_cmp(&s.singulars[y]).unwrap())
        .unwrap();

    let sig_a = s.singulars[weakest_kept];
    let sig_b = s.singulars[strongest_dropped];
    let gap = sig_b - sig_a;
    let epsilon = eps.unwrap_or_else(|| {
        if gap > 0.0 {
            (0.5 * (2.0 * gap).sqrt()).min(0.1)
        } else {
            0.1
        }
    });

    let base = scaled_outer_sum(&s.left, &s.right, &s.singulars, kept.iter().copied());

    // Upper perturbation: inflate the largest kept singular value by epsilon.
    let mut upper = base.clone();
    add_scaled_outer(
        &mut upper,
        s.left.col(strongest_kept),
        s.right.col(strongest_kept),
        epsilon,
    );

    // Lower perturbation: replace the weakest kept rank-one term by the
    // rank-one 2x2 coupling with the strongest dropped direction.
    let mut lower = base.clone();
    add_scaled_outer(
        &mut lower,
        s.left.col(weakest_kept),
        s.right.col(weakest_kept),
        -sig_a,
    );
    let root = epsilon * sig_a.sqrt();
    add_scaled_outer(
        &mut lower,
        s.left.col(weakest_kept),
        s.right.col(weakest_kept),
        sig_a,
    );
    add_scaled_outer(
        &mut lower,
        s.left.col(weakest_kept),
        s.right.col(strongest_dropped),
        root,
    );
    add_scaled_outer(
        &mut lower,
        s.left.col(strongest_dropped),
        s.right.col(weakest_kept),
        root,
    );
    add_scaled_outer(
        &mut lower,
        s.left.col(strongest_dropped),
        s.right.col(strongest_dropped),
        epsilon * epsilon,
    );

    let base_error_sq = a.sub(&base)?.norm_fro_sq();
    let upper_error_sq = a.sub(&upper)?.norm_fro_sq();
    let lower_error_sq = a.sub(&lower)?.norm_fro_sq();
    Ok(SaddleWitness {
        epsilon,
        base_error_sq,
        upper_error_sq,
        lower_error_sq,
        increase_found: upper_error_sq > base_error_sq,
        decrease_found: lower_error_sq < base_error_sq,
    })
}

fn add_scaled_outer(out: &mut DenseMatrix, u: &[f64], v: &[f64], s: f64) {
    for j in 0..out.cols() {
        let w = s * v[j];
        if w == 0.0 {
            continue;
        }
        for (o, &ui) in out.col_mut(j).iter_mut().zip(u) {
            *o += ui * w;
        }
    }
}
