//! Normed constraint sets and the generalized rank-one iteration over
//! factorizations `X D Y^T` with unit-scale columns.
//!
//! Each set solves the elementary problem `max_{s in S} y^T s` exactly
//! (closed form or combinatorial rule), except the fixed-sparsity set which
//! uses the alternating hyperplane/sphere projection. The generalized sweep
//! only ever replaces a column when the inner product does not degrade, so
//! its objective trace is nonincreasing for every set kind, including the
//! heuristic one.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, norm2_sq, DenseMatrix, DenseVector};
use crate::rng::Lcg64;

/// Hoyer sparsity `(sqrt(n) - ||s||_1 / ||s||_2) / (sqrt(n) - 1)`:
/// 0 for a uniform vector, 1 for a single spike.
pub fn hoyer_sparsity(s: &[f64]) -> f64 {
    let n = s.len() as f64;
    let l2 = norm2(s);
    if l2 == 0.0 {
        return 0.0;
    }
    let l1: f64 = s.iter().map(|x| x.abs()).sum();
    (n.sqrt() - l1 / l2) / (n.sqrt() - 1.0)
}

/// One of the normed column sets.
#[derive(Debug, Clone)]
pub enum ConstraintSet {
    /// Unit sphere, sign free.
    Normed,
    /// Nonnegative unit vectors.
    NormedNonneg,
    /// Nonnegative unit-sphere projection clipped into `[lower, upper]`;
    /// the set formula does not renormalize, the diagonal scale absorbs it.
    BoundedNonneg {
        lower: DenseVector,
        upper: DenseVector,
    },
    /// Normalized 0/1 vectors.
    Binary,
    /// Nonnegative unit vectors with at most `k` nonzeros.
    SparseK { k: usize },
    /// Nonnegative unit vectors with fixed Hoyer sparsity in (0, 1).
    HoyerSparse { target: f64 },
}

impl ConstraintSet {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            ConstraintSet::Normed | ConstraintSet::NormedNonneg | ConstraintSet::Binary => Ok(()),
            ConstraintSet::BoundedNonneg { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return Err(Error::InvalidArg {
                        msg: "bound vectors must match the column length".into(),
                    });
                }
                let order_ok = lower
                    .iter()
                    .zip(upper.iter())
                    .all(|(&l, &p)| 0.0 <= l && l <= p);
                if !order_ok || lower.norm2() > 1.0 || upper.norm2() < 1.0 {
                    return Err(Error::InvalidArg {
                        msg: "bounds must satisfy 0 <= l <= p, ||l|| <= 1 <= ||p||".into(),
                    });
                }
                Ok(())
            }
            ConstraintSet::SparseK { k } => {
                if *k < 1 || *k > n {
                    return Err(Error::InvalidArg {
                        msg: format!("sparse-k support {k} out of 1..={n}"),
                    });
                }
                Ok(())
            }
            ConstraintSet::HoyerSparse { target } => {
                if !(0.0 < *target && *target < 1.0) || n < 2 {
                    return Err(Error::InvalidArg {
                        msg: "hoyer target must lie in (0,1) on length >= 2".into(),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintSet::Normed => "normed",
            ConstraintSet::NormedNonneg => "normed-nonneg",
            ConstraintSet::BoundedNonneg { .. } => "bounded-nonneg",
            ConstraintSet::Binary => "binary",
            ConstraintSet::SparseK { .. } => "sparse-k",
            ConstraintSet::HoyerSparse { .. } => "hoyer",
        }
    }
}

/// Maximizer of `y^T s` over the set. `is_zero` flags the degenerate case
/// where the cone admits no normed solution (nonpositive `y` for the
/// nonnegative sets); the vector is then all zeros.
#[derive(Debug, Clone)]
pub struct MaxInnerSolution {
    pub s: DenseVector,
    pub is_zero: bool,
}

fn unit_solution(v: Vec<f64>) -> MaxInnerSolution {
    let nrm = norm2(&v);
    if nrm == 0.0 {
        return MaxInnerSolution {
            s: DenseVector(v),
            is_zero: true,
        };
    }
    MaxInnerSolution {
        s: DenseVector(v.into_iter().map(|x| x / nrm).collect()),
        is_zero: false,
    }
}

/// Solve `max_{s in set} y^T s`.
pub fn max_inner(set: &ConstraintSet, y: &DenseVector) -> Result<MaxInnerSolution> {
    set.validate(y.len())?;
    if !y.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite { what: "max_inner input" });
    }
    Ok(match set {
        ConstraintSet::Normed => unit_solution(y.0.clone()),
        ConstraintSet::NormedNonneg => unit_solution(y.project_nonneg().0),
        ConstraintSet::BoundedNonneg { lower, upper } => {
            let base = unit_solution(y.project_nonneg().0).s;
            let s: Vec<f64> = (0..y.len())
                .map(|i| lower[i].max(upper[i].min(base[i])))
                .collect();
            let is_zero = s.iter().all(|&x| x == 0.0);
            MaxInnerSolution {
                s: DenseVector(s),
                is_zero,
            }
        }
        ConstraintSet::Binary => {
            let n = y.len();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
            let mut best_k = 1usize;
            let mut best_val = f64::NEG_INFINITY;
            let mut prefix = 0.0;
            for k in 1..=n {
                prefix += y[order[k - 1]];
                let val = prefix / (k as f64).sqrt();
                if val > best_val {
                    best_val = val;
                    best_k = k;
                }
            }
            let mut s = vec![0.0; n];
            let w = 1.0 / (best_k as f64).sqrt();
            for &i in order.iter().take(best_k) {
                s[i] = w;
            }
            MaxInnerSolution {
                s: DenseVector(s),
                is_zero: false,
            }
        }
        ConstraintSet::SparseK { k } => {
            let n = y.len();
            let mut pos: Vec<usize> = (0..n).filter(|&i| y[i] > 0.0).collect();
            pos.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
            let take = pos.len().min(*k);
            let mut s = vec![0.0; n];
            for &i in pos.iter().take(take) {
                s[i] = y[i];
            }
            unit_solution(s)
        }
        ConstraintSet::HoyerSparse { target } => {
            let n = y.len() as f64;
            let l1 = n.sqrt() - target * (n.sqrt() - 1.0);
            MaxInnerSolution {
                s: hoyer_project(y, l1, 1.0),
                is_zero: false,
            }
        }
    })
}

/// Iteration cap for the alternating hyperplane/sphere projection.
const HOYER_MAX_ITERS: usize = 100;
/// Convergence tolerance on the sparsity residual.
const HOYER_TOL: f64 = 1e-10;

/// Closest nonnegative vector with prescribed one- and two-norms: project on
/// the `sum = l1` hyperplane, then onto the `l2` sphere within it, zeroing
/// negative coordinates and redistributing until feasible.
fn hoyer_project(x: &DenseVector, l1: f64, l2: f64) -> DenseVector {
    let n = x.len();
    let shift = (l1 - x.iter().sum::<f64>()) / n as f64;
    let mut s: Vec<f64> = x.iter().map(|&v| v + shift).collect();
    let mut zeroed = vec![false; n];

    for _ in 0..HOYER_MAX_ITERS {
        let active = zeroed.iter().filter(|z| !**z).count();
        if active == 0 {
            break;
        }
        let mid = l1 / active as f64;
        // Move from the hyperplane midpoint along (s - mid) to the sphere.
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = -l2 * l2;
        for i in 0..n {
            if zeroed[i] {
                continue;
            }
            let w = s[i] - mid;
            a += w * w;
            b += 2.0 * mid * w;
            c += mid * mid;
        }
        let alpha = if a <= f64::MIN_POSITIVE {
            0.0
        } else {
            let disc = (b * b - 4.0 * a * c).max(0.0);
            (-b + disc.sqrt()) / (2.0 * a)
        };
        for i in 0..n {
            if !zeroed[i] {
                s[i] = mid + alpha * (s[i] - mid);
            }
        }

        if s.iter().all(|&v| v >= 0.0) {
            let target = (n as f64).sqrt() - l1 / l2;
            let reached = (n as f64).sqrt() - s.iter().sum::<f64>() / norm2(&s);
            if (reached - target).abs() <= HOYER_TOL * (1.0 + target.abs()) {
                break;
            }
        }

        // Clip negatives and redistribute the mass surplus over the rest.
        for i in 0..n {
            if s[i] < 0.0 {
                s[i] = 0.0;
                zeroed[i] = true;
            }
        }
        let active = zeroed.iter().filter(|z| !**z).count();
        if active == 0 {
            break;
        }
        let surplus = (s.iter().sum::<f64>() - l1) / active as f64;
        for i in 0..n {
            if !zeroed[i] {
                s[i] -= surplus;
            }
        }
    }
    DenseVector(s.into_iter().map(|v| v.max(0.0)).collect())
}

/// Factorization `sum_i d_i x_i y_i^T` with columns constrained to their sets
/// and nonnegative scales on the diagonal.
#[derive(Debug, Clone)]
pub struct DiagonalFactorization {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub d: DenseVector,
}

impl DiagonalFactorization {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// Materialize `sum_i d_i x_i y_i^T`.
    pub fn product(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.x.rows(), self.y.rows());
        for i in 0..self.rank() {
            let di = self.d[i];
            if di == 0.0 {
                continue;
            }
            let xi = self.x.col(i);
            for j in 0..self.y.rows() {
                let w = di * self.y[(j, i)];
                if w == 0.0 {
                    continue;
                }
                for (o, &xv) in out.col_mut(j).iter_mut().zip(xi) {
                    *o += xv * w;
                }
            }
        }
        out
    }

    /// Seed columns by projecting random vectors into their sets; scales
    /// start at zero and are fitted by the first sweep.
    pub fn init_random(
        m: usize,
        n: usize,
        r: usize,
        set_x: &ConstraintSet,
        set_y: &ConstraintSet,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = Lcg64::new(seed);
        let mut x = DenseMatrix::zeros(m, r);
        let mut y = DenseMatrix::zeros(n, r);
        for i in 0..r {
            let raw = DenseVector::from_iter((0..m).map(|_| rng.next_f64()));
            x.set_col(i, &max_inner(set_x, &raw)?.s);
            let raw = DenseVector::from_iter((0..n).map(|_| rng.next_f64()));
            y.set_col(i, &max_inner(set_y, &raw)?.s);
        }
        Ok(DiagonalFactorization {
            x,
            y,
            d: DenseVector::zeros(r),
        })
    }
}

/// `R_i^T x_i` via Gram corrections (the residue is never materialized).
fn residue_t_x(a: &DenseMatrix, f: &DiagonalFactorization, i: usize) -> Vec<f64> {
    let xi = f.x.col(i);
    let mut w = a.matvec_t(xi).0;
    for j in 0..f.rank() {
        if j == i || f.d[j] == 0.0 {
            continue;
        }
        let c = f.d[j] * dot(f.x.col(j), xi);
        if c == 0.0 {
            continue;
        }
        for (wk, &yk) in w.iter_mut().zip(f.y.col(j)) {
            *wk -= c * yk;
        }
    }
    w
}

/// `R_i y_i` via Gram corrections.
fn residue_y(a: &DenseMatrix, f: &DiagonalFactorization, i: usize) -> Vec<f64> {
    let yi = f.y.col(i);
    let mut w = a.matvec(yi).0;
    for j in 0..f.rank() {
        if j == i || f.d[j] == 0.0 {
            continue;
        }
        let c = f.d[j] * dot(f.y.col(j), yi);
        if c == 0.0 {
            continue;
        }
        for (wk, &xk) in w.iter_mut().zip(f.x.col(j)) {
            *wk -= c * xk;
        }
    }
    w
}

/// Contribution of term `i` to the objective, up to the constant `||R_i||^2`:
/// `d^2/2 ||x||^2 ||y||^2 - d <R_i, x y^T>`, with the cross term expressed
/// through the already-available residue contraction.
fn term_value(d: f64, this_norm_sq: f64, other_norm_sq: f64, inner: f64) -> f64 {
    0.5 * d * d * this_norm_sq * other_norm_sq - d * inner
}

/// One generalized sweep: for each term, `y_i` maximizes `x_i^T R_i s` over
/// its set, then `x_i` maximizes `y_i^T R_i^T s`, and the scale refits to
/// `d_i = [x_i^T R_i y_i]_+ / (||x_i||^2 ||y_i||^2)` (the norms are 1 for
/// every unit set; the bounded set returns non-unit vectors whose scale the
/// diagonal absorbs). A proposed column is kept only if it does not increase
/// the term's exact objective contribution, so the sweep is nonincreasing
/// even with the heuristic fixed-sparsity oracle or non-unit columns.
pub fn grri_sweep(
    a: &DenseMatrix,
    f: &DiagonalFactorization,
    set_x: &ConstraintSet,
    set_y: &ConstraintSet,
) -> Result<DiagonalFactorization> {
    let mut out = f.clone();
    for i in 0..out.rank() {
        let d = out.d[i];

        let wy = residue_t_x(a, &out, i);
        let cand = max_inner(set_y, &DenseVector(wy.clone()))?.s;
        let nx2 = norm2_sq(out.x.col(i));
        let val_new = term_value(d, norm2_sq(&cand), nx2, dot(&wy, &cand));
        let val_old = term_value(d, norm2_sq(out.y.col(i)), nx2, dot(&wy, out.y.col(i)));
        if val_new <= val_old {
            out.y.set_col(i, &cand);
        }

        let wx = residue_y(a, &out, i);
        let cand = max_inner(set_x, &DenseVector(wx.clone()))?.s;
        let ny2 = norm2_sq(out.y.col(i));
        let val_new = term_value(d, norm2_sq(&cand), ny2, dot(&wx, &cand));
        let val_old = term_value(d, norm2_sq(out.x.col(i)), ny2, dot(&wx, out.x.col(i)));
        if val_new <= val_old {
            out.x.set_col(i, &cand);
        }

        let q = norm2_sq(out.x.col(i)) * ny2;
        out.d[i] = if q == 0.0 {
            0.0
        } else {
            dot(out.x.col(i), &wx).max(0.0) / q
        };
    }
    Ok(out)
}

/// Run the generalized iteration for at most `max_sweeps`, stopping early
/// when the objective stops moving. Returns the final factorization and the
/// objective trace (entry 0 = initial point).
pub fn run_grri(
    a: &DenseMatrix,
    r: usize,
    set_x: &ConstraintSet,
    set_y: &ConstraintSet,
    max_sweeps: usize,
    seed: u64,
) -> Result<(DiagonalFactorization, Vec<f64>)> {
    set_x.validate(a.rows())?;
    set_y.validate(a.cols())?;
    let mut f = DiagonalFactorization::init_random(a.rows(), a.cols(), r, set_x, set_y, seed)?;
    let objective = |f: &DiagonalFactorization| 0.5 * a.sub(&f.product()).unwrap().norm_fro_sq();
    let mut trace = vec![objective(&f)];
    for _ in 0..max_sweeps {
        f = grri_sweep(a, &f, set_x, set_y)?;
        let obj = objective(&f);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if prev - obj < 1e-15 * prev.abs().max(f64::MIN_POSITIVE) && trace.len() > 2 {
            break;
        }
    }
    Ok((f, trace))
}
