//! The factorization objective `F(U, V) = 1/2 ||A - U V^T||_F^2` and the
//! machinery every solver shares: gradients, KKT residuals, the projected
//! gradient stopping rule, diagonal column rescaling, and scaled random
//! initialization.

use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix};
use crate::rng::Lcg64;

/// A factor iterate `(U, V)` with `U` of size m x r and `V` of size n x r.
///
/// Solvers keep both factors elementwise nonnegative; the struct itself does
/// not police entries so that unconstrained stationary points (from the SVD
/// baseline) can be inspected with the same machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

impl FactorPair {
    pub fn new(u: DenseMatrix, v: DenseMatrix) -> Result<Self> {
        if u.cols() != v.cols() {
            return Err(Error::ShapeMismatch {
                op: "FactorPair::new",
                lhs: u.shape(),
                rhs: v.shape(),
            });
        }
        Ok(FactorPair { u, v })
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// Materialize the approximation `U V^T`.
    pub fn product(&self) -> DenseMatrix {
        self.u.matmul_t_right(&self.v).expect("rank checked")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.u.is_nonnegative() && self.v.is_nonnegative()
    }
}

/// Gradients of the objective together with the KKT residual summaries.
///
/// At a stationary point both gradients are nonnegative wherever the factor
/// entry is zero, and the complementarity products `U o grad_U`, `V o grad_V`
/// vanish.
#[derive(Debug, Clone)]
pub struct KktResidual {
    pub grad_u: DenseMatrix,
    pub grad_v: DenseMatrix,
    /// Smallest gradient entry over both factors.
    pub min_grad_entry: f64,
    /// Largest `|X_ij * grad_ij|` over both factors.
    pub max_complementarity: f64,
}

fn check_shapes(a: &DenseMatrix, fp: &FactorPair, op: &'static str) -> Result<()> {
    if a.rows() != fp.u.rows() || a.cols() != fp.v.rows() {
        return Err(Error::ShapeMismatch {
            op,
            lhs: a.shape(),
            rhs: (fp.u.rows(), fp.v.rows()),
        });
    }
    Ok(())
}

/// Objective value `1/2 ||A - U V^T||_F^2`, evaluated through the quadratic
/// expansion `1/2 (||A||^2 - 2 <U, AV> + <U, U (V^T V)>)` so that coordinate
/// solvers can reuse the cached pieces.
pub fn objective(a: &DenseMatrix, fp: &FactorPair) -> Result<f64> {
    check_shapes(a, fp, "objective")?;
    let av = a.matmul(&fp.v)?;
    let vtv = fp.v.gram();
    let u_vtv = fp.u.matmul(&vtv)?;
    Ok(0.5
        * (a.norm_fro_sq() - 2.0 * fp.u.frobenius_inner(&av)?
            + fp.u.frobenius_inner(&u_vtv)?))
}

/// Gradients `grad_U = U (V^T V) - A V` and `grad_V = V (U^T U) - A^T U`.
pub fn gradients(a: &DenseMatrix, fp: &FactorPair) -> Result<KktResidual> {
    check_shapes(a, fp, "gradients")?;
    let av = a.matmul(&fp.v)?;
    let vtv = fp.v.gram();
    let grad_u = fp.u.matmul(&vtv)?.sub(&av)?;
    let atu = a.matmul_t_left(&fp.u)?;
    let utu = fp.u.gram();
    let grad_v = fp.v.matmul(&utu)?.sub(&atu)?;

    let mut min_grad = f64::INFINITY;
    let mut max_comp: f64 = 0.0;
    for (x, g) in [(&fp.u, &grad_u), (&fp.v, &grad_v)] {
        for (&xi, &gi) in x.data().iter().zip(g.data()) {
            min_grad = min_grad.min(gi);
            max_comp = max_comp.max((xi * gi).abs());
        }
    }
    Ok(KktResidual {
        grad_u,
        grad_v,
        min_grad_entry: min_grad,
        max_complementarity: max_comp,
    })
}

/// Frobenius norm of the stacked projected gradients: full gradient entries
/// where the factor is positive, `min(0, grad)` where it sits on the boundary.
pub fn projected_gradient_norm(fp: &FactorPair, kkt: &KktResidual) -> f64 {
    let mut sq = 0.0;
    for (x, g) in [(&fp.u, &kkt.grad_u), (&fp.v, &kkt.grad_v)] {
        for (&xi, &gi) in x.data().iter().zip(g.data()) {
            let p = if xi > 0.0 { gi } else { gi.min(0.0) };
            sq += p * p;
        }
    }
    sq.sqrt()
}

/// Balance the factor columns: `U <- U D`, `V <- V D^{-1}` with
/// `D_ii = sqrt(||V_:i|| / ||U_:i||)`, which leaves the product unchanged and
/// makes paired column norms equal. Columns with a zero side pass through.
pub fn rescale_columns(fp: &FactorPair) -> FactorPair {
    let mut u = fp.u.clone();
    let mut v = fp.v.clone();
    for i in 0..fp.rank() {
        let nu = norm2(u.col(i));
        let nv = norm2(v.col(i));
        if nu == 0.0 || nv == 0.0 {
            continue;
        }
        let d = (nv / nu).sqrt();
        u.col_mut(i).iter_mut().for_each(|x| *x *= d);
        v.col_mut(i).iter_mut().for_each(|x| *x /= d);
    }
    FactorPair { u, v }
}

/// The optimal uniform scaling `alpha = <A, UV^T> / <UV^T, UV^T>`, which
/// tends to 1 as the iterate approaches a KKT stationary point.
pub fn alpha_scale(a: &DenseMatrix, fp: &FactorPair) -> Result<f64> {
    check_shapes(a, fp, "alpha_scale")?;
    let av = a.matmul(&fp.v)?;
    let num = fp.u.frobenius_inner(&av)?;
    let den = fp.u.gram().frobenius_inner(&fp.v.gram())?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// Balance columns and apply `sqrt(alpha)` to both factors so that the scaled
/// product is the best uniform multiple of the raw one.
pub fn scale_to_target(a: &DenseMatrix, fp: &FactorPair) -> Result<FactorPair> {
    let balanced = rescale_columns(fp);
    let alpha = alpha_scale(a, &balanced)?;
    let s = alpha.max(0.0).sqrt();
    Ok(FactorPair {
        u: balanced.u.scale(s),
        v: balanced.v.scale(s),
    })
}

/// Draw `U`, `V` uniform on `(0, 1)` from the seeded generator (column-major
/// fill, `U` first), then balance and scale toward `A`. Deterministic per seed.
pub fn init_scaled(a: &DenseMatrix, r: usize, seed: u64) -> Result<FactorPair> {
    if r < 1 {
        return Err(Error::RankOutOfRange { rank: r, max: 0 });
    }
    let mut rng = Lcg64::new(seed);
    let mut u = DenseMatrix::zeros(a.rows(), r);
    u.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    let mut v = DenseMatrix::zeros(a.cols(), r);
    v.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    scale_to_target(a, &FactorPair { u, v })
}

/// Why a solver run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative projected-gradient criterion reached.
    Criterion,
    /// Wall-clock budget exhausted.
    TimeBudget,
    /// Sweep budget exhausted.
    SweepBudget,
    /// No meaningful progress (locked boundary point or dead line search).
    Stalled,
}

/// Relative projected-gradient stopping rule with time and sweep budgets.
#[derive(Debug, Clone)]
pub struct StopRule {
    pub epsilon_rel: f64,
    /// Projected gradient norm at the (scaled) starting point.
    pub initial_pgrad_norm: f64,
    pub max_seconds: f64,
    pub max_sweeps: usize,
}

impl StopRule {
    /// Default budgets: 45 seconds, one million sweeps.
    pub fn new(epsilon_rel: f64) -> Self {
        StopRule {
            epsilon_rel,
            initial_pgrad_norm: 0.0,
            max_seconds: 45.0,
            max_sweeps: 1_000_000,
        }
    }

    pub fn with_budgets(mut self, max_seconds: f64, max_sweeps: usize) -> Self {
        self.max_seconds = max_seconds;
        self.max_sweeps = max_sweeps;
        self
    }
}

/// Evaluate the stopping rule. The criterion test wins over budget tests when
/// both hold at once.
pub fn should_stop(
    rule: &StopRule,
    current_pgrad: f64,
    elapsed_seconds: f64,
    sweeps: usize,
) -> Option<StopReason> {
    if current_pgrad <= rule.epsilon_rel * rule.initial_pgrad_norm {
        return Some(StopReason::Criterion);
    }
    if elapsed_seconds > rule.max_seconds {
        return Some(StopReason::TimeBudget);
    }
    if sweeps >= rule.max_sweeps {
        return Some(StopReason::SweepBudget);
    }
    None
}

/// Test-support: a deterministic nonnegative random pair (no target scaling).
pub fn random_pair(m: usize, n: usize, r: usize, seed: u64) -> FactorPair {
    let mut rng = Lcg64::new(seed);
    let mut u = DenseMatrix::zeros(m, r);
    u.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    let mut v = DenseMatrix::zeros(n, r);
    v.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    FactorPair { u, v }
}
