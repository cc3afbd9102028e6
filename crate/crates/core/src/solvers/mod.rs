//! The benchmark solvers behind one interface.
//!
//! All methods minimize `1/2 ||A - U V^T||_F^2` over nonnegative factors and
//! share the run loop: rescale columns after every recorded round, log the
//! objective and projected-gradient norm, stop on the relative
//! projected-gradient criterion or on a budget. Sweep counts measure how
//! often every variable has been updated: one multiplicative update pair,
//! one stacked projected-gradient step (full-space methods), one pass over
//! the rank-one columns (RRI family), or one pair of exact block solves
//! (ALS) each count as one sweep. The coordinate methods run inner loops to
//! their adaptive tolerances, so one recorded round can contain several full
//! variable updates (or, after a no-iteration round, none); their sweep
//! numbers advance by the completed update pairs.

pub mod als;
pub mod mult;
pub mod rri;
pub mod search;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::model::{
    gradients, init_scaled, objective, projected_gradient_norm, rescale_columns, should_stop,
    FactorPair, StopRule,
};
pub use crate::model::StopReason;
use search::{armijo_search, fo_step};
use std::time::Instant;

/// Iteration cap for one coordinate inner loop (CLine/CFO half-sweep).
const INNER_ITER_CAP: usize = 1000;
/// Consecutive flat sweeps (relative decrease below 1e-15) before stalling.
const STALL_SWEEPS: usize = 10;
const STALL_REL_DECREASE: f64 = 1e-15;

/// The algorithms compared by the benchmark harness.
#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Multiplicative update rules.
    Mult,
    /// Full-space projected gradient with Armijo line search.
    FLine,
    /// Coordinate (alternating U/V) Armijo line search.
    CLine,
    /// Full-space projected gradient with first-order curvature control.
    FFO,
    /// Coordinate first-order curvature control.
    CFO,
    /// Alternating active-set NNLS.
    ALS,
    /// Rank-one residue iteration.
    RRI,
    /// RRI with proximal damping.
    DampedRRI,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Mult,
        Algorithm::FLine,
        Algorithm::CLine,
        Algorithm::FFO,
        Algorithm::CFO,
        Algorithm::ALS,
        Algorithm::RRI,
        Algorithm::DampedRRI,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Mult => "mult",
            Algorithm::FLine => "fline",
            Algorithm::CLine => "cline",
            Algorithm::FFO => "ffo",
            Algorithm::CFO => "cfo",
            Algorithm::ALS => "als",
            Algorithm::RRI => "rri",
            Algorithm::DampedRRI => "drri",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArg {
                msg: format!("unknown algorithm '{s}'"),
            })
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Solver choice plus every tunable the methods expose.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub rank: usize,
    /// Armijo acceptance slope (line-search methods).
    pub armijo_sigma: f64,
    /// Armijo shrink factor.
    pub armijo_beta: f64,
    /// Curvature tighten/relax factor for the first-order methods.
    pub fo_beta: f64,
    /// Proximal damping for DampedRRI.
    pub damping_psi: f64,
    /// Initial relative inner tolerances for the coordinate methods; each is
    /// tightened tenfold whenever its inner loop needs no iteration.
    pub inner_eps_u: f64,
    pub inner_eps_v: f64,
    /// How many dead column pairs may be revived per run (RRI family).
    pub substitution_budget: usize,
    /// Update all `v_t` then all `u_t` instead of pairwise per column.
    pub rri_blockwise: bool,
    pub stop: StopRule,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, rank: usize, epsilon_rel: f64) -> Self {
        SolverConfig {
            algorithm,
            rank,
            armijo_sigma: 0.01,
            armijo_beta: 0.1,
            fo_beta: 2.0,
            damping_psi: 0.1,
            inner_eps_u: 1e-3,
            inner_eps_v: 1e-3,
            substitution_budget: rank,
            rri_blockwise: false,
            stop: StopRule::new(epsilon_rel),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_psi(mut self, psi: f64) -> Self {
        self.damping_psi = psi;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rank < 1 {
            return Err(Error::RankOutOfRange {
                rank: self.rank,
                max: 0,
            });
        }
        let ok = self.armijo_sigma > 0.0
            && self.armijo_sigma < 1.0
            && self.armijo_beta > 0.0
            && self.armijo_beta < 1.0
            && self.fo_beta > 1.0
            && self.damping_psi >= 0.0
            && self.inner_eps_u > 0.0
            && self.inner_eps_v > 0.0
            && self.stop.epsilon_rel > 0.0
            && self.stop.max_seconds > 0.0
            && self.stop.max_sweeps > 0;
        if !ok {
            return Err(Error::InvalidArg {
                msg: "solver parameters out of range".to_string(),
            });
        }
        Ok(())
    }
}

/// One recorded sweep.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub sweep: usize,
    pub elapsed_s: f64,
    pub objective: f64,
    pub pgrad_norm: f64,
}

/// Outcome of a solver run: final iterate, per-sweep trace (entry 0 is the
/// scaled starting point), why it stopped, and how many zero-column
/// substitutions were spent.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub final_factors: FactorPair,
    pub trace: Vec<TracePoint>,
    pub stop_reason: StopReason,
    pub substitutions_used: usize,
}

impl SolverReport {
    pub fn sweeps(&self) -> usize {
        self.trace.last().map_or(0, |t| t.sweep)
    }

    pub fn elapsed_s(&self) -> f64 {
        self.trace.last().map_or(0.0, |t| t.elapsed_s)
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |t| t.objective)
    }

    pub fn initial_pgrad_norm(&self) -> f64 {
        self.trace.first().map_or(f64::NAN, |t| t.pgrad_norm)
    }

    pub fn final_pgrad_ratio(&self) -> f64 {
        let p0 = self.initial_pgrad_norm();
        if p0 == 0.0 {
            return 0.0;
        }
        self.trace.last().map_or(f64::NAN, |t| t.pgrad_norm) / p0
    }

    pub fn succeeded(&self) -> bool {
        self.stop_reason == StopReason::Criterion
    }
}

/// Run from the scaled random start drawn with `cfg.seed`.
pub fn run(a: &DenseMatrix, cfg: &SolverConfig) -> Result<SolverReport> {
    let start = init_scaled(a, cfg.rank, cfg.seed)?;
    run_from(a, cfg, &start)
}

/// Run from an explicit starting pair (shared across algorithms by the
/// benchmark harness). The start is rescaled like every later iterate, which
/// leaves its product and objective unchanged.
pub fn run_from(a: &DenseMatrix, cfg: &SolverConfig, start: &FactorPair) -> Result<SolverReport> {
    cfg.validate()?;
    if !a.data().iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite { what: "input matrix" });
    }
    if !a.is_nonnegative() {
        return Err(Error::NegativeInput {
            what: "input matrix",
        });
    }
    if start.u.rows() != a.rows() || start.v.rows() != a.cols() || start.rank() != cfg.rank {
        return Err(Error::ShapeMismatch {
            op: "run_from",
            lhs: a.shape(),
            rhs: (start.u.rows(), start.v.rows()),
        });
    }
    if !start.is_nonnegative() {
        return Err(Error::NegativeInput {
            what: "starting factors",
        });
    }

    let t0 = Instant::now();
    let mut fp = rescale_columns(start);
    let kkt = gradients(a, &fp)?;
    let pg0 = projected_gradient_norm(&fp, &kkt);
    let mut rule = cfg.stop.clone();
    rule.initial_pgrad_norm = pg0;

    let mut obj = objective(a, &fp)?;
    let mut pg = pg0;
    let mut trace = vec![TracePoint {
        sweep: 0,
        elapsed_s: t0.elapsed().as_secs_f64(),
        objective: obj,
        pgrad_norm: pg0,
    }];

    let mut engine = Engine::new(cfg);
    let mut sweeps = 0usize;
    let mut flat_sweeps = 0usize;

    let stop_reason = loop {
        if let Some(reason) = should_stop(&rule, pg, t0.elapsed().as_secs_f64(), sweeps) {
            break reason;
        }
        let (next, sweep_stalled, units) = engine.sweep(a, fp, cfg, pg0)?;
        fp = rescale_columns(&next);
        sweeps += units;

        let kkt = gradients(a, &fp)?;
        pg = projected_gradient_norm(&fp, &kkt);
        let new_obj = objective(a, &fp)?;
        trace.push(TracePoint {
            sweep: sweeps,
            elapsed_s: t0.elapsed().as_secs_f64(),
            objective: new_obj,
            pgrad_norm: pg,
        });

        let criterion_met = pg <= rule.epsilon_rel * rule.initial_pgrad_norm;
        if sweep_stalled {
            break if criterion_met {
                StopReason::Criterion
            } else {
                StopReason::Stalled
            };
        }
        if obj - new_obj < STALL_REL_DECREASE * obj.abs().max(f64::MIN_POSITIVE) {
            flat_sweeps += 1;
            if flat_sweeps >= STALL_SWEEPS && !criterion_met {
                break StopReason::Stalled;
            }
        } else {
            flat_sweeps = 0;
        }
        obj = new_obj;
    };

    Ok(SolverReport {
        final_factors: fp,
        trace,
        stop_reason,
        substitutions_used: engine.substitutions_used(),
    })
}

/// Per-algorithm mutable state threaded through the sweeps.
enum Engine {
    Mult,
    Als,
    Rri {
        psi: f64,
        blockwise: bool,
        budget: usize,
        used: usize,
    },
    FullLine {
        alpha: f64,
    },
    FullFo {
        l: f64,
    },
    CoordLine {
        alpha_u: f64,
        alpha_v: f64,
        eps_u: f64,
        eps_v: f64,
        pairs: PairCounter,
    },
    CoordFo {
        l_u: f64,
        l_v: f64,
        eps_u: f64,
        eps_v: f64,
        pairs: PairCounter,
    },
}

/// Converts per-block inner-step counts into completed full-variable
/// updates: a sweep is only counted once both factors have received one
/// more update, matching the "all elements updated" iteration definition.
#[derive(Debug, Default, Clone, Copy)]
struct PairCounter {
    cum_u: usize,
    cum_v: usize,
    labeled: usize,
}

impl PairCounter {
    fn add(&mut self, inner_u: usize, inner_v: usize) -> usize {
        self.cum_u += inner_u;
        self.cum_v += inner_v;
        let pairs = self.cum_u.min(self.cum_v);
        let fresh = pairs - self.labeled;
        self.labeled = pairs;
        fresh
    }
}

impl Engine {
    fn new(cfg: &SolverConfig) -> Engine {
        match cfg.algorithm {
            Algorithm::Mult => Engine::Mult,
            Algorithm::ALS => Engine::Als,
            Algorithm::RRI => Engine::Rri {
                psi: 0.0,
                blockwise: cfg.rri_blockwise,
                budget: cfg.substitution_budget,
                used: 0,
            },
            Algorithm::DampedRRI => Engine::Rri {
                psi: cfg.damping_psi,
                blockwise: cfg.rri_blockwise,
                budget: cfg.substitution_budget,
                used: 0,
            },
            Algorithm::FLine => Engine::FullLine { alpha: 1.0 },
            Algorithm::FFO => Engine::FullFo { l: 1.0 },
            Algorithm::CLine => Engine::CoordLine {
                alpha_u: 1.0,
                alpha_v: 1.0,
                eps_u: cfg.inner_eps_u,
                eps_v: cfg.inner_eps_v,
                pairs: PairCounter::default(),
            },
            Algorithm::CFO => Engine::CoordFo {
                l_u: 1.0,
                l_v: 1.0,
                eps_u: cfg.inner_eps_u,
                eps_v: cfg.inner_eps_v,
                pairs: PairCounter::default(),
            },
        }
    }

    fn substitutions_used(&self) -> usize {
        match self {
            Engine::Rri { used, .. } => *used,
            _ => 0,
        }
    }

    fn sweep(
        &mut self,
        a: &DenseMatrix,
        fp: FactorPair,
        cfg: &SolverConfig,
        pg0: f64,
    ) -> Result<(FactorPair, bool, usize)> {
        match self {
            Engine::Mult => Ok((mult::mult_sweep(a, &fp)?, false, 1)),
            Engine::Als => {
                let (next, stalled) = als::als_sweep(a, &fp);
                Ok((next, stalled, 1))
            }
            Engine::Rri {
                psi,
                blockwise,
                budget,
                used,
            } => {
                let mut fp = fp;
                let applied =
                    rri::sweep_with_substitution(a, &mut fp, *psi, *blockwise, *budget - *used);
                *used += applied;
                Ok((fp, false, 1))
            }
            Engine::FullLine { alpha } => {
                let (m, n, r) = (a.rows(), a.cols(), fp.rank());
                let x = stack(&fp);
                let kkt = gradients(a, &fp)?;
                let g = stack_grads(&kkt.grad_u, &kkt.grad_v);
                let fx = objective(a, &fp)?;
                let mut df = |y: &[f64]| full_objective(a, m, n, r, y) - fx;
                let step =
                    armijo_search(&mut df, &x, &g, *alpha, cfg.armijo_sigma, cfg.armijo_beta);
                *alpha = step.carry;
                Ok((unstack(&step.x, m, n, r), step.stalled, 1))
            }
            Engine::FullFo { l } => {
                let (m, n, r) = (a.rows(), a.cols(), fp.rank());
                let x = stack(&fp);
                let kkt = gradients(a, &fp)?;
                let g = stack_grads(&kkt.grad_u, &kkt.grad_v);
                let fx = objective(a, &fp)?;
                let mut df = |y: &[f64]| full_objective(a, m, n, r, y) - fx;
                let step = fo_step(&mut df, &x, &g, *l, cfg.fo_beta);
                *l = step.carry;
                Ok((unstack(&step.x, m, n, r), step.stalled, 1))
            }
            Engine::CoordLine {
                alpha_u,
                alpha_v,
                eps_u,
                eps_v,
                pairs,
            } => {
                let (next, stalled, iu, iv) = coordinate_sweep(
                    a,
                    fp,
                    pg0,
                    BlockStep::Armijo {
                        sigma: cfg.armijo_sigma,
                        beta: cfg.armijo_beta,
                    },
                    alpha_u,
                    alpha_v,
                    eps_u,
                    eps_v,
                )?;
                Ok((next, stalled, pairs.add(iu, iv)))
            }
            Engine::CoordFo {
                l_u,
                l_v,
                eps_u,
                eps_v,
                pairs,
            } => {
                let (next, stalled, iu, iv) = coordinate_sweep(
                    a,
                    fp,
                    pg0,
                    BlockStep::Fo { fo_beta: cfg.fo_beta },
                    l_u,
                    l_v,
                    eps_u,
                    eps_v,
                )?;
                Ok((next, stalled, pairs.add(iu, iv)))
            }
        }
    }
}

fn stack(fp: &FactorPair) -> Vec<f64> {
    let mut x = Vec::with_capacity(fp.u.data().len() + fp.v.data().len());
    x.extend_from_slice(fp.u.data());
    x.extend_from_slice(fp.v.data());
    x
}

fn stack_grads(gu: &DenseMatrix, gv: &DenseMatrix) -> Vec<f64> {
    let mut g = Vec::with_capacity(gu.data().len() + gv.data().len());
    g.extend_from_slice(gu.data());
    g.extend_from_slice(gv.data());
    g
}

fn unstack(x: &[f64], m: usize, n: usize, r: usize) -> FactorPair {
    let u = DenseMatrix::from_vec(m, r, x[..m * r].to_vec()).expect("stacked layout");
    let v = DenseMatrix::from_vec(n, r, x[m * r..].to_vec()).expect("stacked layout");
    FactorPair { u, v }
}

fn full_objective(a: &DenseMatrix, m: usize, n: usize, r: usize, x: &[f64]) -> f64 {
    let fp = unstack(x, m, n, r);
    objective(a, &fp).expect("stacked layout")
}

/// Quadratic block model `F(X) = 1/2 (||A||^2 - 2 <X, C> + <G, X^T X>)` for
/// one factor with the other fixed; its gradient is `X G - C`.
struct BlockQuadratic {
    gram: DenseMatrix,
    cross: DenseMatrix,
    rows: usize,
    rank: usize,
}

impl BlockQuadratic {
    fn for_u(a: &DenseMatrix, v: &DenseMatrix) -> Result<Self> {
        Ok(BlockQuadratic {
            gram: v.gram(),
            cross: a.matmul(v)?,
            rows: a.rows(),
            rank: v.cols(),
        })
    }

    fn for_v(a: &DenseMatrix, u: &DenseMatrix) -> Result<Self> {
        Ok(BlockQuadratic {
            gram: u.gram(),
            cross: a.matmul_t_left(u)?,
            rows: a.cols(),
            rank: u.cols(),
        })
    }

    fn col<'a>(&self, x: &'a [f64], j: usize) -> &'a [f64] {
        &x[j * self.rows..(j + 1) * self.rows]
    }

    /// Exact decrease `F(y) - F(x) = <g, d> + 1/2 d^T H d` with `d = y - x`
    /// and Hessian blocks given by the Gram matrix. Evaluating the decrease
    /// directly (instead of subtracting two values of order `||A||^2`) keeps
    /// the acceptance tests exact near stationary points.
    fn decrease(&self, x: &[f64], grad_x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(x).map(|(&yi, &xi)| yi - xi).collect();
        let linear = dot(grad_x, &d);
        let mut quad = 0.0;
        for j in 0..self.rank {
            for k in 0..self.rank {
                let g = self.gram[(k, j)];
                if g != 0.0 {
                    quad += g * dot(self.col(&d, j), self.col(&d, k));
                }
            }
        }
        linear + 0.5 * quad
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for j in 0..self.rank {
            let out = &mut g[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.rank {
                let w = self.gram[(k, j)];
                if w == 0.0 {
                    continue;
                }
                let xk = &x[k * self.rows..(k + 1) * self.rows];
                for (o, &xv) in out.iter_mut().zip(xk) {
                    *o += w * xv;
                }
            }
            for (o, &c) in out.iter_mut().zip(self.cross.col(j)) {
                *o -= c;
            }
        }
        g
    }
}

fn pgrad_norm_flat(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| {
            let p = if xi > 0.0 { gi } else { gi.min(0.0) };
            p * p
        })
        .sum::<f64>()
        .sqrt()
}

enum BlockStep {
    Armijo { sigma: f64, beta: f64 },
    Fo { fo_beta: f64 },
}

/// One coordinate sweep: run the inner loop on `U` to its adaptive relative
/// tolerance, then on `V` against the updated `U`. An inner loop that needs
/// no iteration tightens its tolerance tenfold. Returns the inner step
/// counts of both blocks so the caller can convert them into full-variable
/// updates.
#[allow(clippy::too_many_arguments)]
fn coordinate_sweep(
    a: &DenseMatrix,
    fp: FactorPair,
    pg0: f64,
    kind: BlockStep,
    carry_u: &mut f64,
    carry_v: &mut f64,
    eps_u: &mut f64,
    eps_v: &mut f64,
) -> Result<(FactorPair, bool, usize, usize)> {
    let mut fp = fp;

    let blk = BlockQuadratic::for_u(a, &fp.v)?;
    let mut u_data = fp.u.data().to_vec();
    let (stalled_u, inner_u) = block_inner_loop(&blk, &mut u_data, carry_u, eps_u, pg0, &kind);
    fp.u = DenseMatrix::from_vec(a.rows(), fp.rank(), u_data).expect("block layout");

    let blk = BlockQuadratic::for_v(a, &fp.u)?;
    let mut v_data = fp.v.data().to_vec();
    let (stalled_v, inner_v) = block_inner_loop(&blk, &mut v_data, carry_v, eps_v, pg0, &kind);
    fp.v = DenseMatrix::from_vec(a.cols(), fp.rank(), v_data).expect("block layout");

    Ok((fp, stalled_u || stalled_v, inner_u, inner_v))
}

fn block_inner_loop(
    blk: &BlockQuadratic,
    x: &mut Vec<f64>,
    carry: &mut f64,
    eps_inner: &mut f64,
    pg0: f64,
    kind: &BlockStep,
) -> (bool, usize) {
    let mut iters = 0usize;
    let mut stalled = false;
    loop {
        let g = blk.grad(x);
        if pgrad_norm_flat(x, &g) <= *eps_inner * pg0 || iters >= INNER_ITER_CAP {
            break;
        }
        let snapshot = x.clone();
        let mut df = |y: &[f64]| blk.decrease(&snapshot, &g, y);
        let step = match kind {
            BlockStep::Armijo { sigma, beta } => {
                armijo_search(&mut df, x, &g, *carry, *sigma, *beta)
            }
            BlockStep::Fo { fo_beta } => fo_step(&mut df, x, &g, *carry, *fo_beta),
        };
        *carry = step.carry;
        if step.stalled {
            stalled = true;
            break;
        }
        *x = step.x;
        iters += 1;
    }
    if iters == 0 {
        *eps_inner /= 10.0;
    }
    (stalled, iters)
}
