//! Step-size searches for the projected gradient solvers, operating on flat
//! coordinate slices so the same code serves one factor block or the stacked
//! `(U, V)` variable.
//!
//! Both searches consume a *decrease* oracle `df(y) = F(y) - F(x)` instead of
//! `F` itself. Coordinate solvers evaluate the decrease exactly through
//! their quadratic block model, which keeps the acceptance tests meaningful
//! at tight tolerances where subtracting two objective values of order
//! `||A||^2` would drown in cancellation.

/// Shrink factor floor; below this the Armijo search reports a stall.
const ALPHA_FLOOR: f64 = 1e-20;
/// Cap on expansion probes per search (the acceptance loop is not bounded by
/// the classical scheme; the cap only cuts off pathological flat directions).
const EXPAND_CAP: usize = 50;
/// Curvature overflow guard for the first-order step.
const L_CEILING: f64 = 1e300;

/// Result of one projected line search or first-order step.
#[derive(Debug, Clone)]
pub struct SearchStep {
    pub x: Vec<f64>,
    /// Step-size state to carry into the next outer iteration: the final
    /// Armijo alpha, or the relaxed curvature estimate for the FO step.
    pub carry: f64,
    pub stalled: bool,
}

fn projected_point(x: &[f64], grad: &[f64], alpha: f64) -> Vec<f64> {
    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| (xi - alpha * gi).max(0.0))
        .collect()
}

fn grad_inner(grad: &[f64], y: &[f64], x: &[f64]) -> f64 {
    grad.iter()
        .zip(y.iter().zip(x))
        .map(|(&g, (&yi, &xi))| g * (yi - xi))
        .sum()
}

fn dist_sq(y: &[f64], x: &[f64]) -> f64 {
    y.iter()
        .zip(x)
        .map(|(&yi, &xi)| (yi - xi) * (yi - xi))
        .sum()
}

/// Projected gradient step with the Armijo acceptance test
/// `F(y) - F(x) <= sigma <grad, y - x>` where `y = [x - alpha grad]_+`.
///
/// If the first probe fails the test, alpha shrinks by `beta` until it
/// passes; otherwise alpha expands by `1/beta` while the test keeps passing
/// and the last passing point is kept. The returned `carry` is the alpha the
/// loop ended on, which seeds the next outer iteration.
pub fn armijo_search(
    df: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    grad: &[f64],
    alpha_init: f64,
    sigma: f64,
    beta: f64,
) -> SearchStep {
    let mut alpha = alpha_init;
    let mut y = projected_point(x, grad, alpha);
    let mut accepts = |y: &[f64]| df(y) <= sigma * grad_inner(grad, y, x);

    if !accepts(&y) {
        loop {
            alpha *= beta;
            if alpha < ALPHA_FLOOR {
                return SearchStep {
                    x: x.to_vec(),
                    carry: alpha,
                    stalled: true,
                };
            }
            y = projected_point(x, grad, alpha);
            if accepts(&y) {
                break;
            }
        }
    } else {
        for _ in 0..EXPAND_CAP {
            let alpha_next = alpha / beta;
            let probe = projected_point(x, grad, alpha_next);
            if !accepts(&probe) {
                alpha = alpha_next;
                break;
            }
            alpha = alpha_next;
            y = probe;
        }
    }

    let stalled = y == x;
    SearchStep {
        x: y,
        carry: alpha,
        stalled,
    }
}

/// Projected step controlled by a local curvature estimate `L`:
/// `y = [x - grad / L]_+` accepted once
/// `F(y) - F(x) <= <grad, y - x> + L/2 ||y - x||^2`.
///
/// The estimate is tightened by `fo_beta` until the majorization holds and
/// relaxed by the same factor on success, so `L` tracks the local Lipschitz
/// constant from below. Stalls only if `L` overflows its ceiling.
pub fn fo_step(
    df: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    grad: &[f64],
    l_current: f64,
    fo_beta: f64,
) -> SearchStep {
    let mut l = l_current.max(f64::MIN_POSITIVE);
    loop {
        let y = projected_point(x, grad, 1.0 / l);
        let bound = grad_inner(grad, &y, x) + 0.5 * l * dist_sq(&y, x);
        if df(&y) <= bound {
            return SearchStep {
                x: y,
                carry: l / fo_beta,
                stalled: false,
            };
        }
        l *= fo_beta;
        if l > L_CEILING {
            return SearchStep {
                x: x.to_vec(),
                carry: l,
                stalled: true,
            };
        }
    }
}
