//! Benchmark instance generation: uniform random nonnegative matrices and
//! the smooth-mixture synthesis used by the smoothness experiment.

use nmfkit_core::matrix::DenseMatrix;
use nmfkit_core::rng::Lcg64;

/// Uniform(0,1) entries from the seeded generator, filled in storage order.
pub fn gen_random_instance(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = Lcg64::new(seed);
    let mut a = DenseMatrix::zeros(m, n);
    a.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    a
}

/// The four built-in smooth nonnegative sources sampled on `[0, 1]`, one per
/// column, peak value 1: a half-sine arch, a Gaussian bump at 0.3, a raised
/// cosine at 0.7, and a smoothstep ramp with a plateau.
pub fn smooth_sources(n_points: usize) -> DenseMatrix {
    let gauss_center = 0.3;
    let gauss_width = 0.08;
    let cos_center = 0.7;
    let cos_width = 0.2;
    DenseMatrix::from_fn(n_points, 4, |i, j| {
        let x = i as f64 / (n_points - 1) as f64;
        match j {
            0 => (std::f64::consts::PI * x).sin(),
            1 => (-(x - gauss_center) * (x - gauss_center)
                / (2.0 * gauss_width * gauss_width))
                .exp(),
            2 => {
                let d = (x - cos_center).abs();
                if d <= cos_width {
                    0.5 * (1.0 + (std::f64::consts::PI * d / cos_width).cos())
                } else {
                    0.0
                }
            }
            _ => {
                let t = (x / 0.5).min(1.0);
                t * t * (3.0 - 2.0 * t)
            }
        }
    })
}

/// A generated smooth-mixture instance.
pub struct SmoothMixture {
    /// Observed data `max(F E^T + N, 0)`.
    pub a: DenseMatrix,
    /// The four clean sources `F` (n_points x 4).
    pub sources: DenseMatrix,
    /// Mixing weights `E` (n_mixtures x 4).
    pub weights: DenseMatrix,
    /// Noise-free mixture `F E^T`.
    pub clean: DenseMatrix,
}

/// Mixture data `A = max(F E^T + N, 0)` with random nonnegative mixing
/// weights and Gaussian noise rescaled to `noise_rel * ||F E^T||_F`.
pub fn gen_smooth_mixture(
    n_points: usize,
    n_mixtures: usize,
    noise_rel: f64,
    seed: u64,
) -> SmoothMixture {
    let f = smooth_sources(n_points);
    let mut rng = Lcg64::new(seed);
    let mut e = DenseMatrix::zeros(n_mixtures, 4);
    e.data_mut().iter_mut().for_each(|x| *x = rng.next_f64());
    let clean = f.matmul_t_right(&e).expect("shapes fixed");

    let mut a = clean.clone();
    if noise_rel > 0.0 {
        let mut noise: Vec<f64> = (0..a.data().len()).map(|_| rng.next_gaussian()).collect();
        let nrm = noise.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = noise_rel * clean.norm_fro() / nrm;
        noise.iter_mut().for_each(|x| *x *= scale);
        for (av, nv) in a.data_mut().iter_mut().zip(&noise) {
            *av = (*av + nv).max(0.0);
        }
    }
    SmoothMixture {
        a,
        sources: f,
        weights: e,
        clean,
    }
}
