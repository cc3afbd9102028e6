//! Shared helpers for the solver benchmarks.

use nmfkit_core::matrix::DenseMatrix;
use nmfkit_core::rng::Lcg64;

/// Deterministic uniform(0,1) benchmark matrix.
pub fn bench_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = Lcg64::new(seed);
    DenseMatrix::from_fn(m, n, |_, _| rng.next_f64())
}
