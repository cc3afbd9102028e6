//! Per-sweep costs of the solvers and the end-to-end time of a tight RRI
//! run. The rank pair for the RRI sweep makes the linear cost scaling in r
//! directly visible in the report.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nmfkit_bench::bench_matrix;
use nmfkit_core::model::random_pair;
use nmfkit_core::solvers::rri::rri_sweep;
use nmfkit_core::solvers::{mult::mult_sweep, als::als_sweep, run, Algorithm, SolverConfig};
use nmfkit_core::svd::svd;

fn sweep_benches(c: &mut Criterion) {
    let a = bench_matrix(200, 100, 7);
    for r in [10usize, 20] {
        let fp = random_pair(200, 100, r, 11);
        c.bench_function(&format!("rri_sweep_200x100_r{r}"), |b| {
            b.iter(|| black_box(rri_sweep(&a, &fp)))
        });
    }

    let a_small = bench_matrix(100, 50, 13);
    let fp = random_pair(100, 50, 10, 17);
    c.bench_function("mult_sweep_100x50_r10", |b| {
        b.iter(|| black_box(mult_sweep(&a_small, &fp).unwrap()))
    });
    c.bench_function("als_sweep_100x50_r10", |b| {
        b.iter(|| black_box(als_sweep(&a_small, &fp)))
    });
}

fn svd_bench(c: &mut Criterion) {
    let a = bench_matrix(30, 20, 23);
    c.bench_function("jacobi_svd_30x20", |b| b.iter(|| black_box(svd(&a).unwrap())));
}

fn full_run_bench(c: &mut Criterion) {
    let a = bench_matrix(30, 20, 29);
    c.bench_function("rri_run_30x20_r2_eps1e-4", |b| {
        b.iter(|| {
            let cfg = SolverConfig::new(Algorithm::RRI, 2, 1e-4).with_seed(3);
            black_box(run(&a, &cfg).unwrap())
        })
    });
}

criterion_group!(benches, sweep_benches, svd_bench, full_run_bench);
criterion_main!(benches);
