#![allow(clippy::needless_range_loop)]

//! Acceptance suite: every numbered criterion below runs at its stated
//! tolerance and prints one PASS/FAIL line. Run with `--nocapture` to see
//! the lines for passing criteria too.

use nmfkit_cli::campaign::{run_campaign, Campaign};
use nmfkit_cli::smooth::{run_smooth_experiment, second_diff_energy};
use nmfkit_core::constraint::{
    grri_sweep, hoyer_sparsity, max_inner, run_grri, ConstraintSet, DiagonalFactorization,
};
use nmfkit_core::matrix::{dot, DenseMatrix, DenseVector};
use nmfkit_core::model::{gradients, objective, random_pair, StopRule};
use nmfkit_core::nnls::{solve_nnls, NnlsProblem};
use nmfkit_core::regularized::{run_regularized, RegularizerSpec};
use nmfkit_core::rng::Lcg64;
use nmfkit_core::solvers::{run, Algorithm, SolverConfig, StopReason};
use nmfkit_core::svd;
use nmfkit_core::tensor::{run_tensor_rri, tensor_rri_sweep, DenseTensor, KruskalTensor};
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn random_nonneg(seed: u64, m: usize, n: usize) -> DenseMatrix {
    let mut rng = Lcg64::new(seed);
    DenseMatrix::from_fn(m, n, |_, _| rng.next_f64())
}

#[test]
fn criterion_01_gradient_correctness() {
    let t0 = Instant::now();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut rng = Lcg64::new(101);
    for _ in 0..20 {
        let m = 3 + (rng.next_u64() % 6) as usize; // up to 8
        let n = 3 + (rng.next_u64() % 4) as usize; // up to 6
        let a = random_nonneg(rng.next_u64(), m, n);
        let fp = random_pair(m, n, 3, rng.next_u64());
        let kkt = gradients(&a, &fp).unwrap();
        let scale = (kkt.grad_u.norm_fro() + kkt.grad_v.norm_fro()).max(1.0);
        for idx in 0..fp.u.data().len() {
            let mut plus = fp.clone();
            plus.u.data_mut()[idx] += h;
            let mut minus = fp.clone();
            minus.u.data_mut()[idx] -= h;
            let fd = (objective(&a, &plus).unwrap() - objective(&a, &minus).unwrap()) / (2.0 * h);
            worst = worst.max((fd - kkt.grad_u.data()[idx]).abs() / scale);
        }
        for idx in 0..fp.v.data().len() {
            let mut plus = fp.clone();
            plus.v.data_mut()[idx] += h;
            let mut minus = fp.clone();
            minus.v.data_mut()[idx] -= h;
            let fd = (objective(&a, &plus).unwrap() - objective(&a, &minus).unwrap()) / (2.0 * h);
            worst = worst.max((fd - kkt.grad_v.data()[idx]).abs() / scale);
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report(
        "criterion 1 (gradient correctness)",
        worst <= 1e-5 && elapsed < 1.0,
        &format!("max relative error {worst:.2e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_rank_one_update_optimality() {
    let mut rng = Lcg64::new(202);
    let mut worst_gap: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for _ in 0..200 {
        let m = 2 + (rng.next_u64() % 7) as usize;
        let n = 2 + (rng.next_u64() % 7) as usize; // up to 8
        let r = DenseMatrix::from_fn(m, n, |_, _| rng.next_f64() * 2.0 - 1.0);
        let u = DenseVector::from_iter((0..m).map(|_| rng.next_f64() + 0.02));
        let nu = u.norm2_sq();
        let w = r.matvec_t(&u);
        let wp = w.project_nonneg();
        let v_closed: Vec<f64> = wp.iter().map(|&x| x / nu).collect();

        let err = |v: &[f64]| -> f64 {
            let mut s = 0.0;
            for j in 0..n {
                for i in 0..m {
                    let d = r[(i, j)] - u[i] * v[j];
                    s += d * d;
                }
            }
            0.5 * s
        };

        // Independent oracle: coarse grid scan, then projected gradient with
        // a conservative step, run to well past the 1e-8 gap of interest.
        let vmax = v_closed.iter().fold(0.1f64, |m, &x| m.max(x)) * 1.5;
        let grid_pts = if n <= 5 { 4usize } else { 3usize };
        let mut best = vec![0.0; n];
        let mut best_err = err(&best);
        let total = grid_pts.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = vec![0.0; n];
            for vj in v.iter_mut() {
                *vj = (c % grid_pts) as f64 / (grid_pts - 1) as f64 * vmax;
                c /= grid_pts;
            }
            let e = err(&v);
            if e < best_err {
                best_err = e;
                best = v;
            }
        }
        let step = 0.5 / nu;
        let mut v = best;
        for _ in 0..4000 {
            // gradient of the subproblem: ||u||^2 v - R^T u
            for j in 0..n {
                let g = nu * v[j] - w[j];
                v[j] = (v[j] - step * g).max(0.0);
            }
        }
        let oracle_err = err(&v);
        let closed_err = err(&v_closed);
        worst_gap = worst_gap.max((closed_err - oracle_err).abs());

        // Lemma value identity, skipping the zero-positive-part branch.
        if !wp.is_zero() {
            let predicted = r.norm_fro_sq() - wp.norm2_sq() / nu;
            let direct = 2.0 * closed_err;
            worst_identity =
                worst_identity.max((direct - predicted).abs() / direct.max(1e-30));
        }
    }
    report(
        "criterion 2 (rank-one update optimality)",
        worst_gap <= 1e-8 && worst_identity <= 1e-10,
        &format!("max objective gap {worst_gap:.2e}, identity rel err {worst_identity:.2e}"),
    );
}

fn assert_monotone(trace: &[f64], slack: f64) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + slack)
}

#[test]
fn criterion_03_monotonicity_suites() {
    let mut all_ok = true;
    let mut detail = String::new();

    // RRI, Damped RRI (three psi values), ALS through the solver runner.
    for (label, algo, psi) in [
        ("rri", Algorithm::RRI, 0.0),
        ("drri(0.1)", Algorithm::DampedRRI, 0.1),
        ("drri(1)", Algorithm::DampedRRI, 1.0),
        ("drri(10)", Algorithm::DampedRRI, 10.0),
        ("als", Algorithm::ALS, 0.0),
    ] {
        for seed in 0..20u64 {
            let a = random_nonneg(3000 + seed, 8, 6);
            let mut cfg = SolverConfig::new(algo, 3, 1e-7).with_seed(seed);
            cfg.damping_psi = psi;
            cfg.stop = cfg.stop.with_budgets(20.0, 120);
            let rep = run(&a, &cfg).unwrap();
            let slack = 1e-12 * a.norm_fro_sq();
            let trace: Vec<f64> = rep.trace.iter().map(|t| t.objective).collect();
            if !assert_monotone(&trace, slack) {
                all_ok = false;
                detail.push_str(&format!("{label} seed {seed} increased; "));
            }
        }
    }

    // GRRI with each of the six sets on the data side.
    let n = 6usize;
    let sets: Vec<(&str, ConstraintSet)> = vec![
        ("normed", ConstraintSet::Normed),
        ("normed-nonneg", ConstraintSet::NormedNonneg),
        (
            "bounded",
            ConstraintSet::BoundedNonneg {
                lower: DenseVector(vec![0.02; n]),
                upper: DenseVector(vec![0.9; n]),
            },
        ),
        ("binary", ConstraintSet::Binary),
        ("sparse-k", ConstraintSet::SparseK { k: 3 }),
        ("hoyer", ConstraintSet::HoyerSparse { target: 0.5 }),
    ];
    for (name, set_y) in &sets {
        for seed in 0..20u64 {
            let a = random_nonneg(4000 + seed, 8, n);
            let (_, trace) =
                run_grri(&a, 3, &ConstraintSet::NormedNonneg, set_y, 40, seed).unwrap();
            if !assert_monotone(&trace, 1e-12 * a.norm_fro_sq()) {
                all_ok = false;
                detail.push_str(&format!("grri/{name} seed {seed} increased; "));
            }
        }
    }

    // Tensor RRI on random 4x4x4 tensors.
    for seed in 0..20u64 {
        let mut rng = Lcg64::new(5000 + seed);
        let data: Vec<f64> = (0..64).map(|_| rng.next_f64()).collect();
        let t = DenseTensor::from_vec(&[4, 4, 4], data).unwrap();
        let rep = run_tensor_rri(&t, 3, 40, seed).unwrap();
        if !assert_monotone(&rep.trace, 1e-12 * t.norm_fro_sq()) {
            all_ok = false;
            detail.push_str(&format!("tensor seed {seed} increased; "));
        }
    }

    // Regularized RRI with static penalties (one-norm + two-norm).
    for seed in 0..20u64 {
        let a = random_nonneg(6000 + seed, 8, 6);
        let mut v_spec = RegularizerSpec::none(3);
        v_spec.l1_beta = vec![0.2; 3];
        v_spec.two_norm_gamma = vec![0.3; 3];
        let stop = StopRule::new(1e-8).with_budgets(20.0, 120);
        let rep =
            run_regularized(&a, 3, &RegularizerSpec::none(3), &v_spec, &stop, seed).unwrap();
        let trace: Vec<f64> = rep.trace.iter().map(|t| t.objective).collect();
        if !assert_monotone(&trace, 1e-12 * a.norm_fro_sq()) {
            all_ok = false;
            detail.push_str(&format!("regularized seed {seed} increased; "));
        }
    }

    if detail.is_empty() {
        detail = "rri, drri x3, als, grri x6 sets, tensor, regularized: all traces nonincreasing"
            .to_string();
    }
    report("criterion 3 (monotonicity suites)", all_ok, &detail);
}

#[test]
fn criterion_04_rank_one_global_optimum() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let a = random_nonneg(700 + seed, 10, 8);
        let mut cfg = SolverConfig::new(Algorithm::RRI, 1, 1e-8).with_seed(seed);
        cfg.stop = cfg.stop.with_budgets(30.0, 100_000);
        let rep = run(&a, &cfg).unwrap();
        let s = svd::svd(&a).unwrap();
        let best = svd::truncation_error_sq(&s, 1);
        let got = a.sub(&rep.final_factors.product()).unwrap().norm_fro_sq();
        worst = worst.max((got - best).abs() / best.max(1e-30));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report(
        "criterion 4 (rank-one global optimum)",
        worst <= 1e-6 && elapsed < 5.0,
        &format!("max relative excess {worst:.2e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_05_stationarity_identities() {
    let mut worst_ident: f64 = 0.0;
    let mut worst_ball: f64 = 0.0;
    for (i, algo) in [Algorithm::RRI, Algorithm::CFO].into_iter().enumerate() {
        for seed in 0..5u64 {
            let a = random_nonneg(800 + seed + 50 * i as u64, 12, 9);
            let mut cfg = SolverConfig::new(algo, 3, 1e-8).with_seed(seed);
            cfg.stop = cfg.stop.with_budgets(40.0, 500_000);
            let rep = run(&a, &cfg).unwrap();
            assert!(
                rep.final_pgrad_ratio() <= 1e-6,
                "{algo:?} seed {seed} not near stationarity (ratio {:.2e})",
                rep.final_pgrad_ratio()
            );
            let product = rep.final_factors.product();
            let err_sq = a.sub(&product).unwrap().norm_fro_sq();
            let ident = a.norm_fro_sq() - product.norm_fro_sq();
            worst_ident =
                worst_ident.max((0.5 * err_sq - 0.5 * ident).abs() / a.norm_fro_sq());
            let center_dist = product.sub(&a.scale(0.5)).unwrap().norm_fro();
            worst_ball = worst_ball.max(center_dist - 0.5 * a.norm_fro());
        }
    }
    report(
        "criterion 5 (stationarity identities)",
        worst_ident <= 1e-6 && worst_ball <= 1e-8,
        &format!("identity gap {worst_ident:.2e} of ||A||^2, ball excess {worst_ball:.2e}"),
    );
}

#[test]
fn criterion_06_error_ordering_chain() {
    let mut ok = true;
    let mut detail = String::new();
    for seed in 0..20u64 {
        let a = random_nonneg(900 + seed, 12, 9);
        let r = 2 + (seed % 2) as usize;
        let mut cfg = SolverConfig::new(Algorithm::RRI, r, 1e-6).with_seed(seed);
        cfg.stop = cfg.stop.with_budgets(30.0, 100_000);
        let rep = run(&a, &cfg).unwrap();
        let s = svd::svd(&a).unwrap();
        let err_tr = a.sub(&svd::truncate(&s, r).unwrap()).unwrap().norm_fro();
        let (_, err_plus) = svd::nonneg_part_baseline(&a, r).unwrap();
        let err_nmf = a.sub(&rep.final_factors.product()).unwrap().norm_fro();
        if !(err_plus <= err_tr + 1e-10 && err_tr <= err_nmf + 1e-10) {
            ok = false;
            detail.push_str(&format!(
                "seed {seed}: {err_plus:.6e} vs {err_tr:.6e} vs {err_nmf:.6e}; "
            ));
        }
    }
    if detail.is_empty() {
        detail = "||A-[A_r]+|| <= ||A-A_r|| <= ||A-UV^T|| on all 20 instances".to_string();
    }
    report("criterion 6 (error ordering chain)", ok, &detail);
}

#[test]
fn criterion_07_projection_oracles() {
    let mut rng = Lcg64::new(707);

    // Binary vs full enumeration at n = 12.
    let mut worst_binary: f64 = 0.0;
    for _ in 0..500 {
        let n = 12;
        let y: Vec<f64> = (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let sol = max_inner(&ConstraintSet::Binary, &DenseVector::from_slice(&y)).unwrap();
        let got = dot(&y, &sol.s);
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << n) {
            let k = mask.count_ones() as f64;
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| y[i]).sum();
            best = best.max(s / k.sqrt());
        }
        worst_binary = worst_binary.max((got - best).abs());
    }

    // Sparse-K vs support enumeration at n = 10.
    let mut worst_sparse: f64 = 0.0;
    for trial in 0..500 {
        let n = 10;
        let k = 1 + (trial % n);
        let y: Vec<f64> = (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let sol = max_inner(&ConstraintSet::SparseK { k }, &DenseVector::from_slice(&y)).unwrap();
        let got = dot(&y, &sol.s);
        let mut best: f64 = 0.0;
        for mask in 1u32..(1 << n) {
            if (mask.count_ones() as usize) > k {
                continue;
            }
            let mut norm_sq = 0.0;
            let mut inner = 0.0;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    let v = y[i].max(0.0);
                    norm_sq += v * v;
                    inner += y[i] * v;
                }
            }
            if norm_sq > 0.0 {
                best = best.max(inner / norm_sq.sqrt());
            }
        }
        worst_sparse = worst_sparse.max((got - best).abs());
    }

    // Hoyer projection: target sparsity and unit norm on 500 random inputs.
    let mut worst_sparsity: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for _ in 0..500 {
        let n = 4 + (rng.next_u64() % 13) as usize;
        let target = 0.15 + 0.7 * rng.next_f64();
        let y: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 0.5).collect();
        let sol = max_inner(
            &ConstraintSet::HoyerSparse { target },
            &DenseVector::from_slice(&y),
        )
        .unwrap();
        worst_norm = worst_norm.max((sol.s.norm2() - 1.0).abs());
        worst_sparsity = worst_sparsity.max((hoyer_sparsity(&sol.s) - target).abs());
    }

    report(
        "criterion 7 (projection oracles)",
        worst_binary <= 1e-12 && worst_sparse <= 1e-12 && worst_sparsity <= 1e-6 && worst_norm <= 1e-9,
        &format!(
            "binary gap {worst_binary:.1e}, sparse-k gap {worst_sparse:.1e}, hoyer sparsity err {worst_sparsity:.1e}, norm err {worst_norm:.1e}"
        ),
    );
}

#[test]
fn criterion_08_nnls_oracle_equivalence() {
    let mut rng = Lcg64::new(808);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let r = 1 + (trial % 3);
        let m = r + 2 + (trial % 5);
        let design = DenseMatrix::from_fn(m, r, |_, _| rng.next_f64() * 2.0 - 1.0);
        let target = DenseVector::from_iter((0..m).map(|_| rng.next_f64() * 2.0 - 1.0));
        let v = solve_nnls(&NnlsProblem {
            design: design.clone(),
            target: target.clone(),
        })
        .unwrap();
        let res = |v: &[f64]| -> f64 {
            let uv = design.matvec(v);
            target
                .iter()
                .zip(uv.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum()
        };
        // Exhaustive support enumeration.
        let gram = design.gram();
        let rhs = design.matvec_t(&target);
        let mut best = res(&vec![0.0; r]);
        for mask in 1u32..(1 << r) {
            let support: Vec<usize> = (0..r).filter(|i| mask & (1 << i) != 0).collect();
            // Solve the reduced normal equations by hand (r <= 3).
            let k = support.len();
            let mut g = DenseMatrix::zeros(k, k);
            let mut b = vec![0.0; k];
            for (p, &i) in support.iter().enumerate() {
                b[p] = rhs[i];
                for (q, &j) in support.iter().enumerate() {
                    g[(p, q)] = gram[(i, j)];
                }
            }
            if let Some(z) = tiny_solve(&g, &b) {
                if z.iter().all(|&x| x >= 0.0) {
                    let mut cand = vec![0.0; r];
                    for (&i, &zi) in support.iter().zip(&z) {
                        cand[i] = zi;
                    }
                    best = best.min(res(&cand));
                }
            }
        }
        worst = worst.max(res(&v) - best);
    }
    report(
        "criterion 8 (nnls oracle equivalence)",
        worst <= 1e-10,
        &format!("max residual excess {worst:.2e}"),
    );
}

/// Gaussian elimination for the tiny enumeration systems (k <= 3).
fn tiny_solve(g: &DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let k = b.len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = g[(i, j)];
        }
        m[i][k] = b[i];
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..k {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for j in col..=k {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    Some((0..k).map(|i| m[i][k] / m[i][i]).collect())
}

#[test]
fn criterion_09_tensor_recovery_and_matrix_equivalence() {
    // Exact rank-one 5x4x3 recovery within five sweeps, 20 seeds.
    let mut worst_res: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = Lcg64::new(909 + seed);
        let a: Vec<f64> = (0..5).map(|_| rng.next_f64() + 0.05).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.next_f64() + 0.05).collect();
        let c: Vec<f64> = (0..3).map(|_| rng.next_f64() + 0.05).collect();
        let mut t = DenseTensor::zeros(&[5, 4, 3]);
        for k in 0..3 {
            for j in 0..4 {
                for i in 0..5 {
                    t.set(&[i, j, k], 2.0 * a[i] * b[j] * c[k]);
                }
            }
        }
        let rep = run_tensor_rri(&t, 1, 5, seed).unwrap();
        worst_res = worst_res.max(rep.kruskal.residual_sq(&t).sqrt());
    }

    // d = 2 equivalence with the generalized iteration on the transpose.
    let mut rng = Lcg64::new(910);
    let a = DenseMatrix::from_fn(6, 5, |_, _| rng.next_f64());
    let mut s = KruskalTensor::init_random(&[6, 5], 3, 12);
    s.scales = DenseVector::zeros(3);
    let mut g = DiagonalFactorization {
        x: s.factors[1].clone(),
        y: s.factors[0].clone(),
        d: s.scales.clone(),
    };
    let t = DenseTensor::from_matrix(&a);
    let at = a.transpose();
    let mut worst_gap: f64 = 0.0;
    for _ in 0..15 {
        s = tensor_rri_sweep(&t, &s);
        g = grri_sweep(
            &at,
            &g,
            &ConstraintSet::NormedNonneg,
            &ConstraintSet::NormedNonneg,
        )
        .unwrap();
        let dense = s.to_dense(&[6, 5]);
        let gp = g.product();
        let mut gap = 0.0f64;
        for i in 0..6 {
            for j in 0..5 {
                let d = dense.get(&[i, j]) - gp[(j, i)];
                gap += d * d;
            }
        }
        worst_gap = worst_gap.max(gap.sqrt());
    }

    report(
        "criterion 9 (tensor recovery + d=2 equivalence)",
        worst_res <= 1e-10 && worst_gap <= 1e-10 * a.norm_fro(),
        &format!("rank-1 residual {worst_res:.2e}, d=2 iterate gap {worst_gap:.2e}"),
    );
}

#[test]
fn criterion_10_campaign_analogue() {
    let t0 = Instant::now();
    let campaign = Campaign {
        sizes: vec![(30, 20, 2), (50, 40, 5)],
        epsilons: vec![1e-2, 1e-4],
        n_matrices: 20,
        n_starts: 1,
        algorithms: vec![Algorithm::RRI, Algorithm::Mult, Algorithm::CLine],
        time_limit_s: 45.0,
        max_sweeps: 10_000,
        seed: 0,
    };
    let records = run_campaign(&campaign).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();

    let successes = |algo: &str, size: (usize, usize, usize), eps: f64| -> usize {
        records
            .iter()
            .filter(|r| {
                r.algorithm == algo
                    && (r.m, r.n, r.r) == size
                    && r.epsilon == eps
                    && r.succeeded
            })
            .count()
    };
    let mut rri_all = true;
    for &size in &campaign.sizes {
        for &eps in &campaign.epsilons {
            if successes("rri", size, eps) != 20 {
                rri_all = false;
            }
        }
    }
    let mult_hard = successes("mult", (50, 40, 5), 1e-4);
    let rri_hard = successes("rri", (50, 40, 5), 1e-4);

    let median = |algo: &str| -> f64 {
        let mut sweeps: Vec<usize> = records
            .iter()
            .filter(|r| r.algorithm == algo && r.succeeded)
            .map(|r| r.sweeps)
            .collect();
        sweeps.sort_unstable();
        if sweeps.is_empty() {
            f64::INFINITY
        } else {
            sweeps[sweeps.len() / 2] as f64
        }
    };
    let med_rri = median("rri");
    let med_cline = median("cline");

    report(
        "criterion 10 (campaign analogue)",
        rri_all && mult_hard < rri_hard && med_rri <= med_cline && elapsed < 180.0,
        &format!(
            "rri 20/20 everywhere: {rri_all}, mult@(50,40,5),1e-4: {mult_hard} < rri {rri_hard}, median sweeps rri {med_rri} vs cline {med_cline}, {elapsed:.0}s"
        ),
    );
}

#[test]
fn criterion_11_smooth_mixture() {
    let mut energy0 = 0.0;
    let mut energy100 = 0.0;
    let mut err0 = 0.0;
    let mut err10 = 0.0;
    let seeds = 5u64;
    for seed in 0..seeds {
        let out = run_smooth_experiment(&[0.0, 10.0, 100.0], 200, 100, 0.2, 200, seed).unwrap();
        energy0 += out[0].second_diff_energy;
        err0 += out[0].recon_rel_err;
        err10 += out[1].recon_rel_err;
        energy100 += out[2].second_diff_energy;
    }
    energy0 /= seeds as f64;
    energy100 /= seeds as f64;
    err0 /= seeds as f64;
    err10 /= seeds as f64;
    report(
        "criterion 11 (smooth mixture)",
        energy100 <= 0.5 * energy0 && err10 <= 1.2 * err0,
        &format!(
            "second-diff energy {energy100:.3e} vs 0.5x{energy0:.3e}, recon err delta=10 {err10:.3e} vs 1.2x{err0:.3e}"
        ),
    );
}

#[test]
fn criterion_12_saddle_construction() {
    let a = DenseMatrix::from_rows(&[
        &[3.0, 0.0, 0.0],
        &[0.0, 2.0, 0.0],
        &[0.0, 0.0, 1.0],
    ]);
    // Keep sigma_2 = 2: a rank-one stationary point built from a
    // non-dominant singular direction, probed at epsilon = 0.1.
    let w = svd::saddle_probe(&a, 1, &[1], Some(0.1)).unwrap();
    report(
        "criterion 12 (saddle construction)",
        w.increase_found && w.decrease_found,
        &format!(
            "errors {:.6} < {:.6} < {:.6}",
            w.lower_error_sq, w.base_error_sq, w.upper_error_sq
        ),
    );
}

#[test]
fn smooth_trace_example_from_cli_contract() {
    // `factor --algo rri` must report a criterion stop with a nonincreasing
    // objective trace; exercised here through the library used by the CLI.
    let a = nmfkit_cli::gen::gen_random_instance(30, 20, 1);
    let mut cfg = SolverConfig::new(Algorithm::RRI, 2, 1e-6).with_seed(1);
    cfg.stop = cfg.stop.with_budgets(45.0, 1_000_000);
    let rep = run(&a, &cfg).unwrap();
    assert_eq!(rep.stop_reason, StopReason::Criterion);
    let slack = 1e-12 * a.norm_fro_sq();
    assert!(rep
        .trace
        .windows(2)
        .all(|w| w[1].objective <= w[0].objective + slack));
    // Unit-normalized second differences of smooth data stay finite;
    // sanity-anchor the helper the smooth experiment relies on.
    assert!(second_diff_energy(&rep.final_factors.u).is_finite());
}
