//! Command-line interface: benchmark campaigns, single factorizations,
//! tensor fits, the smooth-mixture experiment, and SVD reference errors.

use clap::{Args, Parser, Subcommand};
use nmfkit_cli::campaign::{emit_records, render_table, Campaign, RecordFormat};
use nmfkit_cli::gen::gen_random_instance;
use nmfkit_cli::io::{
    load_matrix, parse_config, read_pgm, write_matrix_csv, MatrixFormat,
};
use nmfkit_cli::smooth::run_smooth_experiment;
use nmfkit_core::constraint::{run_grri, ConstraintSet};
use nmfkit_core::matrix::DenseMatrix;
use nmfkit_core::solvers::{run, Algorithm, SolverConfig, SolverReport};
use nmfkit_core::svd;
use nmfkit_core::tensor::{run_tensor_rri, DenseTensor};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nmfkit",
    about = "Nonnegative matrix and tensor factorization toolkit",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a multi-solver benchmark campaign and print a summary table
    Bench(BenchArgs),
    /// Factor one matrix with one algorithm; emit factors and a trace
    Factor(FactorArgs),
    /// Fit a nonnegative Kruskal tensor to a stack of PGM images
    Tensor(TensorArgs),
    /// Smooth-mixture recovery experiment over a list of smoothness weights
    Smooth(SmoothArgs),
    /// Truncated-SVD reference errors for a matrix
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Config file with key=value lines mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem size m,n,r (repeatable)
    #[arg(long = "size")]
    sizes: Vec<String>,
    /// Comma-separated relative tolerances
    #[arg(long)]
    eps: Option<String>,
    /// Matrices per size
    #[arg(long)]
    matrices: Option<usize>,
    /// Starting points per matrix
    #[arg(long)]
    starts: Option<usize>,
    /// Comma-separated algorithms (mult,fline,cline,ffo,cfo,als,rri,drri)
    #[arg(long)]
    algos: Option<String>,
    /// Wall-clock limit per run, seconds
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    /// Sweep budget per run
    #[arg(long = "max-sweeps")]
    max_sweeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-run records here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct FactorArgs {
    /// Algorithm: mult, fline, cline, ffo, cfo, als, rri, drri, or grri
    #[arg(long, default_value = "rri")]
    algo: String,
    /// Generate a random instance of size m,n,r
    #[arg(long)]
    size: Option<String>,
    /// Load the matrix from a file instead
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: csv or pgm
    #[arg(long, default_value = "csv")]
    format: String,
    /// Reduced rank (required with --input)
    #[arg(long)]
    rank: Option<usize>,
    /// Relative projected-gradient tolerance
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "time-limit", default_value_t = 45.0)]
    time_limit: f64,
    #[arg(long = "max-sweeps", default_value_t = 1_000_000)]
    max_sweeps: usize,
    /// Damping weight for drri
    #[arg(long, default_value_t = 0.1)]
    psi: f64,
    /// Column set for the data-side factor under grri:
    /// normed, nonneg, binary, sparsek:K, hoyer:T
    #[arg(long)]
    constraint: Option<String>,
    /// Column set for the basis-side factor under grri
    #[arg(long = "constraint-x")]
    constraint_x: Option<String>,
    /// Output prefix; writes <out>.u.csv, <out>.v.csv, <out>.trace.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TensorArgs {
    /// PGM images to stack into a (height, width, count) tensor
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 4)]
    rank: usize,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes per-mode factors, scales and the trace
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmoothArgs {
    /// Comma-separated smoothness weights
    #[arg(long, default_value = "0,10,100")]
    delta: String,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 100)]
    mixtures: usize,
    /// Relative noise norm
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, default_value_t = 300)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-delta metrics as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Load the matrix from a file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: csv or pgm
    #[arg(long, default_value = "csv")]
    format: String,
    /// Generate a random nonnegative instance of size m,n
    #[arg(long)]
    size: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Write the clipped truncation [A_r]_+ here as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes: usage errors exit 2, numeric or
/// I/O failures exit 1.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(err: impl std::fmt::Display) -> Failure {
    Failure::Runtime(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Factor(args) => cmd_factor(args),
        Cmd::Tensor(args) => cmd_tensor(args),
        Cmd::Smooth(args) => cmd_smooth(args),
        Cmd::Baseline(args) => cmd_baseline(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            f.code()
        }
    }
}

fn parse_size3(s: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--size expects m,n,r, got '{s}'")));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad size '{s}'")))?;
    Ok((nums[0], nums[1], nums[2]))
}

fn parse_f64_list(s: &str, flag: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad value in {flag}: '{p}'")))
        })
        .collect()
}

fn parse_algos(s: &str) -> Result<Vec<Algorithm>, Failure> {
    s.split(',')
        .map(|p| p.trim().parse::<Algorithm>().map_err(|e| usage(e.to_string())))
        .collect()
}

fn parse_constraint(s: &str, n: usize) -> Result<ConstraintSet, Failure> {
    let lower = s.to_ascii_lowercase();
    let set = if lower == "normed" {
        ConstraintSet::Normed
    } else if lower == "nonneg" || lower == "normed-nonneg" {
        ConstraintSet::NormedNonneg
    } else if lower == "binary" {
        ConstraintSet::Binary
    } else if let Some(k) = lower.strip_prefix("sparsek:") {
        let k: usize = k
            .parse()
            .map_err(|_| usage(format!("bad sparsek count in '{s}'")))?;
        ConstraintSet::SparseK { k }
    } else if let Some(t) = lower.strip_prefix("hoyer:") {
        let target: f64 = t
            .parse()
            .map_err(|_| usage(format!("bad hoyer target in '{s}'")))?;
        ConstraintSet::HoyerSparse { target }
    } else {
        return Err(usage(format!(
            "unknown constraint '{s}' (normed|nonneg|binary|sparsek:K|hoyer:T)"
        )));
    };
    set.validate(n).map_err(runtime)?;
    Ok(set)
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    // Start from defaults, overlay the config file, then explicit flags.
    let mut sizes: Vec<(usize, usize, usize)> = vec![(30, 20, 2)];
    let mut epsilons = vec![1e-2, 1e-4];
    let mut n_matrices = 10usize;
    let mut n_starts = 1usize;
    let mut algorithms = vec![
        Algorithm::Mult,
        Algorithm::ALS,
        Algorithm::FLine,
        Algorithm::CLine,
        Algorithm::FFO,
        Algorithm::CFO,
        Algorithm::RRI,
    ];
    let mut time_limit = 45.0f64;
    let mut max_sweeps = 1_000_000usize;
    let mut seed = 0u64;

    if let Some(path) = &args.config {
        let mut config_sizes = Vec::new();
        for (k, v) in parse_config(path).map_err(runtime)? {
            match k.as_str() {
                "size" => config_sizes.push(parse_size3(&v)?),
                "eps" => epsilons = parse_f64_list(&v, "eps")?,
                "matrices" => {
                    n_matrices = v.parse().map_err(|_| usage("bad matrices value"))?
                }
                "starts" => n_starts = v.parse().map_err(|_| usage("bad starts value"))?,
                "algos" => algorithms = parse_algos(&v)?,
                "time-limit" => {
                    time_limit = v.parse().map_err(|_| usage("bad time-limit value"))?
                }
                "max-sweeps" => {
                    max_sweeps = v.parse().map_err(|_| usage("bad max-sweeps value"))?
                }
                "seed" => seed = v.parse().map_err(|_| usage("bad seed value"))?,
                other => return Err(usage(format!("unknown config key '{other}'"))),
            }
        }
        if !config_sizes.is_empty() {
            sizes = config_sizes;
        }
    }
    if !args.sizes.is_empty() {
        sizes = args
            .sizes
            .iter()
            .map(|s| parse_size3(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(e) = &args.eps {
        epsilons = parse_f64_list(e, "--eps")?;
    }
    if let Some(m) = args.matrices {
        n_matrices = m;
    }
    if let Some(s) = args.starts {
        n_starts = s;
    }
    if let Some(a) = &args.algos {
        algorithms = parse_algos(a)?;
    }
    if let Some(t) = args.time_limit {
        time_limit = t;
    }
    if let Some(s) = args.max_sweeps {
        max_sweeps = s;
    }
    if let Some(s) = args.seed {
        seed = s;
    }

    let campaign = Campaign {
        sizes,
        epsilons,
        n_matrices,
        n_starts,
        algorithms,
        time_limit_s: time_limit,
        max_sweeps,
        seed,
    };
    campaign.validate().map_err(|e| usage(e.to_string()))?;
    let records = nmfkit_cli::campaign::run_campaign(&campaign).map_err(runtime)?;
    print!("{}", render_table(&campaign, &records));
    if let Some(out) = &args.out {
        let format: RecordFormat = args.format.parse().map_err(usage)?;
        emit_records(&records, format, out).map_err(runtime)?;
        println!("records written to {}", out.display());
    }
    Ok(())
}

fn obtain_matrix(
    size: &Option<String>,
    input: &Option<PathBuf>,
    format: &str,
    seed: u64,
) -> Result<(DenseMatrix, Option<usize>), Failure> {
    match (size, input) {
        (Some(_), Some(_)) => Err(usage("--size and --input are mutually exclusive")),
        (Some(s), None) => {
            let (m, n, r) = parse_size3(s)?;
            Ok((gen_random_instance(m, n, seed), Some(r)))
        }
        (None, Some(path)) => {
            let fmt: MatrixFormat = format.parse().map_err(usage)?;
            Ok((load_matrix(path, fmt).map_err(runtime)?, None))
        }
        (None, None) => Err(usage("one of --size or --input is required")),
    }
}

fn write_trace_csv(rep: &SolverReport, path: &Path) -> Result<(), Failure> {
    let mut text = String::from("sweep,elapsed_s,objective,pgrad_norm\n");
    for t in &rep.trace {
        text.push_str(&format!(
            "{},{:.6e},{:.17e},{:.17e}\n",
            t.sweep, t.elapsed_s, t.objective, t.pgrad_norm
        ));
    }
    std::fs::write(path, text).map_err(runtime)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_factor(args: FactorArgs) -> Result<(), Failure> {
    if args.input.is_some() && args.rank.is_none() {
        return Err(usage("--rank is required with --input"));
    }
    let (a, size_rank) = obtain_matrix(&args.size, &args.input, &args.format, args.seed)?;
    let rank = args
        .rank
        .or(size_rank)
        .ok_or_else(|| usage("--rank is required with --input"))?;

    if args.algo.eq_ignore_ascii_case("grri") {
        let set_x = match &args.constraint_x {
            Some(s) => parse_constraint(s, a.rows())?,
            None => ConstraintSet::NormedNonneg,
        };
        let set_y = match &args.constraint {
            Some(s) => parse_constraint(s, a.cols())?,
            None => ConstraintSet::NormedNonneg,
        };
        let (f, trace) = run_grri(&a, rank, &set_x, &set_y, args.max_sweeps.min(10_000), args.seed)
            .map_err(runtime)?;
        println!(
            "grri x-set={} y-set={} sweeps={} objective={:.6e}",
            set_x.name(),
            set_y.name(),
            trace.len() - 1,
            trace.last().unwrap()
        );
        if let Some(out) = &args.out {
            write_matrix_csv(&f.x, &with_suffix(out, ".x.csv")).map_err(runtime)?;
            write_matrix_csv(&f.y, &with_suffix(out, ".y.csv")).map_err(runtime)?;
            let d = DenseMatrix::from_vec(f.d.len(), 1, f.d.as_slice().to_vec())
                .map_err(runtime)?;
            write_matrix_csv(&d, &with_suffix(out, ".d.csv")).map_err(runtime)?;
            let mut text = String::from("sweep,objective\n");
            for (i, obj) in trace.iter().enumerate() {
                text.push_str(&format!("{i},{obj:.17e}\n"));
            }
            std::fs::write(with_suffix(out, ".trace.csv"), text).map_err(runtime)?;
        }
        return Ok(());
    }

    let algorithm: Algorithm = args.algo.parse().map_err(|e: nmfkit_core::Error| usage(e.to_string()))?;
    let mut cfg = SolverConfig::new(algorithm, rank, args.eps).with_seed(args.seed);
    cfg.damping_psi = args.psi;
    cfg.stop = cfg.stop.with_budgets(args.time_limit, args.max_sweeps);
    let rep = run(&a, &cfg).map_err(runtime)?;
    println!(
        "{} rank={} stop={:?} sweeps={} elapsed={:.3}s objective={:.6e} pgrad-ratio={:.3e} substitutions={}",
        algorithm.name(),
        rank,
        rep.stop_reason,
        rep.sweeps(),
        rep.elapsed_s(),
        rep.final_objective(),
        rep.final_pgrad_ratio(),
        rep.substitutions_used
    );
    if let Some(out) = &args.out {
        write_matrix_csv(&rep.final_factors.u, &with_suffix(out, ".u.csv")).map_err(runtime)?;
        write_matrix_csv(&rep.final_factors.v, &with_suffix(out, ".v.csv")).map_err(runtime)?;
        write_trace_csv(&rep, &with_suffix(out, ".trace.csv"))?;
    }
    Ok(())
}

fn cmd_tensor(args: TensorArgs) -> Result<(), Failure> {
    let mut images = Vec::new();
    for path in &args.inputs {
        images.push(read_pgm(path).map_err(runtime)?);
    }
    let (w, h) = (images[0].width, images[0].height);
    if images.iter().any(|img| img.width != w || img.height != h) {
        return Err(usage("all images must share the same dimensions"));
    }
    // Stack as (height, width, count); PGM rasters are row-major.
    let dims = [h, w, images.len()];
    let mut t = DenseTensor::zeros(&dims);
    for (k, img) in images.iter().enumerate() {
        for row in 0..h {
            for col in 0..w {
                t.set(&[row, col, k], img.pixels[row * w + col]);
            }
        }
    }
    let rep = run_tensor_rri(&t, args.rank, args.sweeps, args.seed).map_err(runtime)?;
    let final_res = rep.trace.last().unwrap().sqrt();
    let rel = final_res / t.norm_fro_sq().sqrt().max(f64::MIN_POSITIVE);
    println!(
        "tensor dims={dims:?} rank={} sweeps={} residual={final_res:.6e} relative={rel:.4e} substitutions={}",
        args.rank,
        rep.trace.len() - 1,
        rep.substitutions_used
    );
    if let Some(out) = &args.out {
        for (mode, f) in rep.kruskal.factors.iter().enumerate() {
            write_matrix_csv(f, &with_suffix(out, &format!(".mode{mode}.csv")))
                .map_err(runtime)?;
        }
        let scales = DenseMatrix::from_vec(
            rep.kruskal.scales.len(),
            1,
            rep.kruskal.scales.as_slice().to_vec(),
        )
        .map_err(runtime)?;
        write_matrix_csv(&scales, &with_suffix(out, ".scales.csv")).map_err(runtime)?;
        let mut text = String::from("sweep,residual_sq\n");
        for (i, r) in rep.trace.iter().enumerate() {
            text.push_str(&format!("{i},{r:.17e}\n"));
        }
        std::fs::write(with_suffix(out, ".trace.csv"), text).map_err(runtime)?;
    }
    Ok(())
}

fn cmd_smooth(args: SmoothArgs) -> Result<(), Failure> {
    let deltas = parse_f64_list(&args.delta, "--delta")?;
    if deltas.iter().any(|d| *d < 0.0) {
        return Err(usage("smoothness weights must be nonnegative"));
    }
    let outcomes = run_smooth_experiment(
        &deltas,
        args.points,
        args.mixtures,
        args.noise,
        args.sweeps,
        args.seed,
    )
    .map_err(runtime)?;
    println!("{:>10} {:>16} {:>20}", "delta", "recon-rel-err", "second-diff-energy");
    let mut text = String::from("delta,recon_rel_err,second_diff_energy\n");
    for o in &outcomes {
        println!(
            "{:>10} {:>16.6e} {:>20.6e}",
            o.delta, o.recon_rel_err, o.second_diff_energy
        );
        text.push_str(&format!(
            "{},{:.17e},{:.17e}\n",
            o.delta, o.recon_rel_err, o.second_diff_energy
        ));
    }
    if let Some(out) = &args.out {
        std::fs::write(out, text).map_err(runtime)?;
    }
    Ok(())
}

fn cmd_baseline(args: BaselineArgs) -> Result<(), Failure> {
    let a = match (&args.size, &args.input) {
        (Some(_), Some(_)) => return Err(usage("--size and --input are mutually exclusive")),
        (Some(s), None) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 2 {
                return Err(usage("baseline --size expects m,n"));
            }
            let m: usize = parts[0].trim().parse().map_err(|_| usage("bad size"))?;
            let n: usize = parts[1].trim().parse().map_err(|_| usage("bad size"))?;
            gen_random_instance(m, n, args.seed)
        }
        (None, Some(path)) => {
            let fmt: MatrixFormat = args.format.parse().map_err(usage)?;
            load_matrix(path, fmt).map_err(runtime)?
        }
        (None, None) => return Err(usage("one of --size or --input is required")),
    };
    let s = svd::svd(&a).map_err(runtime)?;
    let r = args.rank;
    let ar = svd::truncate(&s, r).map_err(|e| usage(e.to_string()))?;
    let err_tr = a.sub(&ar).map_err(runtime)?.norm_fro();
    let (arp, err_plus) = svd::nonneg_part_baseline(&a, r).map_err(runtime)?;
    let leading: Vec<String> = s
        .singulars
        .iter()
        .take(r.min(6))
        .map(|x| format!("{x:.6e}"))
        .collect();
    println!(
        "size={}x{} rank={r} sigma=[{}] trunc-error={err_tr:.6e} nonneg-part-error={err_plus:.6e}",
        a.rows(),
        a.cols(),
        leading.join(", ")
    );
    if let Some(out) = &args.out {
        write_matrix_csv(&arp, out).map_err(runtime)?;
    }
    Ok(())
}
