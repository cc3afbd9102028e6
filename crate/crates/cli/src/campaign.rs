//! Multi-solver benchmark campaigns.
//!
//! A campaign runs every configured algorithm from the same starting point on
//! each (matrix, start, tolerance) combination, records one row per run, and
//! aggregates success counts and mean successful running times into a table
//! with one row per (size, tolerance) and one column per algorithm.

use crate::gen::gen_random_instance;
use nmfkit_core::error::{Error, Result};
use nmfkit_core::model::init_scaled;
use nmfkit_core::rng::mix64;
use nmfkit_core::solvers::{run_from, Algorithm, SolverConfig, StopReason};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Campaign description: sizes, tolerances, instance counts, algorithms,
/// budgets, and the master seed everything derives from.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub sizes: Vec<(usize, usize, usize)>,
    pub epsilons: Vec<f64>,
    pub n_matrices: usize,
    pub n_starts: usize,
    pub algorithms: Vec<Algorithm>,
    pub time_limit_s: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Campaign {
    pub fn validate(&self) -> Result<()> {
        let ok = !self.sizes.is_empty()
            && !self.algorithms.is_empty()
            && self.n_matrices >= 1
            && self.n_starts >= 1
            && self.time_limit_s > 0.0
            && self.max_sweeps >= 1
            && !self.epsilons.is_empty()
            && self.epsilons.iter().all(|e| (0.0..1.0).contains(e) && *e > 0.0)
            && self.sizes.iter().all(|&(m, n, r)| {
                m >= 1 && n >= 1 && r >= 1 && r <= m.min(n)
            });
        if !ok {
            return Err(Error::InvalidArg {
                msg: "campaign parameters out of range".into(),
            });
        }
        Ok(())
    }

    /// Seed for matrix `matrix_id` of a given size slot.
    pub fn matrix_seed(&self, size_idx: usize, matrix_id: usize) -> u64 {
        self.seed ^ mix64(((size_idx as u64) << 32) | (matrix_id as u64 + 1))
    }

    /// Seed for the starting point `start_id` on that matrix.
    pub fn start_seed(&self, size_idx: usize, matrix_id: usize, start_id: usize) -> u64 {
        self.seed ^ mix64(self.matrix_seed(size_idx, matrix_id) ^ (start_id as u64 + 1))
    }
}

/// One solver run inside a campaign.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub epsilon: f64,
    pub matrix_id: usize,
    pub start_id: usize,
    pub algorithm: String,
    pub succeeded: bool,
    pub elapsed_s: f64,
    pub sweeps: usize,
    pub final_objective: f64,
    pub final_pgrad_ratio: f64,
}

/// Run the full campaign grid. Records come out in deterministic
/// (size, matrix, start, epsilon, algorithm) order.
pub fn run_campaign(c: &Campaign) -> Result<Vec<RunRecord>> {
    c.validate()?;
    let mut records = Vec::new();
    for (size_idx, &(m, n, r)) in c.sizes.iter().enumerate() {
        for matrix_id in 0..c.n_matrices {
            let a = gen_random_instance(m, n, c.matrix_seed(size_idx, matrix_id));
            for start_id in 0..c.n_starts {
                let start = init_scaled(&a, r, c.start_seed(size_idx, matrix_id, start_id))?;
                for &epsilon in &c.epsilons {
                    for &algorithm in &c.algorithms {
                        let mut cfg = SolverConfig::new(algorithm, r, epsilon);
                        cfg.stop = cfg.stop.with_budgets(c.time_limit_s, c.max_sweeps);
                        let rep = run_from(&a, &cfg, &start)?;
                        records.push(RunRecord {
                            m,
                            n,
                            r,
                            epsilon,
                            matrix_id,
                            start_id,
                            algorithm: algorithm.name().to_string(),
                            succeeded: rep.stop_reason == StopReason::Criterion,
                            elapsed_s: rep.elapsed_s(),
                            sweeps: rep.sweeps(),
                            final_objective: rep.final_objective(),
                            final_pgrad_ratio: rep.final_pgrad_ratio(),
                        });
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Aggregate of one (size, epsilon, algorithm) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryCell {
    pub successes: usize,
    pub total: usize,
    pub mean_elapsed_s: f64,
}

pub fn summarize_cell(records: &[RunRecord]) -> SummaryCell {
    let successes: Vec<&RunRecord> = records.iter().filter(|r| r.succeeded).collect();
    let mean = if successes.is_empty() {
        f64::NAN
    } else {
        successes.iter().map(|r| r.elapsed_s).sum::<f64>() / successes.len() as f64
    };
    SummaryCell {
        successes: successes.len(),
        total: records.len(),
        mean_elapsed_s: mean,
    }
}

/// Table-cell text: `mean(successes)`, or `T*(0)` when nothing succeeded
/// within the time limit `T`.
pub fn format_cell(cell: &SummaryCell, time_limit_s: f64) -> String {
    if cell.successes == 0 {
        format!("{}*(0)", trim_float(time_limit_s))
    } else {
        format!("{:.2}({})", cell.mean_elapsed_s, cell.successes)
    }
}

fn trim_float(x: f64) -> String {
    if x == x.trunc() {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Render the summary table: one section per size, one row per tolerance,
/// one column per algorithm.
pub fn render_table(c: &Campaign, records: &[RunRecord]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>10}", "eps");
    for algo in &c.algorithms {
        let _ = write!(out, "{:>14}", algo.name());
    }
    out.push('\n');
    for &(m, n, r) in &c.sizes {
        let _ = writeln!(out, "--- m = {m}, n = {n}, r = {r} ---");
        for &eps in &c.epsilons {
            let _ = write!(out, "{:>10.0e}", eps);
            for algo in &c.algorithms {
                let cell: Vec<RunRecord> = records
                    .iter()
                    .filter(|rec| {
                        rec.m == m
                            && rec.n == n
                            && rec.r == r
                            && rec.epsilon == eps
                            && rec.algorithm == algo.name()
                    })
                    .cloned()
                    .collect();
                let _ = write!(out, "{:>14}", format_cell(&summarize_cell(&cell), c.time_limit_s));
            }
            out.push('\n');
        }
    }
    out
}

/// Record emission formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Json,
}

impl std::str::FromStr for RecordFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RecordFormat::Csv),
            "json" => Ok(RecordFormat::Json),
            other => Err(format!("unknown record format '{other}'")),
        }
    }
}

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "m,n,r,epsilon,matrix_id,start_id,algorithm,succeeded,elapsed_s,sweeps,final_objective,final_pgrad_ratio\n",
    );
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{},{},{},{:.6e},{},{:.17e},{:.17e}",
            rec.m,
            rec.n,
            rec.r,
            rec.epsilon,
            rec.matrix_id,
            rec.start_id,
            rec.algorithm,
            rec.succeeded,
            rec.elapsed_s,
            rec.sweeps,
            rec.final_objective,
            rec.final_pgrad_ratio
        );
    }
    out
}

pub fn emit_records(
    records: &[RunRecord],
    format: RecordFormat,
    path: &Path,
) -> std::io::Result<()> {
    let text = match format {
        RecordFormat::Csv => records_to_csv(records),
        RecordFormat::Json => serde_json::to_string_pretty(records).expect("serializable"),
    };
    std::fs::write(path, text)
}
