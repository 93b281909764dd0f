//! Seeded Monte-Carlo harness for the swap heuristic.
//!
//! Each trial draws a random cone and point from a seed derived from
//! `(master_seed, n, trial_index)`, so results do not depend on scheduling.
//! Trials run in parallel; aggregation happens afterwards in trial order.
//!
//! Iteration columns in the summary count *swap rounds*: decompose rounds that
//! moved at least one index. The per-run `iterations` counter additionally
//! includes the final round that certifies convergence.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{SimplicialCone, DEFAULT_BUILD_TOL};
use crate::error::{Error, Result};
use crate::heuristic::{heuristic_project, HeuristicConfig, HeuristicResult, RunStats, Status};
use crate::io::fmt_f64;

/// Fresh draws allowed before a singular generator matrix is an error.
pub const MAX_CONE_ATTEMPTS: usize = 100;

const Z95: f64 = 1.96;

pub const SUMMARY_HEADER: [&str; 11] = [
    "size",
    "trials",
    "mean_changes",
    "ci_changes",
    "mean_iterations",
    "ci_iterations",
    "pct_increase",
    "ci_increase",
    "pct_loops",
    "max_iterations",
    "excluded_loops",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorDistribution {
    #[default]
    StandardNormal,
    /// Uniform on `(-1, 1)`.
    Uniform,
}

impl FromStr for GeneratorDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "standard-normal" | "gaussian" => Ok(Self::StandardNormal),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown distribution {other:?} (expected normal or uniform)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointDistribution {
    #[default]
    StandardNormal,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub trials_per_size: usize,
    pub master_seed: u64,
    pub generator_distribution: GeneratorDistribution,
    pub point_distribution: PointDistribution,
    pub heuristic: HeuristicConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 3, 5, 10],
            trials_per_size: 1000,
            master_seed: 0,
            generator_distribution: GeneratorDistribution::default(),
            point_distribution: PointDistribution::default(),
            heuristic: HeuristicConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("at least one size is required".into()));
        }
        if let Some(&bad) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidConfig(format!("sizes must be positive, got {bad}")));
        }
        if self.trials_per_size == 0 {
            return Err(Error::InvalidConfig("trials_per_size must be at least 1".into()));
        }
        self.heuristic.validate()
    }
}

/// One trial's outcome, as written to the detail CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub size: usize,
    pub trial_index: u64,
    pub status: TrialStatus,
    pub iterations: usize,
    pub swap_iterations: usize,
    pub total_changes: usize,
    pub increase_iterations: usize,
    #[serde(rename = "loop")]
    pub loop_detected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialStatus {
    Converged,
    LoopAborted,
    IterationBudgetExhausted,
}

impl From<Status> for TrialStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => Self::Converged,
            Status::LoopAborted => Self::LoopAborted,
            Status::IterationBudgetExhausted => Self::IterationBudgetExhausted,
        }
    }
}

impl TrialRecord {
    fn new(size: usize, trial_index: u64, status: Status, stats: &RunStats) -> Self {
        Self {
            size,
            trial_index,
            status: status.into(),
            iterations: stats.iterations,
            swap_iterations: stats.swap_rounds(),
            total_changes: stats.total_changes,
            increase_iterations: stats.increase_iterations,
            loop_detected: status == Status::LoopAborted,
        }
    }
}

/// Per-size aggregate. Loop-aborted and budget-exhausted trials count toward
/// `pct_loops`/`trials` only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeAggregate {
    pub size: usize,
    pub trials: usize,
    pub mean_changes: f64,
    pub ci_changes: f64,
    pub mean_iterations: f64,
    pub ci_iterations: f64,
    /// Increase rounds as a percentage of swap rounds, pooled over included trials.
    pub pct_increase: f64,
    pub ci_increase: f64,
    pub pct_loops: f64,
    pub max_iterations: usize,
    pub excluded_loops: usize,
    pub excluded_budget: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub aggregates: Vec<SizeAggregate>,
    pub trials: Vec<TrialRecord>,
}

/// Mixes the master seed, size and trial index into an independent stream seed.
pub fn trial_seed(master_seed: u64, n: usize, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n as u64) ^ trial_index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A random simplicial cone with i.i.d. generator entries.
pub fn random_cone(n: usize, distribution: GeneratorDistribution, seed: u64) -> Result<SimplicialCone> {
    sample_cone(n, distribution, &mut ChaCha8Rng::seed_from_u64(seed)).map(|(cone, _)| cone)
}

/// Draws until the matrix is invertible; also returns the number of rejected draws.
pub fn sample_cone<R: Rng>(n: usize, distribution: GeneratorDistribution, rng: &mut R) -> Result<(SimplicialCone, usize)> {
    if n == 0 {
        return Err(Error::InvalidConfig("cone dimension must be positive".into()));
    }
    for attempt in 0..MAX_CONE_ATTEMPTS {
        let entries: Vec<f64> = match distribution {
            GeneratorDistribution::StandardNormal => (0..n * n).map(|_| rng.sample(StandardNormal)).collect(),
            GeneratorDistribution::Uniform => {
                let u = Uniform::new(-1.0, 1.0).expect("valid range");
                (0..n * n).map(|_| u.sample(rng)).collect()
            }
        };
        if let Ok(cone) = SimplicialCone::new(DMatrix::from_vec(n, n, entries), DEFAULT_BUILD_TOL) {
            return Ok((cone, attempt));
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_CONE_ATTEMPTS,
    })
}

/// The cone and point of trial `trial_index` at size `n`.
pub fn sample_instance(n: usize, trial_index: u64, config: &ExperimentConfig) -> Result<(SimplicialCone, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.master_seed, n, trial_index));
    let (cone, _) = sample_cone(n, config.generator_distribution, &mut rng)?;
    let point = match config.point_distribution {
        PointDistribution::StandardNormal => DVector::from_fn(n, |_, _| rng.sample(StandardNormal)),
    };
    Ok((cone, point))
}

/// Runs the heuristic on one trial and returns the full result.
pub fn run_trial_result(n: usize, trial_index: u64, config: &ExperimentConfig) -> Result<HeuristicResult> {
    let (cone, point) = sample_instance(n, trial_index, config)?;
    heuristic_project(&cone, &point, &config.heuristic)
}

pub fn run_trial(n: usize, trial_index: u64, config: &ExperimentConfig) -> Result<RunStats> {
    run_trial_result(n, trial_index, config).map(|r| r.stats)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SizeAggregate>> {
    run_experiment_detailed(config).map(|o| o.aggregates)
}

pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut aggregates = Vec::with_capacity(config.sizes.len());
    let mut trials = Vec::with_capacity(config.sizes.len() * config.trials_per_size);
    for &n in &config.sizes {
        let records = (0..config.trials_per_size as u64)
            .into_par_iter()
            .map(|t| {
                let r = run_trial_result(n, t, config)?;
                Ok(TrialRecord::new(n, t, r.status, &r.stats))
            })
            .collect::<Result<Vec<_>>>()?;
        aggregates.push(aggregate(n, &records));
        trials.extend(records);
    }
    Ok(ExperimentOutput { aggregates, trials })
}

/// Folds one size's trial records into a summary row.
pub fn aggregate(size: usize, records: &[TrialRecord]) -> SizeAggregate {
    let included: Vec<&TrialRecord> = records.iter().filter(|r| r.status == TrialStatus::Converged).collect();
    let loops = records.iter().filter(|r| r.status == TrialStatus::LoopAborted).count();
    let budget = records
        .iter()
        .filter(|r| r.status == TrialStatus::IterationBudgetExhausted)
        .count();

    let changes: Vec<f64> = included.iter().map(|r| r.total_changes as f64).collect();
    let iterations: Vec<f64> = included.iter().map(|r| r.swap_iterations as f64).collect();
    let (mean_changes, ci_changes) = mean_ci(&changes);
    let (mean_iterations, ci_iterations) = mean_ci(&iterations);

    let rounds: usize = included.iter().map(|r| r.swap_iterations).sum();
    let increases: usize = included.iter().map(|r| r.increase_iterations).sum();
    let (pct_increase, ci_increase) = if rounds == 0 {
        (0.0, 0.0)
    } else {
        let p = increases as f64 / rounds as f64;
        (100.0 * p, 100.0 * Z95 * (p * (1.0 - p) / rounds as f64).sqrt())
    };

    SizeAggregate {
        size,
        trials: records.len(),
        mean_changes,
        ci_changes,
        mean_iterations,
        ci_iterations,
        pct_increase,
        ci_increase,
        pct_loops: if records.is_empty() {
            0.0
        } else {
            100.0 * loops as f64 / records.len() as f64
        },
        max_iterations: included.iter().map(|r| r.swap_iterations).max().unwrap_or(0),
        excluded_loops: loops,
        excluded_budget: budget,
    }
}

/// Sample mean and the half-width `1.96 * s / sqrt(m)`.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, Z95 * var.sqrt() / m.sqrt())
}

pub fn write_summary_csv<W: Write>(out: W, aggregates: &[SizeAggregate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for a in aggregates {
        w.write_record([
            a.size.to_string(),
            a.trials.to_string(),
            fmt_f64(a.mean_changes),
            fmt_f64(a.ci_changes),
            fmt_f64(a.mean_iterations),
            fmt_f64(a.ci_iterations),
            fmt_f64(a.pct_increase),
            fmt_f64(a.ci_increase),
            fmt_f64(a.pct_loops),
            a.max_iterations.to_string(),
            a.excluded_loops.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_detail_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_detail_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Summary CSV text, plus detail CSV text when per-trial records are given.
pub fn emit_csv(aggregates: &[SizeAggregate], details: Option<&[TrialRecord]>) -> Result<(String, Option<String>)> {
    if aggregates.is_empty() {
        return Err(Error::InvalidConfig("no aggregates to emit".into()));
    }
    let mut summary = Vec::new();
    write_summary_csv(&mut summary, aggregates)?;
    let detail = details
        .map(|records| {
            let mut buf = Vec::new();
            write_detail_csv(&mut buf, records).map(|_| buf)
        })
        .transpose()?;
    let text = |b: Vec<u8>| String::from_utf8(b).expect("csv output is utf-8");
    Ok((text(summary), detail.map(text)))
}

/// Aligned human-readable summary table.
pub fn format_table(aggregates: &[SizeAggregate]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>7} {:>18} {:>16} {:>18} {:>9} {:>8} {:>6}",
        "size", "trials", "changes", "iterations", "increases [%]", "loops [%]", "max iter", "loops"
    );
    for a in aggregates {
        let _ = writeln!(
            s,
            "{:>5} {:>7} {:>18} {:>16} {:>18} {:>9.3} {:>8} {:>6}",
            a.size,
            a.trials,
            format!("{:.2} ± {:.2}", a.mean_changes, a.ci_changes),
            format!("{:.2} ± {:.2}", a.mean_iterations, a.ci_iterations),
            format!("{:.1} ± {:.1}", a.pct_increase, a.ci_increase),
            a.pct_loops,
            a.max_iterations,
            a.excluded_loops,
        );
    }
    s
}
