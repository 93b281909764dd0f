//! `simcone` command-line front end. The only module that touches files.
//!
//! Exit codes: 0 success, 1 computation failure (loop, budget, failed
//! certificate), 2 usage or input error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::cone::{SimplicialCone, DEFAULT_BUILD_TOL};
use crate::error::Error;
use crate::exact::{exact_project, exact_project_subdual, DEFAULT_MAX_DIM, HARD_MAX_DIM};
use crate::experiment::{format_table, run_experiment_detailed, write_detail_csv, write_summary_csv, ExperimentConfig, GeneratorDistribution};
use crate::heuristic::{heuristic_project, HeuristicConfig, InitialSet, Status};
use crate::io::{read_matrix, read_vector, write_matrix, write_vector};
use crate::verify::moreau_check;
use crate::DEFAULT_REL_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "simcone", version, about = "Projection onto simplicial cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a point with the swap heuristic.
    Project(ProjectArgs),
    /// Project a point by exhaustive sector search (exponential in n).
    Oracle(OracleArgs),
    /// Print the polar matrix U = -(E^-1)^T.
    Polar {
        /// Generator matrix CSV (columns are generators).
        cone: PathBuf,
    },
    /// Check a candidate projection against the Moreau conditions.
    Check(CheckArgs),
    /// Run the Monte-Carlo experiment and print the summary table.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub cone: PathBuf,
    pub point: PathBuf,
    /// Relative sign tolerance, scaled by 1 + |x|.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Start::All)]
    pub start: Start,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub cone: PathBuf,
    pub point: PathBuf,
    /// Relative sign tolerance, scaled by 1 + |x|.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Largest dimension accepted for the 2^n search.
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub guard: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub cone: PathBuf,
    pub point: PathBuf,
    pub projection: PathBuf,
    /// Relative tolerance, scaled by 1 + |x|.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Comma-separated cone dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "normal")]
    pub dist: GeneratorDistribution,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long = "out-summary")]
    pub out_summary: Option<PathBuf>,
    #[arg(long = "out-detail")]
    pub out_detail: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Start {
    All,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A failed command: exit code plus a one-line diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolveFailure { .. } | Error::NoSectorFound | Error::Inaccurate { .. } | Error::GenerationFailure { .. } => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Project(a) => cmd_project(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Polar { cone } => cmd_polar(&cone, out),
        Command::Check(a) => cmd_check(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
    }
}

fn load_cone(path: &Path) -> Result<SimplicialCone, Failure> {
    let m = read_matrix(path)?;
    SimplicialCone::new(m, DEFAULT_BUILD_TOL).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_point(path: &Path, n: usize) -> Result<DVector<f64>, Failure> {
    let x = read_vector(path)?;
    if x.len() != n {
        return Err(Failure::usage(format!(
            "{}: has {} rows but the cone dimension is {n}",
            path.display(),
            x.len()
        )));
    }
    Ok(x)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn cmd_project(a: &ProjectArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cone = load_cone(&a.cone)?;
    let x = load_point(&a.point, cone.dim())?;
    let config = HeuristicConfig {
        sign_tol: a.tol,
        max_iterations: a.max_iter,
        max_restarts: a.restarts,
        restart_seed: a.seed,
        initial_set: match a.start {
            Start::All => InitialSet::AllGenerators,
            Start::Random => InitialSet::Random,
        },
    };
    let result = heuristic_project(&cone, &x, &config)?;
    match a.format {
        Format::Json => write_json(out, &result)?,
        Format::Csv => write_vector(&mut *out, &result.projection)?,
    }
    Ok(if result.status == Status::Converged {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

#[derive(Serialize)]
struct OracleReport {
    #[serde(flatten)]
    result: crate::exact::ExactResult,
    pruned: bool,
}

pub fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cone = load_cone(&a.cone)?;
    let x = load_point(&a.point, cone.dim())?;
    let guard = a.guard.min(HARD_MAX_DIM);
    if cone.dim() > guard {
        return Err(Failure::usage(format!(
            "dimension {} exceeds the guard {guard}; the exhaustive search solves 2^{} systems (raise --guard, at most {HARD_MAX_DIM})",
            cone.dim(),
            cone.dim()
        )));
    }
    let tol = a.tol * (1.0 + x.norm());
    let pruned = cone.is_subdual();
    let result = if pruned {
        exact_project_subdual(&cone, &x, tol, guard)?
    } else {
        exact_project(&cone, &x, tol, guard)?
    };
    write_json(out, &OracleReport { result, pruned })?;
    Ok(EXIT_OK)
}

pub fn cmd_polar(cone: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let cone = load_cone(cone)?;
    write_matrix(out, cone.polar_generators())?;
    Ok(EXIT_OK)
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cone = load_cone(&a.cone)?;
    let x = load_point(&a.point, cone.dim())?;
    let p = load_point(&a.projection, cone.dim())?;
    let cert = moreau_check(&cone, &x, &p, a.tol * (1.0 + x.norm()))?;
    write_json(out, &cert)?;
    Ok(if cert.passed { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = ExperimentConfig {
        sizes: a.sizes.clone(),
        trials_per_size: a.trials,
        master_seed: a.seed,
        generator_distribution: a.dist,
        heuristic: HeuristicConfig {
            max_iterations: a.max_iter,
            max_restarts: a.restarts,
            restart_seed: a.seed,
            ..HeuristicConfig::default()
        },
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let output = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::usage(e.to_string()))?
            .install(|| run_experiment_detailed(&config))?,
        None => run_experiment_detailed(&config)?,
    };
    if let Some(path) = &a.out_summary {
        write_summary_csv(BufWriter::new(create(path)?), &output.aggregates)?;
    }
    if let Some(path) = &a.out_detail {
        write_detail_csv(BufWriter::new(create(path)?), &output.trials)?;
    }
    write!(out, "{}", format_table(&output.aggregates))?;
    Ok(EXIT_OK)
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}
