//! Command-line front end: `simulate`, `predict` and `report`.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage or
//! configuration error.

mod manifest;
mod predict;
mod report;
mod simulate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ModeKind, NonconformityKey, PredictorKind};
use crate::error::Error;
use crate::ite::CombineRule;

pub use manifest::RunManifest;
pub use report::REFERENCE_LENGTH;
pub use simulate::RESULTS_HEADER;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ite-conformal", version, about = "Conformal prediction intervals for individual treatment effects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Monte Carlo study over a scenario grid.
    Simulate(SimulateArgs),
    /// Fit on a training CSV and print ITE intervals for probe rows.
    Predict(PredictArgs),
    /// Turn a results CSV into one coverage and one length table per DGP.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Scenario filter, e.g. `method=LM2,regression=F1`.
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    /// Fill the runtime_s column (makes the CSV run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training data with header `x1,...,xd,t,y`.
    #[arg(long)]
    pub train: PathBuf,
    /// Probe covariates with header `x1,...,xd`.
    #[arg(long)]
    pub probes: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    pub rule: Option<CombineRule>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub predictor: Option<PredictorArg>,
    #[arg(long, value_enum)]
    pub nonconformity: Option<NonconformityArg>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub split_frac: Option<f64>,
    /// Seed for network training.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results CSV written by `simulate`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value = "report")]
    pub out_dir: PathBuf,
    /// Miscoverage level used for the nominal reference line.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModeArg {
    Full,
    Split,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PredictorArg {
    Zero,
    Ols,
    Kernel,
    Nn,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum NonconformityArg {
    Abs,
    Std,
}

impl From<ModeArg> for ModeKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => ModeKind::Full,
            ModeArg::Split => ModeKind::Split,
        }
    }
}

impl From<PredictorArg> for PredictorKind {
    fn from(p: PredictorArg) -> Self {
        match p {
            PredictorArg::Zero => PredictorKind::Zero,
            PredictorArg::Ols => PredictorKind::Ols,
            PredictorArg::Kernel => PredictorKind::Kernel,
            PredictorArg::Nn => PredictorKind::Nn,
        }
    }
}

impl From<NonconformityArg> for NonconformityKey {
    fn from(k: NonconformityArg) -> Self {
        match k {
            NonconformityArg::Abs => NonconformityKey::Abs,
            NonconformityArg::Std => NonconformityKey::Std,
        }
    }
}

fn parse_rule(s: &str) -> Result<CombineRule, String> {
    s.parse()
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

/// Input parsing problems are usage errors; everything else is a runtime failure.
fn input_error(e: Error) -> CliError {
    match e {
        Error::Parse { .. } | Error::InvalidDataset(_) | Error::DimensionMismatch { .. } | Error::Csv(_) => {
            CliError::Usage(e.to_string())
        }
        Error::Io(ref io) if io.kind() == std::io::ErrorKind::NotFound => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(runtime)
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("ITE_LOG", "info");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate::cmd_simulate(&a),
        Command::Predict(a) => predict::cmd_predict(&a),
        Command::Report(a) => report::cmd_report(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
