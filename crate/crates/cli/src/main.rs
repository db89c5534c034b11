//! Command-line driver: generate datasets, fit models, scan loss
//! landscapes, decompose saved models, and run the pinned benchmarks.
//!
//! Exit codes: 0 success, 1 benchmark failure, 2 configuration error,
//! 3 simulation blow-up, 4 optimization divergence (history still written).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file, or input files (exit 2).
    Config(String),
    /// A simulated state left the finite range (exit 3).
    BlowUp(String),
    /// The optimizer diverged; partial history is on disk (exit 4).
    Diverged(String),
    /// One or more benchmark checks failed (exit 1).
    Benchmark(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Benchmark(_) => 1,
            CliError::Config(_) => 2,
            CliError::BlowUp(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::BlowUp(m)
            | CliError::Diverged(m)
            | CliError::Benchmark(m) => m,
        }
    }
}

impl From<dyndict::simulate::SimulateError> for CliError {
    fn from(e: dyndict::simulate::SimulateError) -> Self {
        match e {
            dyndict::simulate::SimulateError::BlowUp { .. } => CliError::BlowUp(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<dyndict::model_io::ModelIoError> for CliError {
    fn from(e: dyndict::model_io::ModelIoError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<dyndict::dictionary::DictionaryError> for CliError {
    fn from(e: dyndict::dictionary::DictionaryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<dyndict::koopman::KoopmanError> for CliError {
    fn from(e: dyndict::koopman::KoopmanError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<dyndict::sysid::SysidError> for CliError {
    fn from(e: dyndict::sysid::SysidError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dyndict",
    version,
    about = "Learn dynamical systems with trainable dictionaries",
    propagate_version = true
)]
struct Cli {
    /// TOML configuration file; command-line flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed (overrides the config file and preset defaults)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default `out`)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Print resolved settings and extra progress detail
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by the data-facing subcommands.
#[derive(Args, Debug, Default)]
pub struct CommonFlags {
    /// System preset (`ou`, `triple-well`, `chua`, `heat`) or `file:<path>`
    #[arg(long)]
    pub system: Option<String>,

    /// Drift / system strength parameter (ou, chua)
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Inverse temperature or second system parameter (ou, triple-well, chua)
    #[arg(long)]
    pub beta: Option<f64>,

    /// Lag time between snapshot pairs (ou, triple-well)
    #[arg(long)]
    pub tau: Option<f64>,

    /// Integration step size (ou, triple-well, chua)
    #[arg(long)]
    pub eta: Option<f64>,

    /// Number of snapshot pairs (ou, triple-well)
    #[arg(long)]
    pub m: Option<usize>,

    /// Input dataset path; named systems generate in memory when omitted
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct FitFlags {
    #[command(flatten)]
    pub common: CommonFlags,

    /// Fit kind: `edmd`, `sindy`, or `pdefind` (default depends on system)
    #[arg(long)]
    pub kind: Option<String>,

    /// Optimizer step size
    #[arg(long)]
    pub step_size: Option<f64>,

    /// Optimizer iteration cap
    #[arg(long)]
    pub max_iters: Option<usize>,

    /// Mini-batch size per iteration: `full` or a positive integer
    #[arg(long)]
    pub batch: Option<String>,

    /// Stop when the combined update norm falls below this
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Relative cut for coefficient thresholding (sindy/pdefind)
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Starting sine frequency for the chua preset
    #[arg(long)]
    pub w1_init: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ScanFlags {
    #[command(flatten)]
    pub common: CommonFlags,

    /// Parameter to sweep: flat index, `w<k>` for the k-th trainable slot,
    /// or `chi` for the shared library exponent
    #[arg(long)]
    pub param: Option<String>,

    /// Lower end of the sweep
    #[arg(long)]
    pub lo: Option<f64>,

    /// Upper end of the sweep
    #[arg(long)]
    pub hi: Option<f64>,

    /// Number of evenly spaced sweep values (1 records a single row)
    #[arg(long)]
    pub resolution: Option<usize>,

    /// Starting sine frequency for the chua preset
    #[arg(long)]
    pub w1_init: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SpectrumFlags {
    /// Saved model file to decompose
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Eigenfunction grid lower end (1-D dictionaries)
    #[arg(long)]
    pub grid_lo: Option<f64>,

    /// Eigenfunction grid upper end (1-D dictionaries)
    #[arg(long)]
    pub grid_hi: Option<f64>,

    /// Number of eigenfunction grid points
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BenchmarkFlags {
    /// Run a single benchmark (`ou`, `triple-well`, `chua`, `heat`)
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a dataset for a named system and write it to disk
    Simulate(CommonFlags),
    /// Fit a model and write it plus per-iteration history and reports
    Fit(FitFlags),
    /// Sweep one trainable parameter, solving coefficients in closed form
    Scan(ScanFlags),
    /// Decompose a saved model into eigenvalues and eigenfunctions
    Spectrum(SpectrumFlags),
    /// Run the pinned reproducibility benchmarks
    Benchmark(BenchmarkFlags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_cfg = match config::FileConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let ctx = commands::Ctx {
        cfg: file_cfg,
        seed: cli.seed,
        out: cli.out,
        verbose: cli.verbose,
    };
    let result = match &cli.cmd {
        Cmd::Simulate(flags) => commands::simulate(&ctx, flags),
        Cmd::Fit(flags) => commands::fit(&ctx, flags),
        Cmd::Scan(flags) => commands::scan(&ctx, flags),
        Cmd::Spectrum(flags) => commands::spectrum(&ctx, flags),
        Cmd::Benchmark(flags) => commands::benchmark(&ctx, flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
