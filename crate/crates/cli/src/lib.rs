//! Command-line driver: synthesize or ingest data, classify days, train and
//! run the ensemble, and produce the benchmark and experiment reports.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{DataSection, EvaluationSection, RunConfig, SynthSection};
pub use output::{Manifest, OutputDir};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(config::single_line(&e.to_string()))
            }
        }
    )*};
}

data_error!(
    pvnne::dataio::DataError,
    pvnne::ensemble::EnsembleError,
    pvnne::evaluation::EvalError,
    pvnne::synth::SynthError,
    pvnne::sky::SkyError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pvnne", version, about = "Day-ahead PV forecasting with wavelet neural-network ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Resample to this many minutes.
    #[arg(long, global = true, value_parser = parse_resolution)]
    pub resolution: Option<u32>,
    /// Target day (YYYY-MM-DD).
    #[arg(long, global = true)]
    pub day: Option<NaiveDate>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Measurement CSV; overrides `data.path`.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Trained model file for `forecast`; defaults to `<out>/model.json`.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a synthetic year of PV and weather data.
    Synth,
    /// Clean, gap-fill and resample a measurement file.
    Ingest,
    /// Clearness-index class of every day.
    Classify,
    /// Train the ensemble for one target day.
    Train,
    /// Forecast one day with a trained model.
    Forecast,
    /// Compare the ensemble with the five baseline models.
    Evaluate,
    /// Ensemble accuracy at several data resolutions.
    ExperimentResolution,
    /// Ensemble accuracy for several training-window lengths.
    ExperimentLength,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Classify => "classify",
            Command::Train => "train",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::ExperimentResolution => "experiment-resolution",
            Command::ExperimentLength => "experiment-length",
        }
    }
}

fn parse_resolution(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(r @ (1 | 15 | 30 | 60)) => Ok(r),
        _ => Err(format!("resolution must be one of 1, 15, 30, 60 (got {s})")),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| commands::dispatch(cli))
}
