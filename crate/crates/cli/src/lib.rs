//! Command-line driver: CSV ingestion, TOML configuration, and JSON/text
//! reports for the revenue-forecasting pipelines in `fiscast_core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, run_command, Command, Outcome};
pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use ingest::{ingest_csv, parse_series, read_series};
pub use report::Report;

#[derive(Debug, Parser)]
#[command(name = "fiscast", version, about = "Tax-revenue forecasting diagnostics and reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Unit-root and cointegration tests on the training sample.
    Diagnose(RunArgs),
    /// Correlation strength and significance of each predictor.
    Screen(RunArgs),
    /// Fit every candidate transform and select one.
    Fit(RunArgs),
    /// Forecast the years after the target's last observation.
    Forecast(RunArgs),
    /// Error measures on the holdout.
    Evaluate(RunArgs),
    /// Baseline versus proposed forecasts on the holdout.
    Compare(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// HP smoothing parameter.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of final years held out for testing.
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl CommandArgs {
    pub fn split(&self) -> (Command, &RunArgs) {
        match self {
            CommandArgs::Diagnose(a) => (Command::Diagnose, a),
            CommandArgs::Screen(a) => (Command::Screen, a),
            CommandArgs::Fit(a) => (Command::Fit, a),
            CommandArgs::Forecast(a) => (Command::Forecast, a),
            CommandArgs::Evaluate(a) => (Command::Evaluate, a),
            CommandArgs::Compare(a) => (Command::Compare, a),
        }
    }
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            hp_lambda: self.lambda,
            holdout_years: self.holdout,
            output_dir: self.output.clone(),
        }
    }
}
