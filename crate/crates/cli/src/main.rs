//! `dosebandit` — validate patient tables, replay dosing-policy experiments,
//! and generate synthetic datasets.
//!
//! Exit codes: 0 success, 1 user/config error, 2 data error, 3 internal
//! numeric error.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Data(_) => 2,
            AppError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Data(m) | AppError::Numeric(m) => m,
        }
    }
}

impl From<config::ConfigError> for AppError {
    fn from(e: config::ConfigError) -> Self {
        AppError::Config(e.0)
    }
}

#[derive(Parser)]
#[command(
    name = "dosebandit",
    about = "Contextual-bandit dosing policies on offline patient data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a patient table and print the ingest report.
    Validate {
        /// Delimited patient table with a named header row.
        dataset: PathBuf,
        /// Experiment config supplying the [dataset.schema] column map.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the configured experiments and write curve CSVs.
    Run {
        /// Experiment config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Dataset path override.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Number of shuffled replays per policy (≥ 2).
        #[arg(long)]
        n_runs: Option<usize>,
        /// Master seed for shuffle generation.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for curve CSVs.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Keep every stride-th curve row (the final row always stays).
        #[arg(long)]
        stride: Option<usize>,
        /// Also write one CSV per episode.
        #[arg(long)]
        episodes: bool,
        /// Reward structure: standard | reshaped | custom.
        #[arg(long)]
        reward: Option<String>,
        /// Scale R for the reshaped reward structure.
        #[arg(long)]
        reward_scale: Option<f64>,
        /// Comma-separated policy list, overriding [[policy]] blocks.
        #[arg(long)]
        policies: Option<String>,
        /// LinUCB exploration coefficient override.
        #[arg(long)]
        alpha: Option<f64>,
        /// LinUCB inverse maintenance: incremental | fresh.
        #[arg(long)]
        linucb_update: Option<String>,
        /// Regression ridge override.
        #[arg(long)]
        lambda: Option<f64>,
        /// Regression warmup override.
        #[arg(long)]
        warmup: Option<u64>,
        /// Regression target transform: fit sqrt of the dose.
        #[arg(long)]
        predict_sqrt_dose: bool,
        /// Clinical coefficients file override.
        #[arg(long)]
        coefficients: Option<PathBuf>,
        /// Encoding-manifest file override.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Write a deterministic synthetic patient table.
    Synth {
        /// Number of patients to generate.
        #[arg(long)]
        n: usize,
        /// Generator seed.
        #[arg(long)]
        seed: u64,
        /// Noise on the sqrt-dose scale (0 for noiseless).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { dataset, config } => runner::cmd_validate(&dataset, config.as_deref()),
        Command::Run {
            config,
            dataset,
            n_runs,
            seed,
            output_dir,
            stride,
            episodes,
            reward,
            reward_scale,
            policies,
            alpha,
            linucb_update,
            lambda,
            warmup,
            predict_sqrt_dose,
            coefficients,
            manifest,
        } => {
            let overrides = Overrides {
                dataset,
                n_runs,
                seed,
                output_dir,
                stride,
                episodes: episodes.then_some(true),
                reward,
                reward_scale,
                policies,
                alpha,
                linucb_update,
                lambda,
                warmup,
                predict_sqrt_dose: predict_sqrt_dose.then_some(true),
                coefficients,
                manifest,
            };
            runner::cmd_run(&config, &overrides)
        }
        Command::Synth { n, seed, noise, out } => runner::cmd_synth(n, seed, noise, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
