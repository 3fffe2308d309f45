//! `ems` — annotate tabular decisions with moral judgments, train
//! classifiers on them, and compare ethical-competence techniques.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 data error
//! (unreadable, malformed, or drifted inputs), 4 training failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use config::{CliOverrides, Resolved};
use ems_core::data::Schema;
use ems_core::harness::SweepAxis;

#[derive(Parser)]
#[command(
    name = "ems",
    version,
    about = "Moral-judgment annotation and ethical-competence benchmarking",
    after_help = "Exit codes: 0 ok, 2 config/usage, 3 data, 4 training."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration (required by every subcommand except gen-data).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override (default: run.out_dir, then $EMS_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Family subset, comma separated (lr,nb,rf,svm,nn).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    families: Option<Vec<String>>,

    /// Technique subset, comma separated (baseline,override,penalty,ems).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    techniques: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled synthetic datasets as CSV files.
    GenData {
        /// admissions or loans; omit for both.
        #[arg(long)]
        schema: Option<String>,
    },
    /// Annotate the dataset and write both label views plus a snapshot.
    Prepare,
    /// Fit one baseline model per requested family and save each one.
    Train,
    /// Score a saved model on the held-out split.
    Evaluate {
        /// Saved model file produced by `train`.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Run the technique-by-family matrix and write the results table.
    Compare,
    /// Walk one hyperparameter axis and write plot-ready CSVs.
    Sweep {
        /// theta, lambda, or kappa.
        #[arg(long)]
        axis: String,
        /// Grid values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenData { schema } => {
            let schema = schema
                .as_deref()
                .map(Schema::parse)
                .transpose()
                .context("--schema")?;
            let seed = cli.seed.unwrap_or(42);
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("data"));
            commands::gen_data(schema, seed, &out_dir)
        }
        Command::Prepare => commands::prepare(&resolve(&cli)?),
        Command::Train => commands::train(&resolve(&cli)?),
        Command::Evaluate { model } => commands::evaluate(&resolve(&cli)?, model),
        Command::Compare => commands::compare(&resolve(&cli)?),
        Command::Sweep { axis, grid } => {
            let axis = SweepAxis::parse(axis)?;
            commands::sweep(&resolve(&cli)?, axis, grid)
        }
    }
}

/// Loads and validates the config file, honoring command-line overrides.
fn resolve(cli: &Cli) -> Result<Resolved> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("this subcommand needs --config <FILE>"))?;
    let file = config::load_file(path)?;
    let overrides = CliOverrides {
        seed: cli.seed,
        out: cli.out.clone(),
        families: cli.families.clone(),
        techniques: cli.techniques.clone(),
    };
    config::resolve(&file, &overrides)
}

/// Maps the error chain onto the documented exit codes. The first engine
/// or I/O error found decides; anything else is a configuration problem.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<ems_core::Error>() {
            return match core {
                ems_core::Error::Training(_) => 4,
                ems_core::Error::Validation { .. } => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    2
}
