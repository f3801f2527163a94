//! `hopt`: dataset generation, hyperparameter tuning runs, before/after
//! comparison studies, grid sweeps, and report rendering, all reproducible
//! from stored manifests.

mod commands;
mod config;
mod errors;
mod manifest;
mod outdir;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, Resolved};
use errors::CliError;

#[derive(Debug, Parser)]
#[command(name = "hopt", version, about = "Hyperparameter tuning workbench")]
struct Cli {
    /// Base seed for everything this command randomizes
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: hopt-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML config file layered between defaults and flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark dataset
    GenData(commands::gen_data::Args),
    /// Tune a learner's hyperparameters on a dataset
    Hopt(commands::hopt_cmd::Args),
    /// Compare untuned and tuned configurations over repeated trials
    Compare(commands::compare::Args),
    /// Cross-validate a grid over one or two hyperparameters
    Sweep(commands::sweep::Args),
    /// Render plots and consolidated CSVs from stored runs
    Report(commands::report::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(CliError::runtime)?;
    }

    let file = FileConfig::load(cli.config.as_deref())?;
    let resolved = Resolved {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.unwrap_or_else(|| PathBuf::from("hopt-out")),
        settings_given: cli.seed.is_some() || cli.config.is_some(),
        file,
    };

    match &cli.command {
        Command::GenData(args) => commands::gen_data::run(&resolved, args),
        Command::Hopt(args) => commands::hopt_cmd::run(&resolved, args),
        Command::Compare(args) => commands::compare::run(&resolved, args),
        Command::Sweep(args) => commands::sweep::run(&resolved, args),
        Command::Report(args) => commands::report::run(&resolved, args),
    }
}
