use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_cli::commands;
use landau_cli::{CliError, Overrides};

/// Deterministic solver for the homogeneous Landau equation with soft potentials.
#[derive(Parser)]
#[command(name = "landau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write diagnostics, config echo and checkpoints.
    Run(Overrides),
    /// Check the invariant suite on a checkpoint.
    Verify {
        checkpoint: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the theorem matrix and write report.json and report.md.
    Experiment {
        /// JSON list of `{ "name", "config" }` objects replacing the default matrix.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build or load the cached kernel tables.
    Tables(Overrides),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result: Result<bool, CliError> = match &cli.command {
        Command::Run(ov) => commands::run(ov).map(|_| true),
        Command::Verify { checkpoint, overrides } => commands::verify(checkpoint, overrides),
        Command::Experiment { matrix, overrides } => {
            commands::experiment(overrides, matrix.as_deref()).map(|r| {
                println!("{} rows, {}", r.rows.len(), if r.all_pass() { "all pass" } else { "some FAIL" });
                true
            })
        }
        Command::Tables(ov) => commands::tables(ov).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
