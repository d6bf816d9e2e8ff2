//! `privacy-ledger`: a command-line front end over the adaptive
//! privacy-accounting engine.
//!
//! Exit codes: 0 for ok/admitted, 1 for rejected or failed coverage,
//! 2 for usage and validation errors.

mod commands;
mod ledger;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "privacy-ledger",
    version,
    about = "Adaptive privacy budget ledger: budget checks, odometer status, curve export, coverage experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a JSONL spend log and print the folded composition state.
    Ingest(commands::IngestArgs),
    /// Decide whether one more spend fits the global budget.
    Check(commands::CheckArgs),
    /// Report remaining capacity and odometer readings for a ledger.
    Status(commands::StatusArgs),
    /// Export odometer comparison curves (or the --gap curve) as CSV.
    Curves(commands::CurvesArgs),
    /// Run a Monte-Carlo coverage experiment and report the violation rate.
    Simulate(commands::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(args) => commands::cmd_ingest(args),
        Command::Check(args) => commands::cmd_check(args),
        Command::Status(args) => commands::cmd_status(args),
        Command::Curves(args) => commands::cmd_curves(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
