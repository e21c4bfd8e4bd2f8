//! `runchart`: exact run and scan distributions, distribution-free Phase I
//! charts, localization and simulation from the command line.
//!
//! Exit codes: 0 no signal (or success), 10 signal, 2 usage or input error,
//! 3 exact computation over budget, 4 degenerate binary sequence.

mod chart;
mod dist;
mod format;
mod oracle;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_SIGNAL: u8 = 10;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "runchart", version, about = "Distribution-free Phase I control charts based on runs and scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact conditional distributions given the success count.
    #[command(subcommand)]
    Dist(dist::DistCommand),
    /// Run the R-1 (runs) or R-2 (scan) chart on an observation file.
    #[command(subcommand)]
    Chart(chart::ChartCommand),
    /// Top windows and longest runs with conditional p-values.
    Localize(chart::LocalizeArgs),
    /// Monte Carlo signal probabilities under a change-point model.
    Simulate(simulate::SimulateArgs),
    /// Brute-force enumeration of a statistic's distribution.
    #[command(hide = true)]
    Oracle(oracle::OracleArgs),
}

/// Outcome of a successful command.
pub enum Outcome {
    Done,
    Signal,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use runchart_core::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Capacity { .. }) => EXIT_CAPACITY,
        Some(Error::Degenerate { .. }) => EXIT_DEGENERATE,
        Some(Error::InvalidArgument(_) | Error::Ingest { .. } | Error::Io(_)) => EXIT_USAGE,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_USAGE,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Dist(cmd) => dist::run(cmd),
        Command::Chart(cmd) => chart::run_chart(cmd),
        Command::Localize(args) => chart::run_localize(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Oracle(args) => oracle::run(args),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Signal) => ExitCode::from(EXIT_SIGNAL),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = exit_code(&err);
            if code == EXIT_CAPACITY {
                eprintln!("hint: rerun with `--mc REPS --seed S` for a Monte Carlo estimate");
            }
            ExitCode::from(code)
        }
    }
}
