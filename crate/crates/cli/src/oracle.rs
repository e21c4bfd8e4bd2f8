use anyhow::Result;
use clap::{Args, ValueEnum};
use runchart_core::oracle::{enumerate_counts, StatisticKind};

use crate::Outcome;

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    Runs,
    Longest,
    Scan,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Window length for `--kind scan`.
    #[arg(long, required_if_eq("kind", "scan"))]
    r: Option<usize>,
}

pub fn run(args: OracleArgs) -> Result<Outcome> {
    let kind = match args.kind {
        KindArg::Runs => StatisticKind::RunsCount,
        KindArg::Longest => StatisticKind::LongestRun,
        KindArg::Scan => StatisticKind::ScanMax {
            r: args.r.expect("clap requires --r"),
        },
    };
    let counts = enumerate_counts(args.n, args.n1, kind)?;
    let total: u64 = counts.iter().sum();
    println!("# {total} arrangements");
    for (value, &count) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
        println!("{value}  {count}  {}", count as f64 / total as f64);
    }
    Ok(Outcome::Done)
}
