use anyhow::Result;
use clap::{Args, Subcommand};
use runchart_core::scan::{longest_run_pmf, scan_pmf_mc};
use runchart_core::{runs_pmf, scan_pmf, scan_tail, scan_tail_mc, ConditionalPmf, RunsQuery, ScanQuery};
use serde::Serialize;

use crate::format::prob;
use crate::Outcome;

#[derive(Subcommand)]
pub enum DistCommand {
    /// Number of success runs `R_n`.
    Runs(RunsArgs),
    /// Scan statistic `S_n(r)`: most ones in any `r` consecutive trials.
    Scan(ScanArgs),
    /// Longest success run `L_n`.
    Longest(RunsArgs),
}

#[derive(Args)]
pub struct Common {
    /// Number of trials.
    #[arg(long)]
    n: usize,
    /// Number of successes.
    #[arg(long)]
    n1: usize,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Decimals shown in tables.
    #[arg(long, default_value_t = 4)]
    digits: usize,
}

#[derive(Args)]
pub struct RunsArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Window length.
    #[arg(long)]
    r: usize,
    /// Report only the tail `P(S >= s)`.
    #[arg(long)]
    s: Option<usize>,
    /// Estimate by Monte Carlo with this many replications.
    #[arg(long, value_name = "REPS", num_args = 0..=1, default_missing_value = "200000")]
    mc: Option<u64>,
    /// Seed for `--mc`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct PmfRow {
    value: i64,
    prob: f64,
    cdf: f64,
}

#[derive(Serialize)]
struct PmfReport {
    statistic: String,
    n: usize,
    n1: usize,
    approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    rows: Vec<PmfRow>,
}

#[derive(Serialize)]
struct TailReport {
    statistic: String,
    n: usize,
    n1: usize,
    r: usize,
    s: usize,
    tail: f64,
    approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn print_pmf(pmf: &ConditionalPmf, common: &Common, mc: Option<(u64, u64)>) -> Result<Outcome> {
    let rows: Vec<PmfRow> = pmf
        .iter()
        .map(|(value, p)| PmfRow {
            value,
            prob: p,
            cdf: pmf.cdf(value),
        })
        .collect();
    if common.json {
        let report = PmfReport {
            statistic: pmf.statistic.name(),
            n: pmf.n,
            n1: pmf.n1,
            approximate: mc.is_some(),
            mc_reps: mc.map(|m| m.0),
            seed: mc.map(|m| m.1),
            rows,
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("# {} given n = {}, n1 = {}", pmf.statistic.name(), pmf.n, pmf.n1);
        if let Some((reps, seed)) = mc {
            println!("# Monte Carlo estimate: {reps} replications, seed {seed}");
        }
        for row in rows {
            println!("{}  {}", row.value, prob(row.prob, common.digits));
        }
    }
    Ok(Outcome::Done)
}

pub fn run(cmd: DistCommand) -> Result<Outcome> {
    match cmd {
        DistCommand::Runs(a) => {
            let pmf = runs_pmf(RunsQuery::new(a.common.n, a.common.n1)?)?;
            print_pmf(&pmf, &a.common, None)
        }
        DistCommand::Longest(a) => {
            RunsQuery::new(a.common.n, a.common.n1)?;
            let pmf = longest_run_pmf(a.common.n, a.common.n1)?;
            print_pmf(&pmf, &a.common, None)
        }
        DistCommand::Scan(a) => run_scan(a),
    }
}

fn run_scan(a: ScanArgs) -> Result<Outcome> {
    let Common { n, n1, .. } = a.common;
    let Some(s) = a.s else {
        let pmf = match a.mc {
            Some(reps) => scan_pmf_mc(n, n1, a.r, reps, a.seed)?,
            None => scan_pmf(n, n1, a.r)?,
        };
        return print_pmf(&pmf, &a.common, a.mc.map(|reps| (reps, a.seed)));
    };
    let top = a.r.min(n1);
    let query = (s <= a.r).then(|| ScanQuery::new(n, n1, a.r, s)).transpose()?;
    if query.is_none() {
        // still validates n, n1, r
        ScanQuery::new(n, n1, a.r, 1)?;
    }
    let mut report = TailReport {
        statistic: format!("S_{n}({})", a.r),
        n,
        n1,
        r: a.r,
        s,
        tail: 0.0,
        approximate: false,
        std_error: None,
        mc_reps: None,
        seed: None,
    };
    match (query, a.mc) {
        (None, _) => {}
        (Some(_), _) if s > top => {}
        (Some(q), Some(reps)) => {
            let est = scan_tail_mc(q, reps, a.seed)?;
            report.tail = est.estimate;
            report.approximate = true;
            report.std_error = Some(est.std_error);
            report.mc_reps = Some(est.reps);
            report.seed = Some(est.seed);
        }
        (Some(q), None) => report.tail = scan_tail(q)?,
    }
    if a.common.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else if report.approximate {
        println!(
            "P(S>={s}) ~ {} (se {}, {} replications, seed {})",
            prob(report.tail, a.common.digits),
            prob(report.std_error.unwrap_or(0.0), a.common.digits + 2),
            a.mc.unwrap_or(0),
            a.seed
        );
    } else {
        println!("P(S>={s}) = {}", prob(report.tail, a.common.digits));
    }
    Ok(Outcome::Done)
}
