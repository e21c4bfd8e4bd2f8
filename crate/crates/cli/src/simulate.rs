use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use runchart_core::simulation::{scenario_suite, Family, Scenario, SuiteConfig};
use runchart_core::{ChartKind, LimitRule};

use crate::chart::LimitRuleArg;
use crate::Outcome;

#[derive(Clone, Copy, ValueEnum)]
pub enum ChartArg {
    R1,
    R2,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Baseline distribution: normal, exp1 or t3.
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Change point: i, ii, iii or ic.
    #[arg(long, value_parser = parse_scenario)]
    scenario: Scenario,
    #[arg(long, value_enum)]
    chart: ChartArg,
    /// Window length for `--chart r2`.
    #[arg(long, required_if_eq("chart", "r2"))]
    r: Option<usize>,
    /// Baseline proportion; defaults to the recommended value for the cell.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    alpha: f64,
    /// Shift sizes in units of the baseline standard deviation.
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    randomize: bool,
    #[arg(long, value_enum, default_value = "nearest")]
    limit_rule: LimitRuleArg,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_family(text: &str) -> Result<Family, String> {
    Family::parse(text).map_err(|e| e.to_string())
}

fn parse_scenario(text: &str) -> Result<Scenario, String> {
    Scenario::parse(text).map_err(|e| e.to_string())
}

pub fn run(args: SimulateArgs) -> Result<Outcome> {
    let chart = match (args.chart, args.r) {
        (ChartArg::R1, _) => ChartKind::R1,
        (ChartArg::R2, Some(r)) => ChartKind::R2 { r },
        (ChartArg::R2, None) => unreachable!("clap requires --r with --chart r2"),
    };
    let suite = SuiteConfig {
        ns: vec![args.n],
        scenarios: vec![args.scenario],
        families: vec![args.family],
        charts: vec![chart],
        p0s: args.p0.into_iter().collect(),
        deltas: args.delta,
        alpha: args.alpha,
        randomize: args.randomize,
        limit_rule: args.limit_rule.into(),
        reps: args.reps,
        seed: args.seed,
    };
    let rows = scenario_suite(&suite)?;
    let sink: Box<dyn std::io::Write> = match &args.output {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(Outcome::Done)
}

impl From<LimitRuleArg> for LimitRule {
    fn from(rule: LimitRuleArg) -> Self {
        match rule {
            LimitRuleArg::Nearest => LimitRule::Nearest,
            LimitRuleArg::Conservative => LimitRule::Conservative,
        }
    }
}
