use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use runchart_core::charting::{decide, ChartDecision};
use runchart_core::ingest::{read_observations, Aggregate, HeaderMode};
use runchart_core::localization::DEFAULT_REPORT_CUTOFF;
use runchart_core::{
    binarize, threshold_from_quantile, BinarySequence, ChartConfig, ChartKind,
    LocalizationReport,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::{emit_json, prob};
use crate::Outcome;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Subcommand)]
pub enum ChartCommand {
    /// Signal when the number of success runs is too small.
    R1(ChartArgs),
    /// Signal when some window of length `r` holds too many ones.
    R2(R2Args),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AggregateArg {
    None,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LimitRuleArg {
    Nearest,
    Conservative,
}

#[derive(Args)]
pub struct InputArgs {
    /// CSV of observations: one column, or one row per subgroup.
    #[arg(long)]
    input: PathBuf,
    /// How rows with several columns become one observation.
    #[arg(long, value_enum, default_value = "none")]
    aggregate: AggregateArg,
    /// Whether the first line is a header.
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
}

#[derive(Args)]
pub struct ChartArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Nominal in-control signal probability.
    #[arg(long)]
    alpha: f64,
    /// Baseline proportion of ones; the threshold is the `1 - p0` quantile.
    #[arg(long)]
    p0: f64,
    /// Randomize at the boundary so the level is exactly `alpha`.
    #[arg(long)]
    randomize: bool,
    /// Seed for the boundary draw and any Monte Carlo fallback.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How a non-randomized limit is chosen.
    #[arg(long, value_enum, default_value = "nearest")]
    limit_rule: LimitRuleArg,
    /// Number of windows and runs to report.
    #[arg(long, default_value_t = 3)]
    topk: usize,
    /// Keep localization entries with p-value below this.
    #[arg(long, default_value_t = DEFAULT_REPORT_CUTOFF)]
    cutoff: f64,
    /// Write the JSON record here and print a summary instead.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct R2Args {
    #[command(flatten)]
    chart: ChartArgs,
    /// Window length.
    #[arg(long)]
    r: usize,
}

#[derive(Args)]
pub struct LocalizeArgs {
    /// CSV of observations (thresholded with `--p0`).
    #[arg(long, conflicts_with = "bits", requires = "p0")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    aggregate: AggregateArg,
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
    /// Baseline proportion used to label observations.
    #[arg(long)]
    p0: Option<f64>,
    /// A 0/1 string such as `0110111` instead of a file.
    #[arg(long)]
    bits: Option<String>,
    /// Window length; omit to report runs only.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 3)]
    topk: usize,
    #[arg(long, default_value_t = DEFAULT_REPORT_CUTOFF)]
    cutoff: f64,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
}

/// Where the observations came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub sha256: String,
    pub observations: usize,
    pub aggregate: Aggregate,
}

/// Localization settings and results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSection {
    pub topk: usize,
    pub cutoff: f64,
    #[serde(flatten)]
    pub report: LocalizationReport,
}

/// Everything needed to audit and reproduce one chart decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub schema: u32,
    pub input: InputEcho,
    pub config: ChartConfig,
    pub bits: String,
    #[serde(flatten)]
    pub decision: ChartDecision,
    pub localization: LocalizationSection,
}

impl From<AggregateArg> for Aggregate {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::None => Aggregate::None,
            AggregateArg::Mean => Aggregate::Mean,
        }
    }
}

impl From<HeaderArg> for HeaderMode {
    fn from(h: HeaderArg) -> Self {
        match h {
            HeaderArg::Auto => HeaderMode::Auto,
            HeaderArg::Yes => HeaderMode::Present,
            HeaderArg::No => HeaderMode::Absent,
        }
    }
}

fn load(path: &Path, header: HeaderArg, aggregate: AggregateArg) -> Result<(runchart_core::Sample, InputEcho)> {
    let bytes = std::fs::read(path)
        .map_err(|e| runchart_core::Error::Io(format!("{}: {e}", path.display())))?;
    let obs = read_observations(bytes.as_slice(), header.into(), aggregate.into())?;
    let echo = InputEcho {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        observations: obs.sample.len(),
        aggregate: aggregate.into(),
    };
    Ok((obs.sample, echo))
}

fn build_record(args: &ChartArgs, chart: ChartKind) -> Result<DecisionRecord> {
    if args.topk == 0 {
        return Err(runchart_core::Error::InvalidArgument("--topk must be at least 1".into()).into());
    }
    let (sample, input) = load(&args.input.input, args.input.header, args.input.aggregate)?;
    let mut config = ChartConfig::new(args.alpha, args.p0, chart).with_limit_rule(args.limit_rule.into());
    config.randomize = args.randomize;
    config.seed = args.seed;

    let mut warnings = config.validate()?;
    let c = threshold_from_quantile(&sample, config.p0)?;
    let seq = binarize(&sample, c);
    let realized = seq.n1 as f64 / seq.len() as f64;
    if (realized - config.p0).abs() > 0.1 {
        warnings.push(format!(
            "realized proportion of ones {realized:.3} differs from p0 = {} by more than 0.1 (ties at the threshold)",
            config.p0
        ));
    }
    let decision = decide(&seq, &config, warnings)?;
    let r = match chart {
        ChartKind::R2 { r } => Some(r),
        ChartKind::R1 => None,
    };
    let report = LocalizationReport::build(&seq, r, args.topk, args.cutoff)?;
    Ok(DecisionRecord {
        schema: SCHEMA_VERSION,
        input,
        config,
        bits: seq.to_bit_string(),
        decision,
        localization: LocalizationSection {
            topk: args.topk,
            cutoff: args.cutoff,
            report,
        },
    })
}

fn summarize(rec: &DecisionRecord) {
    let d = &rec.decision;
    let op = match rec.config.chart {
        ChartKind::R1 => "<=",
        ChartKind::R2 { .. } => ">=",
    };
    if let Some(c) = d.threshold_c {
        println!("threshold c = {c}");
    }
    println!("n = {}  n1 = {}", d.n, d.n1);
    println!(
        "{} = {}  limit {op} {} (attained {})  p-value {}",
        d.statistic_name,
        d.observed,
        d.limit,
        prob(d.attained_alpha, 4),
        prob(d.p_value, 4)
    );
    println!("signal: {}", if d.signal { "yes" } else { "no" });
    for w in &rec.localization.report.windows {
        println!("window {}..{}  count {}  p {}", w.start, w.end, w.count, prob(w.p_value, 4));
    }
    for r in &rec.localization.report.runs {
        println!("run {}..{}  length {}  p {}", r.start, r.end, r.length, prob(r.p_value, 4));
    }
    for w in &d.warnings {
        println!("warning: {w}");
    }
}

pub fn run_chart(cmd: ChartCommand) -> Result<Outcome> {
    let (args, chart) = match &cmd {
        ChartCommand::R1(a) => (a, ChartKind::R1),
        ChartCommand::R2(a) => (&a.chart, ChartKind::R2 { r: a.r }),
    };
    let rec = build_record(args, chart)?;
    emit_json(&rec, args.output.as_deref())
        .with_context(|| "writing the decision record".to_string())?;
    if args.output.is_some() {
        summarize(&rec);
    }
    for w in &rec.decision.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if rec.decision.signal {
        Outcome::Signal
    } else {
        Outcome::Done
    })
}

pub fn run_localize(args: LocalizeArgs) -> Result<Outcome> {
    if args.topk == 0 {
        bail!(runchart_core::Error::InvalidArgument("--topk must be at least 1".into()));
    }
    let seq = match (&args.bits, &args.input) {
        (Some(bits), _) => BinarySequence::parse(bits)?,
        (None, Some(path)) => {
            let (sample, _) = load(path, args.header, args.aggregate)?;
            let p0 = args.p0.expect("clap requires --p0 with --input");
            binarize(&sample, threshold_from_quantile(&sample, p0)?)
        }
        (None, None) => bail!(runchart_core::Error::InvalidArgument(
            "give either --bits or --input with --p0".into()
        )),
    };
    let report = LocalizationReport::build(&seq, args.r, args.topk, args.cutoff)?;
    if args.json {
        #[derive(Serialize)]
        struct Out<'a> {
            bits: String,
            n: usize,
            n1: usize,
            #[serde(flatten)]
            report: &'a LocalizationReport,
        }
        let out = Out {
            bits: seq.to_bit_string(),
            n: seq.len(),
            n1: seq.n1,
            report: &report,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("bits {}  n = {}  n1 = {}", seq.to_bit_string(), seq.len(), seq.n1);
        for w in &report.windows {
            println!(
                "window {}..{}  count {}  center {}  p {}",
                w.start,
                w.end,
                w.count,
                w.center,
                prob(w.p_value, 4)
            );
        }
        for r in &report.runs {
            println!("run {}..{}  length {}  p {}", r.start, r.end, r.length, prob(r.p_value, 4));
        }
    }
    Ok(Outcome::Done)
}
