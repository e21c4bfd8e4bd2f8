//! Monte Carlo signal probabilities under a single step change in location.
//!
//! Observations `1..=tau` come from the in-control distribution; the rest are
//! shifted up by `delta * sigma0`. Replication `i` uses its own ChaCha8
//! stream derived from `(seed, i)`, and per-replication outcomes are merged
//! as integer counts, so estimates do not depend on thread count.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charting::{
    binarize, threshold_from_quantile, ChartConfig, ChartKind, ChartLimits, LimitRule, Sample,
};
use crate::error::{invalid, Result};
use crate::scan::mc::{replication_rng, MIN_MC_REPS};

/// In-control distribution of the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Standard normal.
    Normal,
    /// Exponential with mean 1.
    Exponential,
    /// Student t with 3 degrees of freedom.
    StudentT3,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Normal, Family::Exponential, Family::StudentT3];

    /// Standard deviation used to scale the shift.
    pub fn sigma0(&self) -> f64 {
        match self {
            Family::Normal | Family::Exponential => 1.0,
            Family::StudentT3 => 3f64.sqrt(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Family::Normal => Normal::new(0.0, 1.0).expect("valid normal").sample(rng),
            Family::Exponential => Exp::new(1.0).expect("valid exponential").sample(rng),
            Family::StudentT3 => StudentT::new(3.0).expect("valid t").sample(rng),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Exponential => "exp1",
            Family::StudentT3 => "t3",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "normal" | "n" | "norm" => Ok(Family::Normal),
            "exp1" | "exp" | "exponential" => Ok(Family::Exponential),
            "t3" | "t" | "student" => Ok(Family::StudentT3),
            other => Err(invalid(format!("unknown family {other:?} (normal, exp1, t3)"))),
        }
    }
}

/// Location of the change point relative to the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Change after the first fifth of the sample.
    I,
    /// Change at the midpoint.
    II,
    /// Change after four fifths of the sample.
    III,
    /// No change.
    Ic,
}

impl Scenario {
    pub fn tau(&self, n: usize) -> usize {
        match self {
            Scenario::I => n / 5,
            Scenario::II => n / 2,
            Scenario::III => 4 * n / 5,
            Scenario::Ic => n,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Scenario::I),
            "ii" | "2" => Ok(Scenario::II),
            "iii" | "3" => Ok(Scenario::III),
            "ic" => Ok(Scenario::Ic),
            other => Err(invalid(format!("unknown scenario {other:?} (I, II, III, ic)"))),
        }
    }
}

/// Recommended baseline proportion for a chart and scenario; right-skewed
/// data use 0.1 less. Windows up to 10 use the `r = 10` row, larger windows
/// and the runs chart share the other row. The in-control scenario uses the
/// midpoint values.
pub fn recommended_p0(chart: ChartKind, scenario: Scenario, family: Family) -> f64 {
    let small_window = matches!(chart, ChartKind::R2 { r } if r <= 10);
    let base: f64 = match (small_window, scenario) {
        (true, Scenario::I) => 0.5,
        (true, Scenario::II | Scenario::Ic) => 0.4,
        (true, Scenario::III) => 0.2,
        (false, Scenario::I) => 0.7,
        (false, Scenario::II | Scenario::Ic) => 0.5,
        (false, Scenario::III) => 0.2,
    };
    let p0 = if family == Family::Exponential { base - 0.1 } else { base };
    (p0 * 10.0).round() / 10.0
}

/// One step change in location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSpec {
    pub family: Family,
    pub n: usize,
    /// Observations `1..=tau` are in control; `tau = n` means no change.
    pub tau: usize,
    /// Shift in units of `sigma0`.
    pub delta: f64,
}

impl ChangePointSpec {
    pub fn new(family: Family, n: usize, tau: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("n must be at least 2, got {n}")));
        }
        if tau > n {
            return Err(invalid(format!("tau = {tau} exceeds n = {n}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid(format!("delta must be finite and nonnegative, got {delta}")));
        }
        Ok(Self { family, n, tau, delta })
    }

    pub fn scenario(family: Family, n: usize, scenario: Scenario, delta: f64) -> Result<Self> {
        Self::new(family, n, scenario.tau(n), delta)
    }
}

/// Draws one path from the change-point model.
pub fn sample_path<R: Rng + ?Sized>(spec: &ChangePointSpec, rng: &mut R) -> Result<Sample> {
    let shift = spec.delta * spec.family.sigma0();
    let values = (0..spec.n)
        .map(|i| {
            let x = spec.family.draw(rng);
            if i < spec.tau {
                x
            } else {
                x + shift
            }
        })
        .collect();
    Sample::new(values)
}

/// Estimated signal probability with its Monte Carlo error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
    pub signals: u64,
    /// Replications whose binary sequence was all zeros or all ones; they
    /// are excluded from the estimate.
    pub degenerate: u64,
    /// In-control signal probability of the rule, averaged over the
    /// realized success counts.
    pub expected_ic_level: f64,
    /// Realized success counts and how often each occurred.
    pub n1_counts: BTreeMap<usize, u64>,
    pub spec: ChangePointSpec,
    pub config: ChartConfig,
}

#[derive(Default)]
struct Tally {
    signals: u64,
    degenerate: u64,
    n1: BTreeMap<usize, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.signals += other.signals;
        self.degenerate += other.degenerate;
        for (k, v) in other.n1 {
            *self.n1.entry(k).or_default() += v;
        }
        self
    }
}

/// Runs the chart on `reps` independent paths.
pub fn estimate_signal_prob(
    spec: &ChangePointSpec,
    config: &ChartConfig,
    reps: u64,
    seed: u64,
) -> Result<SignalEstimate> {
    if reps < MIN_MC_REPS {
        return Err(invalid(format!("need at least {MIN_MC_REPS} replications, got {reps}")));
    }
    config.validate()?;
    if let ChartKind::R2 { r } = config.chart {
        if r > spec.n {
            return Err(invalid(format!("window r = {r} exceeds n = {}", spec.n)));
        }
    }
    let n = spec.n;
    let limits: Vec<OnceLock<Result<ChartLimits>>> = (0..=n).map(|_| OnceLock::new()).collect();
    let limits_for = |n1: usize| limits[n1].get_or_init(|| ChartLimits::compute(n, n1, config)).clone();

    let tally = (0..reps)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let mut rng = replication_rng(seed, i);
            let sample = sample_path(spec, &mut rng)?;
            let seq = binarize(&sample, threshold_from_quantile(&sample, config.p0)?);
            let mut t = Tally::default();
            if seq.n1 == 0 || seq.n1 == n {
                t.degenerate = 1;
                return Ok(t);
            }
            let lim = limits_for(seq.n1)?;
            let draw: f64 = if config.randomize { rng.random() } else { 1.0 };
            t.signals = lim.signals(config.chart.observe(&seq.bits), draw) as u64;
            t.n1.insert(seq.n1, 1);
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    let valid = reps - tally.degenerate;
    let (estimate, std_error, expected_ic_level) = if valid == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let p = tally.signals as f64 / valid as f64;
        let mut level = 0.0;
        for (&n1, &count) in &tally.n1 {
            level += limits_for(n1)?.attained_alpha * count as f64;
        }
        (p, (p * (1.0 - p) / valid as f64).sqrt(), level / valid as f64)
    };
    Ok(SignalEstimate {
        estimate,
        std_error,
        reps,
        seed,
        signals: tally.signals,
        degenerate: tally.degenerate,
        expected_ic_level,
        n1_counts: tally.n1,
        spec: *spec,
        config: *config,
    })
}

/// Grid for [`scenario_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub ns: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    pub families: Vec<Family>,
    pub charts: Vec<ChartKind>,
    /// Baseline proportions to try; empty means the recommended value per
    /// cell.
    pub p0s: Vec<f64>,
    pub deltas: Vec<f64>,
    pub alpha: f64,
    pub randomize: bool,
    #[serde(default)]
    pub limit_rule: LimitRule,
    pub reps: u64,
    pub seed: u64,
}

/// One cell of the suite, ready for CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub family: String,
    pub n: usize,
    pub tau: usize,
    pub delta: f64,
    pub chart: String,
    pub r: Option<usize>,
    pub p0: f64,
    pub alpha: f64,
    pub randomize: bool,
    pub reps: u64,
    pub seed: u64,
    pub estimate: f64,
    pub se: f64,
    pub degenerate: u64,
}

/// Cross product of the grid, one row per cell, every cell under the same
/// seed.
pub fn scenario_suite(suite: &SuiteConfig) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for &family in &suite.families {
        for &n in &suite.ns {
            for &scenario in &suite.scenarios {
                for &chart in &suite.charts {
                    let p0s = if suite.p0s.is_empty() {
                        vec![recommended_p0(chart, scenario, family)]
                    } else {
                        suite.p0s.clone()
                    };
                    for &p0 in &p0s {
                        for &delta in &suite.deltas {
                            let spec = ChangePointSpec::scenario(family, n, scenario, delta)?;
                            let mut config =
                                ChartConfig::new(suite.alpha, p0, chart).with_limit_rule(suite.limit_rule);
                            config.randomize = suite.randomize;
                            config.seed = suite.seed;
                            let est = estimate_signal_prob(&spec, &config, suite.reps, suite.seed)?;
                            rows.push(SuiteRow {
                                family: family.name().to_string(),
                                n,
                                tau: spec.tau,
                                delta,
                                chart: match chart {
                                    ChartKind::R1 => "r1".into(),
                                    ChartKind::R2 { .. } => "r2".into(),
                                },
                                r: match chart {
                                    ChartKind::R1 => None,
                                    ChartKind::R2 { r } => Some(r),
                                },
                                p0,
                                alpha: suite.alpha,
                                randomize: suite.randomize,
                                reps: suite.reps,
                                seed: suite.seed,
                                estimate: est.estimate,
                                se: est.std_error,
                                degenerate: est.degenerate,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_change_points() {
        assert_eq!(Scenario::I.tau(50), 10);
        assert_eq!(Scenario::I.tau(100), 20);
        assert_eq!(Scenario::II.tau(50), 25);
        assert_eq!(Scenario::III.tau(100), 80);
        assert_eq!(Scenario::Ic.tau(50), 50);
    }

    #[test]
    fn recommended_baselines() {
        let r10 = ChartKind::R2 { r: 10 };
        assert_eq!(recommended_p0(r10, Scenario::II, Family::Normal), 0.4);
        assert_eq!(recommended_p0(r10, Scenario::II, Family::Exponential), 0.3);
        assert_eq!(recommended_p0(ChartKind::R1, Scenario::I, Family::StudentT3), 0.7);
        assert_eq!(recommended_p0(ChartKind::R2 { r: 40 }, Scenario::III, Family::Exponential), 0.1);
    }

    #[test]
    fn shifted_normal_mean() {
        let spec = ChangePointSpec::new(Family::Normal, 100_000, 0, 2.0).unwrap();
        let s = sample_path(&spec, &mut replication_rng(5, 0)).unwrap();
        let mean = s.values().iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 2.0).abs() < 4.0 / (s.len() as f64).sqrt());
    }

    #[test]
    fn shifted_t3_mean() {
        let spec = ChangePointSpec::new(Family::StudentT3, 100_000, 0, 1.0).unwrap();
        let s = sample_path(&spec, &mut replication_rng(9, 0)).unwrap();
        let mean = s.values().iter().sum::<f64>() / s.len() as f64;
        // t(3) has variance 3
        let se = (3.0 / s.len() as f64).sqrt();
        assert!((mean - 3f64.sqrt()).abs() < 4.0 * se, "{mean}");
    }

    #[test]
    fn unshifted_prefix_is_in_control() {
        let spec = ChangePointSpec::new(Family::Exponential, 10, 10, 5.0).unwrap();
        let a = sample_path(&spec, &mut replication_rng(1, 3)).unwrap();
        let b = sample_path(
            &ChangePointSpec::new(Family::Exponential, 10, 10, 0.0).unwrap(),
            &mut replication_rng(1, 3),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation() {
        assert!(ChangePointSpec::new(Family::Normal, 10, 11, 0.0).is_err());
        assert!(ChangePointSpec::new(Family::Normal, 10, 5, -1.0).is_err());
        let spec = ChangePointSpec::new(Family::Normal, 10, 5, 1.0).unwrap();
        assert!(estimate_signal_prob(&spec, &ChartConfig::r1(0.05, 0.5), 10, 1).is_err());
    }

    #[test]
    fn estimates_are_reproducible() {
        let spec = ChangePointSpec::new(Family::Normal, 20, 10, 1.0).unwrap();
        let cfg = ChartConfig::r2(0.05, 0.5, 5).randomized(0);
        let a = estimate_signal_prob(&spec, &cfg, 2000, 42).unwrap();
        let b = estimate_signal_prob(&spec, &cfg, 2000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.degenerate, 0);
        assert_eq!(a.n1_counts.values().sum::<u64>(), 2000);
    }

    #[test]
    fn empty_delta_grid() {
        let suite = SuiteConfig {
            ns: vec![50],
            scenarios: vec![Scenario::I],
            families: vec![Family::Normal],
            charts: vec![ChartKind::R1],
            p0s: vec![],
            deltas: vec![],
            alpha: 0.005,
            randomize: true,
            limit_rule: LimitRule::Nearest,
            reps: 1000,
            seed: 1,
        };
        assert!(scenario_suite(&suite).unwrap().is_empty());
    }
}
