//! The R-1 (number of runs) and R-2 (scan) Phase I charts.
//!
//! Observations at or above the empirical `1 - p0` quantile are labeled 1.
//! Given the realized count of ones, the chart statistic has a known exact
//! distribution under the in-control hypothesis, whatever the process
//! distribution, so the control limit comes straight from that pmf.
//!
//! The R-1 chart signals on too few runs (ones clustered together), the R-2
//! chart on too many ones inside some window of length `r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pmf::{check_alpha, ConditionalPmf, Statistic, LEVEL_EPS};
use crate::runs::{count_runs, runs_pmf, RunsQuery};
use crate::scan::{
    chain_size_estimate, max_window_count, scan_histogram_mc, scan_pmf_mc, scan_tail_mc, ScanEngine,
    ScanQuery, ScanRoute, DEFAULT_MC_REPS,
};

/// Replications for the pilot that decides whether an exact upper tail is
/// within reach.
const PILOT_REPS: u64 = 20_000;

/// Ordered real observations seen by a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid(format!(
                "a sample needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("observation {} is not finite", i + 1)));
        }
        Ok(Self { values })
    }

    /// Reduces each subgroup (row) to its mean.
    pub fn from_subgroups(rows: &[Vec<f64>]) -> Result<Self> {
        let mut means = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(invalid(format!("subgroup {} is empty", i + 1)));
            }
            means.push(row.iter().sum::<f64>() / row.len() as f64);
        }
        Self::new(means)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A 0/1 sequence with its success count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySequence {
    pub bits: Vec<u8>,
    pub n1: usize,
    /// Threshold used to label the observations, if the bits came from a
    /// sample.
    pub threshold_c: Option<f64>,
}

impl BinarySequence {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("empty binary sequence"));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(format!("position {} holds {}, not 0 or 1", i + 1, bits[i])));
        }
        let n1 = bits.iter().map(|&b| b as usize).sum();
        Ok(Self {
            bits,
            n1,
            threshold_c: None,
        })
    }

    /// Parses a string such as `0110111`; whitespace is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(invalid(format!("p0 must lie in (0, 1), got {p0}")));
    }
    Ok(())
}

/// Empirical `1 - p0` quantile with linear interpolation between order
/// statistics (the default definition in R and NumPy).
pub fn threshold_from_quantile(sample: &Sample, p0: f64) -> Result<f64> {
    check_p0(p0)?;
    let mut sorted = sample.values().to_vec();
    if sorted.is_empty() {
        return Err(invalid("empty sample"));
    }
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * (1.0 - p0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        return Ok(sorted[lo]);
    }
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Labels value `i` with 1 exactly when it is at least `c`.
pub fn binarize(sample: &Sample, c: f64) -> BinarySequence {
    let bits: Vec<u8> = sample.values().iter().map(|&v| (v >= c) as u8).collect();
    let n1 = bits.iter().map(|&b| b as usize).sum();
    BinarySequence {
        bits,
        n1,
        threshold_c: Some(c),
    }
}

/// Which chart to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChartKind {
    /// Signals on a small number of success runs.
    R1,
    /// Signals on a large scan statistic with window `r`.
    R2 { r: usize },
}

impl ChartKind {
    pub fn statistic_name(&self, n: usize) -> String {
        match self {
            ChartKind::R1 => format!("R_{n}"),
            ChartKind::R2 { r } => format!("S_{n}({r})"),
        }
    }

    /// Observed chart statistic for a binary sequence.
    pub fn observe(&self, bits: &[u8]) -> i64 {
        match *self {
            ChartKind::R1 => count_runs(bits) as i64,
            ChartKind::R2 { r } => max_window_count(bits, r) as i64,
        }
    }

    fn is_lower(&self) -> bool {
        matches!(self, ChartKind::R1)
    }
}

/// How a non-randomized limit is picked from the discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRule {
    /// Of the two limits bracketing `alpha`, the one whose attained level
    /// lies closest to `alpha`; ties go to the conservative side.
    #[default]
    Nearest,
    /// The limit whose attained level is the largest not above `alpha`.
    Conservative,
}

/// Chart settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    pub alpha: f64,
    pub p0: f64,
    pub chart: ChartKind,
    pub randomize: bool,
    /// Seeds the boundary draw; only used when `randomize` is set.
    pub seed: u64,
    pub limit_rule: LimitRule,
    /// Replications for the Monte Carlo pmf when exact scan computation
    /// exceeds its budget.
    pub mc_reps: u64,
}

impl ChartConfig {
    pub fn new(alpha: f64, p0: f64, chart: ChartKind) -> Self {
        Self {
            alpha,
            p0,
            chart,
            randomize: false,
            seed: 0,
            limit_rule: LimitRule::default(),
            mc_reps: DEFAULT_MC_REPS,
        }
    }

    pub fn r1(alpha: f64, p0: f64) -> Self {
        Self::new(alpha, p0, ChartKind::R1)
    }

    pub fn r2(alpha: f64, p0: f64, r: usize) -> Self {
        Self::new(alpha, p0, ChartKind::R2 { r })
    }

    pub fn randomized(mut self, seed: u64) -> Self {
        self.randomize = true;
        self.seed = seed;
        self
    }

    pub fn with_limit_rule(mut self, rule: LimitRule) -> Self {
        self.limit_rule = rule;
        self
    }

    /// Checks ranges and returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        check_alpha(self.alpha)?;
        check_p0(self.p0)?;
        if let ChartKind::R2 { r: 0 } = self.chart {
            return Err(invalid("window size r must be at least 1"));
        }
        let mut warnings = Vec::new();
        if !(0.1..=0.8).contains(&self.p0) {
            warnings.push(format!(
                "p0 = {} lies outside the moderate range 0.1-0.8",
                self.p0
            ));
        }
        Ok(warnings)
    }
}

/// A limit with its boundary randomization probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedLimit {
    /// `k` for a lower-tail rule, `s*` for an upper-tail rule.
    pub limit: i64,
    pub gamma: f64,
    /// Non-randomized level at the limit: `P(T <= k)` or `P(T >= s*)`.
    pub attained: f64,
}

impl RandomizedLimit {
    /// Probability that the randomized rule signals under the pmf.
    pub fn level(&self, pmf: &ConditionalPmf, lower: bool) -> f64 {
        let boundary = if lower { self.limit + 1 } else { self.limit - 1 };
        self.attained + self.gamma * pmf.prob(boundary)
    }
}

fn gamma_for(alpha: f64, attained: f64, boundary_mass: f64) -> f64 {
    if boundary_mass > 0.0 {
        ((alpha - attained) / boundary_mass).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Largest `k` with `P(T <= k) <= alpha`, and `gamma` so that
/// `P(T <= k) + gamma P(T = k + 1) = alpha`.
pub fn randomized_lower_limit(pmf: &ConditionalPmf, alpha: f64) -> Result<RandomizedLimit> {
    check_alpha(alpha)?;
    let mut k = pmf.min_value() - 1;
    let mut cum = 0.0;
    for (v, p) in pmf.iter() {
        if cum + p > alpha * (1.0 + LEVEL_EPS) {
            break;
        }
        cum += p;
        k = v;
    }
    Ok(RandomizedLimit {
        limit: k,
        gamma: gamma_for(alpha, cum, pmf.prob(k + 1)),
        attained: cum,
    })
}

/// Smallest `s*` with `P(T >= s*) <= alpha`, and `gamma` so that
/// `P(T >= s*) + gamma P(T = s* - 1) = alpha`.
pub fn randomized_upper_limit(pmf: &ConditionalPmf, alpha: f64) -> Result<RandomizedLimit> {
    check_alpha(alpha)?;
    let mut s = pmf.max_value() + 1;
    let mut cum = 0.0;
    for (v, p) in pmf.iter().collect::<Vec<_>>().into_iter().rev() {
        if cum + p > alpha * (1.0 + LEVEL_EPS) {
            break;
        }
        cum += p;
        s = v;
    }
    Ok(RandomizedLimit {
        limit: s,
        gamma: gamma_for(alpha, cum, pmf.prob(s - 1)),
        attained: cum,
    })
}

/// Limits and reference distribution for one `(n, n1)` under a config.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartLimits {
    pub chart: ChartKind,
    /// Reference pmf. When `censored_below` is `Some(lo)`, all mass below
    /// `lo` is lumped into the atom at `lo - 1`.
    pub pmf: ConditionalPmf,
    pub censored_below: Option<i64>,
    /// Decision limit actually applied.
    pub limit: i64,
    /// Boundary randomization probability (0 when not randomizing).
    pub gamma: f64,
    /// In-control signal probability of the rule as applied.
    pub attained_alpha: f64,
    /// The pmf is a Monte Carlo estimate rather than exact.
    pub approximate: bool,
}

impl ChartLimits {
    pub fn compute(n: usize, n1: usize, config: &ChartConfig) -> Result<Self> {
        Self::compute_with(n, n1, config, &ScanEngine::default())
    }

    pub fn compute_with(n: usize, n1: usize, config: &ChartConfig, engine: &ScanEngine) -> Result<Self> {
        config.validate()?;
        if n1 == 0 || n1 == n {
            return Err(Error::Degenerate { n1, n });
        }
        let (pmf, censored, approximate) = match config.chart {
            ChartKind::R1 => (runs_pmf(RunsQuery::new(n, n1)?)?, None, false),
            ChartKind::R2 { r } => {
                if r > n {
                    return Err(invalid(format!("window r = {r} exceeds n = {n}")));
                }
                match upper_tail_pmf(n, n1, r, config.alpha, engine, config.seed) {
                    Ok((pmf, censored)) => (pmf, censored, false),
                    Err(Error::Capacity { .. }) => {
                        (scan_pmf_mc(n, n1, r, config.mc_reps, config.seed)?, None, true)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let mut limits = Self::from_pmf(config, pmf, approximate)?;
        limits.censored_below = censored;
        Ok(limits)
    }

    pub fn from_pmf(config: &ChartConfig, pmf: ConditionalPmf, approximate: bool) -> Result<Self> {
        let lower = config.chart.is_lower();
        let conservative = if lower {
            randomized_lower_limit(&pmf, config.alpha)?
        } else {
            randomized_upper_limit(&pmf, config.alpha)?
        };
        let (limit, gamma, attained_alpha) = if config.randomize {
            let level = conservative.level(&pmf, lower);
            (conservative.limit, conservative.gamma, level)
        } else {
            let (limit, attained) = match config.limit_rule {
                LimitRule::Conservative => (conservative.limit, conservative.attained),
                LimitRule::Nearest => nearest_limit(&pmf, conservative, config.alpha, lower),
            };
            (limit, 0.0, attained)
        };
        Ok(Self {
            chart: config.chart,
            pmf,
            censored_below: None,
            limit,
            gamma,
            attained_alpha,
            approximate,
        })
    }

    /// Signal decision for an observed statistic and a uniform draw in
    /// `[0, 1)` (ignored unless the rule randomizes).
    pub fn signals(&self, observed: i64, draw: f64) -> bool {
        if self.chart.is_lower() {
            observed <= self.limit || (observed == self.limit + 1 && draw < self.gamma)
        } else {
            observed >= self.limit || (observed == self.limit - 1 && draw < self.gamma)
        }
    }

    /// `P(R_n <= observed)` for R-1, `P(S_n(r) >= observed)` for R-2;
    /// `None` when the value falls in the censored part of the pmf.
    pub fn p_value(&self, observed: i64) -> Option<f64> {
        if self.chart.is_lower() {
            return Some(self.pmf.cdf(observed));
        }
        match self.censored_below {
            Some(lo) if observed < lo => None,
            _ => Some(self.pmf.tail(observed)),
        }
    }
}

/// Upper part of the scan pmf, walking down from `min(r, n1)` until the
/// tail exceeds `alpha`. Below that point the mass is lumped into one atom.
/// Wide windows get the full pmf since it is cheap there.
fn upper_tail_pmf(
    n: usize,
    n1: usize,
    r: usize,
    alpha: f64,
    engine: &ScanEngine,
    pilot_seed: u64,
) -> Result<(ConditionalPmf, Option<i64>)> {
    if 2 * r >= n && engine.route != ScanRoute::Automaton {
        return Ok((engine.pmf(n, n1, r)?, None));
    }
    let top = r.min(n1);
    // The walk needs exact tails down to the first s whose tail exceeds
    // alpha. If the chain becomes too large before that point, a quick pilot
    // says so and the caller falls back to Monte Carlo without the wasted
    // exact work.
    if let Some(s_bad) = (1..=top).rev().find(|&s| chain_size_estimate(n1, r, s) > engine.budget) {
        let capacity = Error::Capacity {
            what: format!("exact upper tail of S_{n}({r}) given n1 = {n1}"),
            required: chain_size_estimate(n1, r, s_bad),
            budget: engine.budget,
        };
        if s_bad == top {
            return Err(capacity);
        }
        let hist = scan_histogram_mc(n, n1, r, PILOT_REPS, pilot_seed)?;
        let above: u64 = hist.iter().skip(s_bad + 1).sum();
        if above as f64 / PILOT_REPS as f64 <= alpha {
            return Err(capacity);
        }
    }
    // tails[i] = P(S >= top - i)
    let mut tails = Vec::new();
    let mut lo = top;
    for s in (1..=top).rev() {
        let t = engine.tail(ScanQuery::new(n, n1, r, s)?)?;
        tails.push(t);
        lo = s;
        if t > alpha * (1.0 + LEVEL_EPS) {
            break;
        }
    }
    let stat = Statistic::Scan { r };
    let mut probs = vec![1.0 - tails.last().copied().unwrap_or(0.0)];
    let mut above = 0.0;
    let mut atoms: Vec<f64> = tails
        .iter()
        .map(|&t| {
            let p = (t - above).max(0.0);
            above = t;
            p
        })
        .collect();
    atoms.reverse();
    probs.extend(atoms);
    let censored = (lo > 1).then_some(lo as i64);
    let pmf = ConditionalPmf::from_atoms(n, n1, stat, lo as i64 - 1, probs)?;
    Ok((pmf, censored))
}

fn nearest_limit(pmf: &ConditionalPmf, conservative: RandomizedLimit, alpha: f64, lower: bool) -> (i64, f64) {
    let (next, next_level) = if lower {
        let k = conservative.limit + 1;
        (k, pmf.cdf(k))
    } else {
        let s = conservative.limit - 1;
        (s, pmf.tail(s))
    };
    let in_support = next >= pmf.min_value() && next <= pmf.max_value();
    if in_support && next_level < 1.0 && (next_level - alpha).abs() < (alpha - conservative.attained).abs() {
        (next, next_level)
    } else {
        (conservative.limit, conservative.attained)
    }
}

/// Outcome of a chart run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDecision {
    /// Absent when the sequence was given directly as bits.
    pub threshold_c: Option<f64>,
    pub n: usize,
    pub n1: usize,
    pub statistic_name: String,
    pub observed: i64,
    pub limit: i64,
    pub gamma: f64,
    /// Uniform draw used at the boundary, present only when randomizing.
    pub draw: Option<f64>,
    pub signal: bool,
    pub p_value: f64,
    pub attained_alpha: f64,
    pub approximate: bool,
    pub warnings: Vec<String>,
}

/// Runs the chart selected by `config.chart` on a sample.
pub fn run_chart(sample: &Sample, config: &ChartConfig) -> Result<(ChartDecision, BinarySequence)> {
    let mut warnings = config.validate()?;
    let c = threshold_from_quantile(sample, config.p0)?;
    let seq = binarize(sample, c);
    let n = seq.len();
    let realized = seq.n1 as f64 / n as f64;
    if (realized - config.p0).abs() > 0.1 {
        warnings.push(format!(
            "realized proportion of ones {realized:.3} differs from p0 = {} by more than 0.1 (ties at the threshold)",
            config.p0
        ));
    }
    let decision = decide(&seq, config, warnings)?;
    Ok((decision, seq))
}

/// Applies the chart to an already labeled sequence.
pub fn decide(seq: &BinarySequence, config: &ChartConfig, warnings: Vec<String>) -> Result<ChartDecision> {
    let n = seq.len();
    let limits = ChartLimits::compute(n, seq.n1, config)?;
    let observed = config.chart.observe(&seq.bits);
    let draw = config
        .randomize
        .then(|| ChaCha8Rng::seed_from_u64(config.seed).random::<f64>());
    let mut warnings = warnings;
    let mut approximate = limits.approximate;
    let p_value = match limits.p_value(observed) {
        Some(p) => p,
        None => {
            let q = ScanQuery::new(n, seq.n1, config_window(config), observed as usize)?;
            match ScanEngine::default().tail(q) {
                Ok(p) => p,
                Err(Error::Capacity { .. }) => {
                    approximate = true;
                    warnings.push(format!(
                        "p-value is a Monte Carlo estimate ({} replications, seed {})",
                        config.mc_reps, config.seed
                    ));
                    scan_tail_mc(q, config.mc_reps, config.seed)?.estimate
                }
                Err(e) => return Err(e),
            }
        }
    };
    if limits.approximate {
        warnings.push(format!(
            "exact scan computation exceeded its budget; limits use a Monte Carlo pmf ({} replications, seed {})",
            config.mc_reps, config.seed
        ));
    }
    Ok(ChartDecision {
        threshold_c: seq.threshold_c,
        n,
        n1: seq.n1,
        statistic_name: config.chart.statistic_name(n),
        observed,
        limit: limits.limit,
        gamma: limits.gamma,
        draw,
        signal: limits.signals(observed, draw.unwrap_or(1.0)),
        p_value: p_value.clamp(0.0, 1.0),
        attained_alpha: limits.attained_alpha,
        approximate,
        warnings,
    })
}

fn config_window(config: &ChartConfig) -> usize {
    match config.chart {
        ChartKind::R2 { r } => r,
        ChartKind::R1 => 0,
    }
}

fn run_checked(sample: &Sample, config: &ChartConfig, want_r1: bool) -> Result<ChartDecision> {
    if want_r1 != matches!(config.chart, ChartKind::R1) {
        return Err(invalid(format!(
            "config selects {:?}, which does not match the requested chart",
            config.chart
        )));
    }
    run_chart(sample, config).map(|(d, _)| d)
}

/// R-1: signal when the number of runs is at or below its lower limit.
pub fn run_chart_r1(sample: &Sample, config: &ChartConfig) -> Result<ChartDecision> {
    run_checked(sample, config, true)
}

/// R-2: signal when the scan statistic is at or above its upper limit.
pub fn run_chart_r2(sample: &Sample, config: &ChartConfig) -> Result<ChartDecision> {
    run_checked(sample, config, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(first: i64, probs: &[f64]) -> ConditionalPmf {
        ConditionalPmf::from_atoms(10, 5, Statistic::Runs, first, probs.to_vec()).unwrap()
    }

    #[test]
    fn quantile_threshold_interpolates() {
        let s = Sample::new((1..=10).map(f64::from).collect()).unwrap();
        let c = threshold_from_quantile(&s, 0.2).unwrap();
        assert!((c - 8.2).abs() < 1e-12);
        assert_eq!(binarize(&s, c).n1, 2);
        let c = threshold_from_quantile(&s, 0.5).unwrap();
        assert!((c - 5.5).abs() < 1e-12);
        assert_eq!(binarize(&s, c).n1, 5);
        assert!(threshold_from_quantile(&s, 0.0).is_err());
    }

    #[test]
    fn ties_classify_as_one() {
        let s = Sample::new(vec![3.0, 7.0, 7.0, 2.0]).unwrap();
        assert_eq!(binarize(&s, 7.0).bits, vec![0, 1, 1, 0]);
        assert_eq!(binarize(&s, 8.0).n1, 0);
        let flat = Sample::new(vec![5.0; 6]).unwrap();
        let c = threshold_from_quantile(&flat, 0.3).unwrap();
        assert_eq!(binarize(&flat, c).n1, 6);
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![1.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        let s = Sample::from_subgroups(&[vec![1.0, 3.0], vec![2.0, 2.0, 5.0]]).unwrap();
        assert_eq!(s.values(), &[2.0, 3.0]);
    }

    #[test]
    fn randomized_lower_limit_arithmetic() {
        let p = pmf(0, &[0.001, 0.001, 0.001, 0.004, 0.993]);
        let lim = randomized_lower_limit(&p, 0.005).unwrap();
        assert_eq!(lim.limit, 2);
        assert!((lim.gamma - 0.5).abs() < 1e-12);
        assert!((lim.level(&p, true) - 0.005).abs() < 1e-12);
        let lim = randomized_lower_limit(&p, 0.003).unwrap();
        assert_eq!(lim.limit, 2);
        assert!(lim.gamma.abs() < 1e-9);
    }

    #[test]
    fn randomized_upper_limit_mirrors() {
        let p = pmf(0, &[0.993, 0.004, 0.001, 0.001, 0.001]);
        let lim = randomized_upper_limit(&p, 0.005).unwrap();
        assert_eq!(lim.limit, 2);
        assert!((lim.gamma - 0.5).abs() < 1e-12);
        assert!((lim.level(&p, false) - 0.005).abs() < 1e-12);
        // even the top atom is too heavy: limit past the support
        let lim = randomized_upper_limit(&pmf(0, &[0.5, 0.5]), 0.1).unwrap();
        assert_eq!(lim.limit, 2);
        assert!((lim.gamma - 0.2).abs() < 1e-12);
    }

    #[test]
    fn nearest_rule_can_exceed_alpha_but_conservative_never_does() {
        let p = pmf(0, &[0.9, 0.048, 0.052]);
        let near = ChartConfig::r2(0.05, 0.5, 3);
        let lim = ChartLimits::from_pmf(&near, p.clone(), false).unwrap();
        assert_eq!(lim.limit, 2);
        assert!((lim.attained_alpha - 0.052).abs() < 1e-12);
        let cons = near.with_limit_rule(LimitRule::Conservative);
        let lim = ChartLimits::from_pmf(&cons, p, false).unwrap();
        assert_eq!(lim.limit, 3);
        assert_eq!(lim.attained_alpha, 0.0);
    }

    #[test]
    fn tail_walk_matches_full_pmf() {
        let engine = ScanEngine::default();
        for &(n, n1, r) in &[(40usize, 8usize, 6usize), (40, 12, 10), (30, 15, 4)] {
            for alpha in [0.005, 0.05, 0.3] {
                let (part, censored) = upper_tail_pmf(n, n1, r, alpha, &engine, 0).unwrap();
                let full = engine.pmf(n, n1, r).unwrap();
                let lo = censored.unwrap_or(full.min_value());
                for v in lo..=full.max_value() + 1 {
                    assert!((part.tail(v) - full.tail(v)).abs() < 1e-12, "{n} {n1} {r} {v}");
                }
                for randomize in [false, true] {
                    let mut cfg = ChartConfig::r2(alpha, 0.5, r);
                    cfg.randomize = randomize;
                    let a = ChartLimits::from_pmf(&cfg, part.clone(), false).unwrap();
                    let b = ChartLimits::from_pmf(&cfg, full.clone(), false).unwrap();
                    assert_eq!(a.limit, b.limit);
                    assert!((a.gamma - b.gamma).abs() < 1e-9);
                    assert!((a.attained_alpha - b.attained_alpha).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn alternating_sequence_never_signals_on_runs() {
        let values: Vec<f64> = (0..50).map(|i| (i % 2) as f64 + i as f64 * 1e-6).collect();
        let s = Sample::new(values).unwrap();
        let d = run_chart_r1(&s, &ChartConfig::r1(0.5, 0.5)).unwrap();
        assert_eq!((d.n1, d.observed), (25, 25));
        assert!((d.p_value - 1.0).abs() < 1e-12);
        assert!(!d.signal);
    }

    #[test]
    fn degenerate_and_mismatched_configs() {
        let s = Sample::new(vec![1.0; 10]).unwrap();
        let err = run_chart_r2(&s, &ChartConfig::r2(0.05, 0.2, 3)).unwrap_err();
        assert_eq!(err, Error::Degenerate { n1: 10, n: 10 });
        let s = Sample::new((0..10).map(f64::from).collect()).unwrap();
        assert!(run_chart_r1(&s, &ChartConfig::r2(0.05, 0.2, 3)).is_err());
        assert!(run_chart_r2(&s, &ChartConfig::r2(0.05, 0.2, 11)).is_err());
        let seq = BinarySequence::parse("0000").unwrap();
        assert_eq!(
            decide(&seq, &ChartConfig::r1(0.05, 0.2), vec![]).unwrap_err(),
            Error::Degenerate { n1: 0, n: 4 }
        );
    }

    #[test]
    fn randomized_draw_is_recorded_and_reproducible() {
        let s = Sample::new((0..20).map(|i| ((i * 7) % 20) as f64).collect()).unwrap();
        let cfg = ChartConfig::r1(0.05, 0.4).randomized(11);
        let a = run_chart_r1(&s, &cfg).unwrap();
        let b = run_chart_r1(&s, &cfg).unwrap();
        assert!(a.draw.is_some());
        assert_eq!(a, b);
        assert!((a.attained_alpha - 0.05).abs() < 1e-12);
    }

    #[test]
    fn warnings_for_extreme_p0() {
        let w = ChartConfig::r1(0.05, 0.9).validate().unwrap();
        assert_eq!(w.len(), 1);
        assert!(ChartConfig::r1(1.0, 0.5).validate().is_err());
        assert!(ChartConfig::r2(0.05, 0.5, 0).validate().is_err());
    }
}
