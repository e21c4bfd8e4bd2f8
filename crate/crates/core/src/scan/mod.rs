//! Conditional distribution of the scan statistic `S_n(r)` (largest number
//! of ones in any `r` consecutive trials) given the success count.
//!
//! `S_n(r) < s` holds exactly when no word that starts and ends with a one,
//! holds `s` ones and has length at most `r` occurs in the sequence, so the
//! cdf is the survival probability of the chain in [`chain`]. The
//! longest success run is the special case `r = s`.

pub mod automaton;
pub mod chain;
pub mod mc;
pub mod pattern;
pub mod wide;

use serde::{Deserialize, Serialize};

pub use automaton::{build_automaton, ending_block_count, BlockId, EndingBlockAutomaton};
pub use chain::{scan_step_kernels, ScanChain, ScanQuery, ScanState};
pub use mc::{scan_histogram_mc, scan_pmf_mc, scan_tail_mc, McEstimate, DEFAULT_MC_REPS};
pub use pattern::{
    enumerate_patterns, enumerate_patterns_with_budget, pattern_count, CompoundPattern,
    SimplePattern,
};
pub use wide::{wide_window_counts, wide_window_pmf};

use crate::error::{invalid, Result};
use crate::pmf::{check_alpha, ConditionalPmf, Percentile, Statistic, LEVEL_EPS};

/// Default cap on materialized transient states for exact computation.
pub const DEFAULT_STATE_BUDGET: u128 = 5_000_000;

/// Above this many potential chain states, `Auto` prefers wide-window
/// counting when it applies.
const AUTO_CHAIN_LIMIT: u128 = 250_000;

/// Which exact method computes scan probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanRoute {
    /// Imbedded chain when small, wide-window counting when `2r >= n` and
    /// the chain would be large.
    #[default]
    Auto,
    /// Always the ending-block chain.
    Automaton,
    /// Always wide-window counting (requires `2r >= n`).
    WideWindow,
}

/// Exact scan computations under a state budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanEngine {
    pub budget: u128,
    pub route: ScanRoute,
}

impl Default for ScanEngine {
    fn default() -> Self {
        Self {
            budget: DEFAULT_STATE_BUDGET,
            route: ScanRoute::Auto,
        }
    }
}

/// Upper bound on transient chain states, `(n1 + 1) * blocks`.
pub(crate) fn chain_size_estimate(n1: usize, r: usize, s: usize) -> u128 {
    ending_block_count(r, s).saturating_mul(n1 as u128 + 1)
}

impl ScanEngine {
    pub fn with_route(route: ScanRoute) -> Self {
        Self {
            route,
            ..Self::default()
        }
    }

    fn use_wide(&self, n: usize, n1: usize, r: usize, sizes: impl Iterator<Item = usize>) -> Result<bool> {
        let wide_ok = 2 * r >= n;
        match self.route {
            ScanRoute::Automaton => Ok(false),
            ScanRoute::WideWindow if !wide_ok => Err(invalid(format!(
                "wide-window counting needs 2r >= n, got r = {r}, n = {n}"
            ))),
            ScanRoute::WideWindow => Ok(true),
            ScanRoute::Auto => {
                Ok(wide_ok && sizes.map(|s| chain_size_estimate(n1, r, s)).sum::<u128>() > AUTO_CHAIN_LIMIT)
            }
        }
    }

    /// `P(S_n(r) < s | N1 = n1)`.
    pub fn cdf_at(&self, query: ScanQuery) -> Result<f64> {
        let ScanQuery { n, n1, r, s } = query;
        if n1 == 0 || s > r.min(n1) {
            return Ok(1.0);
        }
        if s == 1 {
            return Ok(0.0);
        }
        if self.use_wide(n, n1, r, std::iter::once(s))? {
            return Ok(wide_window_pmf(n, n1, r)?.cdf(s as i64 - 1));
        }
        let automaton = EndingBlockAutomaton::for_scan(r, s, self.budget)?;
        ScanChain::new(query, &automaton, self.budget)?.survival()
    }

    /// `P(S_n(r) >= s | N1 = n1)`.
    pub fn tail(&self, query: ScanQuery) -> Result<f64> {
        Ok((1.0 - self.cdf_at(query)?).clamp(0.0, 1.0))
    }

    /// Full pmf of `S_n(r)` from successive cdf differences.
    pub fn pmf(&self, n: usize, n1: usize, r: usize) -> Result<ConditionalPmf> {
        chain::check_window(n, n1, r)?;
        let stat = Statistic::Scan { r };
        if n1 == 0 {
            return Ok(ConditionalPmf::point_mass(n, n1, stat, 0));
        }
        if r == n {
            return Ok(ConditionalPmf::point_mass(n, n1, stat, n1 as i64));
        }
        let top = r.min(n1);
        if self.use_wide(n, n1, r, 2..=top)? {
            return wide_window_pmf(n, n1, r);
        }
        // below[v] = P(S < v) for v = 0..=top+1
        let mut below = Vec::with_capacity(top + 2);
        below.push(0.0);
        for v in 1..=top {
            below.push(self.cdf_at(ScanQuery::new(n, n1, r, v)?)?);
        }
        below.push(1.0);
        let probs = below.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(ConditionalPmf::from_atoms(n, n1, stat, 0, probs)?.trimmed())
    }

    /// Smallest `s` with `P(S_n(r) >= s | n1) <= alpha`, found by walking
    /// down from `min(r, n1)` so only the upper tail is ever computed.
    pub fn upper_percentile(&self, n: usize, n1: usize, r: usize, alpha: f64) -> Result<Percentile> {
        chain::check_window(n, n1, r)?;
        check_alpha(alpha)?;
        let top = r.min(n1);
        let mut best = Percentile {
            value: top as i64 + 1,
            attained: 0.0,
        };
        for s in (1..=top).rev() {
            let tail = self.tail(ScanQuery::new(n, n1, r, s)?)?;
            if tail <= alpha * (1.0 + LEVEL_EPS) {
                best = Percentile {
                    value: s as i64,
                    attained: tail,
                };
            } else {
                break;
            }
        }
        Ok(best)
    }

    /// `P(L_n >= len | N1 = n1)` for the longest success run.
    pub fn longest_run_tail(&self, n: usize, n1: usize, len: usize) -> Result<f64> {
        if len == 0 {
            return Ok(1.0);
        }
        if len > n {
            return Ok(0.0);
        }
        self.tail(ScanQuery::new(n, n1, len, len)?)
    }

    /// Pmf of the longest success run.
    pub fn longest_run_pmf(&self, n: usize, n1: usize) -> Result<ConditionalPmf> {
        chain::check_window(n, n1, 1)?;
        if n1 == 0 {
            return Ok(ConditionalPmf::point_mass(n, n1, Statistic::LongestRun, 0));
        }
        // tails[l] = P(L >= l) for l = 0..=n1+1
        let mut tails = vec![1.0];
        for len in 1..=n1 {
            tails.push(self.longest_run_tail(n, n1, len)?);
        }
        tails.push(0.0);
        let probs = tails.windows(2).map(|w| w[0] - w[1]).collect();
        Ok(ConditionalPmf::from_atoms(n, n1, Statistic::LongestRun, 0, probs)?.trimmed())
    }
}

/// `P(S_n(r) < s | N1 = n1)` with the default engine.
pub fn scan_cdf_at(query: ScanQuery) -> Result<f64> {
    ScanEngine::default().cdf_at(query)
}

/// `P(S_n(r) >= s | N1 = n1)` with the default engine.
pub fn scan_tail(query: ScanQuery) -> Result<f64> {
    ScanEngine::default().tail(query)
}

pub fn scan_pmf(n: usize, n1: usize, r: usize) -> Result<ConditionalPmf> {
    ScanEngine::default().pmf(n, n1, r)
}

pub fn scan_upper_percentile(n: usize, n1: usize, r: usize, alpha: f64) -> Result<Percentile> {
    ScanEngine::default().upper_percentile(n, n1, r, alpha)
}

pub fn longest_run_pmf(n: usize, n1: usize) -> Result<ConditionalPmf> {
    ScanEngine::default().longest_run_pmf(n, n1)
}

/// Largest number of ones in any `r` consecutive positions (all ones when
/// `r` covers the whole sequence).
pub fn max_window_count(bits: &[u8], r: usize) -> usize {
    if r == 0 {
        return 0;
    }
    if r >= bits.len() {
        return bits.iter().map(|&b| b as usize).sum();
    }
    let mut count: usize = bits[..r].iter().map(|&b| b as usize).sum();
    let mut best = count;
    for i in r..bits.len() {
        count = count + bits[i] as usize - bits[i - r] as usize;
        best = best.max(count);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn q(n: usize, n1: usize, r: usize, s: usize) -> ScanQuery {
        ScanQuery::new(n, n1, r, s).unwrap()
    }

    #[test]
    fn trivial_cdf_values() {
        assert_eq!(scan_cdf_at(q(20, 4, 6, 5)).unwrap(), 1.0);
        assert_eq!(scan_cdf_at(q(20, 4, 6, 1)).unwrap(), 0.0);
        assert_eq!(scan_cdf_at(q(20, 0, 6, 1)).unwrap(), 1.0);
        // s = 1 with n1 = 0 and with r = n
        assert_eq!(scan_tail(q(5, 0, 5, 1)).unwrap(), 0.0);
        assert!(ScanQuery::new(5, 2, 6, 1).is_err());
        assert!(ScanQuery::new(5, 2, 3, 4).is_err());
    }

    #[test]
    fn ones_three_apart() {
        // ones pairwise >= 3 apart among 8 positions: C(4, 3) placements of 56
        let p = scan_cdf_at(q(8, 3, 3, 2)).unwrap();
        assert!((p - 4.0 / 56.0).abs() < 1e-12);
    }

    #[test]
    fn piston_tail_probabilities() {
        let cases = [((40, 8, 6, 5), 0.0123), ((40, 12, 10, 7), 0.0525), ((40, 8, 4, 4), 0.0253)];
        for ((n, n1, r, s), want) in cases {
            let got = scan_tail(q(n, n1, r, s)).unwrap();
            assert!((got - want).abs() < 5e-5, "{n} {n1} {r} {s}: {got}");
        }
    }

    #[test]
    fn upper_percentiles() {
        let p = scan_upper_percentile(40, 8, 6, 0.05).unwrap();
        assert_eq!(p.value, 5);
        assert!((p.attained - 0.0123).abs() < 5e-5);
        // 0.0525 exceeds 0.05, so the at-most-alpha limit moves up to 8
        let p = scan_upper_percentile(40, 12, 10, 0.05).unwrap();
        assert_eq!(p.value, 8);
        assert!(p.attained <= 0.05);
        // alpha just below one: the smallest support point has tail 1
        let pmf = scan_pmf(12, 5, 4).unwrap();
        let p = scan_upper_percentile(12, 5, 4, 1.0 - 1e-9).unwrap();
        assert_eq!(p.value, pmf.min_value() + 1);
        assert!((p.attained - pmf.tail(pmf.min_value() + 1)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pmfs() {
        assert_eq!(scan_pmf(10, 0, 3).unwrap().support(), &[0]);
        assert_eq!(scan_pmf(10, 6, 10).unwrap().support(), &[6]);
        let pmf = scan_pmf(10, 5, 4).unwrap();
        assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn routes_agree_on_wide_windows() {
        let chain = ScanEngine::with_route(ScanRoute::Automaton);
        let wide = ScanEngine::with_route(ScanRoute::WideWindow);
        for &(n, n1, r) in &[(30usize, 12usize, 16usize), (24, 9, 12), (20, 14, 19), (21, 7, 11)] {
            let a = chain.pmf(n, n1, r).unwrap();
            let b = wide.pmf(n, n1, r).unwrap();
            for v in 0..=r as i64 {
                assert!((a.prob(v) - b.prob(v)).abs() < 1e-12, "n={n} n1={n1} r={r} v={v}");
            }
        }
        assert!(wide.pmf(30, 12, 10).is_err());
    }

    #[test]
    fn wide_route_handles_half_windows_at_fifty() {
        let pmf = scan_pmf(50, 25, 25).unwrap();
        assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = scan_upper_percentile(50, 25, 40, 0.005).unwrap();
        assert!(p.attained <= 0.005);
    }

    #[test]
    fn budget_exhaustion_is_a_capacity_error() {
        let tight = ScanEngine {
            budget: 1_000,
            route: ScanRoute::Automaton,
        };
        assert!(matches!(tight.cdf_at(q(100, 50, 25, 13)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn longest_run_matches_scan_special_case() {
        let pmf = longest_run_pmf(40, 8).unwrap();
        assert!((pmf.tail(4) - 0.0253).abs() < 5e-5);
        assert_eq!(pmf.max_value(), 8);
    }

    #[test]
    fn sliding_window_maximum() {
        assert_eq!(max_window_count(&[1, 0, 1, 1, 0, 1], 3), 2);
        assert_eq!(max_window_count(&[1, 1, 0, 1, 1, 1], 4), 3);
        assert_eq!(max_window_count(&[0, 1], 5), 1);
    }
}
