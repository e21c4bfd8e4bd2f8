//! Brute-force ground truth: enumerate every arrangement of `n1` ones among
//! `n` positions and tabulate a statistic by its definition.
//!
//! Nothing here is shared with the chain-based code paths.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pmf::{ConditionalPmf, Statistic};

/// Largest number of arrangements the oracle will walk.
pub const ORACLE_BUDGET: u64 = 1_000_000;

/// Statistic tabulated by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StatisticKind {
    RunsCount,
    ScanMax { r: usize },
    LongestRun,
    WindowCountTail { r: usize, s: usize },
}

fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn evaluate(bits: &[u8], kind: StatisticKind) -> usize {
    match kind {
        StatisticKind::RunsCount => {
            // a run starts at i when bits[i] = 1 and (i = 0 or bits[i-1] = 0)
            (0..bits.len())
                .filter(|&i| bits[i] == 1 && (i == 0 || bits[i - 1] == 0))
                .count()
        }
        StatisticKind::LongestRun => {
            let mut best = 0;
            for start in 0..bits.len() {
                let len = bits[start..].iter().take_while(|&&b| b == 1).count();
                best = best.max(len);
            }
            best
        }
        StatisticKind::ScanMax { r } => window_max(bits, r),
        StatisticKind::WindowCountTail { r, s } => (window_max(bits, r) >= s) as usize,
    }
}

fn window_max(bits: &[u8], r: usize) -> usize {
    let last_start = bits.len().saturating_sub(r);
    (0..=last_start)
        .map(|t| bits[t..(t + r).min(bits.len())].iter().filter(|&&b| b == 1).count())
        .max()
        .unwrap_or(0)
}

/// Integer counts of each statistic value over all `C(n, n1)` arrangements.
pub fn enumerate_counts(n: usize, n1: usize, kind: StatisticKind) -> Result<Vec<u64>> {
    if n == 0 || n > 63 || n1 > n {
        return Err(invalid(format!("oracle needs 1 <= n <= 63 and n1 <= n, got n = {n}, n1 = {n1}")));
    }
    match kind {
        StatisticKind::ScanMax { r } | StatisticKind::WindowCountTail { r, .. } if r == 0 || r > n => {
            return Err(invalid(format!("window {r} outside 1..={n}")));
        }
        _ => {}
    }
    let total = choose(n as u64, n1 as u64);
    if total > ORACLE_BUDGET {
        return Err(Error::Capacity {
            what: format!("enumeration of C({n}, {n1}) arrangements"),
            required: total as u128,
            budget: ORACLE_BUDGET as u128,
        });
    }
    let mut counts = vec![0u64; n + 1];
    let mut bits = vec![0u8; n];
    let mut visited = 0u64;
    let limit = 1u64 << n;
    // Gosper's hack: successive masks with exactly n1 bits set
    let mut mask: u64 = if n1 == 0 { 0 } else { (1u64 << n1) - 1 };
    loop {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((mask >> i) & 1) as u8;
        }
        counts[evaluate(&bits, kind)] += 1;
        visited += 1;
        if mask == 0 {
            break;
        }
        let low = mask & mask.wrapping_neg();
        let ripple = mask + low;
        mask = (((ripple ^ mask) >> 2) / low) | ripple;
        if mask >= limit {
            break;
        }
    }
    assert_eq!(visited, total, "enumeration must visit every arrangement once");
    Ok(counts)
}

/// Exact pmf by enumeration; atoms are integer counts over `C(n, n1)`.
pub fn enumerate_pmf(n: usize, n1: usize, kind: StatisticKind) -> Result<ConditionalPmf> {
    let counts = enumerate_counts(n, n1, kind)?;
    let total = choose(n as u64, n1 as u64) as f64;
    let statistic = match kind {
        StatisticKind::RunsCount => Statistic::Runs,
        StatisticKind::ScanMax { r } => Statistic::Scan { r },
        StatisticKind::LongestRun => Statistic::LongestRun,
        StatisticKind::WindowCountTail { r, s } => Statistic::ScanIndicator { r, s },
    };
    let first = counts.iter().position(|&c| c > 0).unwrap_or(0);
    let last = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    let probs = counts[first..=last].iter().map(|&c| c as f64 / total).collect();
    ConditionalPmf::from_atoms(n, n1, statistic, first as i64, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_choose_three_runs() {
        let counts = enumerate_counts(5, 3, StatisticKind::RunsCount).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 10);
        assert_eq!(counts[2], 6);
        let pmf = enumerate_pmf(5, 3, StatisticKind::RunsCount).unwrap();
        assert!((pmf.prob(2) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_arrangement() {
        for kind in [
            StatisticKind::RunsCount,
            StatisticKind::LongestRun,
            StatisticKind::ScanMax { r: 2 },
            StatisticKind::WindowCountTail { r: 2, s: 2 },
        ] {
            let counts = enumerate_counts(3, 3, kind).unwrap();
            assert_eq!(counts.iter().sum::<u64>(), 1);
        }
        assert_eq!(enumerate_pmf(3, 3, StatisticKind::LongestRun).unwrap().support(), &[3]);
        assert_eq!(enumerate_pmf(4, 0, StatisticKind::RunsCount).unwrap().support(), &[0]);
    }

    #[test]
    fn spaced_ones_by_stars_and_bars() {
        let pmf = enumerate_pmf(8, 3, StatisticKind::ScanMax { r: 3 }).unwrap();
        assert!((pmf.cdf(1) - 4.0 / 56.0).abs() < 1e-15);
        assert_eq!(choose(4, 3), 4);
    }

    #[test]
    fn refuses_large_enumerations() {
        assert!(matches!(
            enumerate_counts(40, 20, StatisticKind::RunsCount),
            Err(Error::Capacity { .. })
        ));
        assert!(enumerate_counts(5, 6, StatisticKind::RunsCount).is_err());
        assert!(enumerate_counts(5, 2, StatisticKind::ScanMax { r: 6 }).is_err());
    }
}
