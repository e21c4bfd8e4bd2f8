//! Where did the chart fire? Highest-count windows and longest success runs,
//! each with a conditional p-value from the exact scan distribution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::charting::BinarySequence;
use crate::error::{invalid, Result};
use crate::scan::{max_window_count, ScanEngine};

/// Default cut used when filtering reports.
pub const DEFAULT_REPORT_CUTOFF: f64 = 0.1;

/// A window `start..=end` (1-based) of length `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub start: usize,
    pub end: usize,
    pub count: usize,
    /// `P(S_n(r) >= count | n1)`.
    pub p_value: f64,
    /// Midpoint `ceil((start + end) / 2)`, a proxy for the change location.
    pub center: usize,
}

/// A maximal run of ones at `start..=end` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub start: usize,
    pub end: usize,
    pub length: usize,
    /// `P(L_n >= length | n1)`.
    pub p_value: f64,
}

/// The `k` windows of length `r` holding the most ones, ties broken by
/// earlier start.
pub fn topk_windows(seq: &BinarySequence, r: usize, k: usize) -> Result<Vec<WindowReport>> {
    topk_windows_with(seq, r, k, &ScanEngine::default())
}

pub fn topk_windows_with(
    seq: &BinarySequence,
    r: usize,
    k: usize,
    engine: &ScanEngine,
) -> Result<Vec<WindowReport>> {
    let n = seq.len();
    if r == 0 || r > n {
        return Err(invalid(format!("window r = {r} outside 1..={n}")));
    }
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    let mut counts = Vec::with_capacity(n - r + 1);
    let mut c: usize = seq.bits[..r].iter().map(|&b| b as usize).sum();
    counts.push(c);
    for i in r..n {
        c = c + seq.bits[i] as usize - seq.bits[i - r] as usize;
        counts.push(c);
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    assert_eq!(best, max_window_count(&seq.bits, r), "best window must equal the scan statistic");

    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order.truncate(k);

    let mut reports = Vec::with_capacity(order.len());
    for j in order {
        let start = j + 1;
        let end = j + r;
        reports.push(WindowReport {
            start,
            end,
            count: counts[j],
            p_value: window_tail(seq, r, counts[j], engine)?,
            center: (start + end).div_ceil(2),
        });
    }
    Ok(reports)
}

fn window_tail(seq: &BinarySequence, r: usize, count: usize, engine: &ScanEngine) -> Result<f64> {
    if count == 0 {
        return Ok(1.0);
    }
    engine.tail(crate::scan::ScanQuery::new(seq.len(), seq.n1, r, count)?)
}

/// Maximal runs of ones as `(start, end)` pairs, 1-based, left to right.
pub fn maximal_runs(bits: &[u8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < bits.len() {
        if bits[i] == 1 {
            let start = i;
            while i < bits.len() && bits[i] == 1 {
                i += 1;
            }
            runs.push((start + 1, i));
        } else {
            i += 1;
        }
    }
    runs
}

/// The `k` longest maximal runs, ties broken by earlier start.
pub fn longest_runs(seq: &BinarySequence, k: usize) -> Result<Vec<RunReport>> {
    longest_runs_with(seq, k, &ScanEngine::default())
}

pub fn longest_runs_with(seq: &BinarySequence, k: usize, engine: &ScanEngine) -> Result<Vec<RunReport>> {
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    let mut runs = maximal_runs(&seq.bits);
    runs.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    runs.truncate(k);
    runs.into_iter()
        .map(|(start, end)| {
            let length = end - start + 1;
            Ok(RunReport {
                start,
                end,
                length,
                p_value: engine.longest_run_tail(seq.len(), seq.n1, length)?,
            })
        })
        .collect()
}

/// Windows and runs together with the indices they cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub windows: Vec<WindowReport>,
    pub runs: Vec<RunReport>,
    /// Sorted 1-based indices covered by any reported window.
    pub window_union: Vec<usize>,
    /// Sorted 1-based indices covered by any reported run.
    pub run_union: Vec<usize>,
}

impl LocalizationReport {
    /// Top-`k` windows (when `r` is given) and top-`k` runs, keeping entries
    /// with p-value below `cutoff`.
    pub fn build(seq: &BinarySequence, r: Option<usize>, k: usize, cutoff: f64) -> Result<Self> {
        let windows = match r {
            Some(r) => topk_windows(seq, r, k)?,
            None => Vec::new(),
        };
        let runs = longest_runs(seq, k)?;
        let windows: Vec<_> = windows.into_iter().filter(|w| w.p_value < cutoff).collect();
        let runs: Vec<_> = runs.into_iter().filter(|w| w.p_value < cutoff).collect();
        let window_union = union(windows.iter().map(|w| (w.start, w.end)));
        let run_union = union(runs.iter().map(|w| (w.start, w.end)));
        Ok(Self {
            windows,
            runs,
            window_union,
            run_union,
        })
    }
}

fn union(spans: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    spans
        .flat_map(|(a, b)| a..=b)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}
