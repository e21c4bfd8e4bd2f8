//! Monte Carlo estimates of the scan distribution for queries beyond the
//! exact budget.
//!
//! Replication `i` draws its permutation from ChaCha8 stream `i` under the
//! caller's seed, so results do not depend on how work is split across
//! threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{check_window, ScanQuery};
use super::max_window_count;
use crate::error::{invalid, Result};
use crate::pmf::{ConditionalPmf, Statistic};

/// Replications used when a caller does not choose.
pub const DEFAULT_MC_REPS: u64 = 200_000;
pub const MIN_MC_REPS: u64 = 1_000;

/// A Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

impl McEstimate {
    pub(crate) fn from_count(hits: u64, reps: u64, seed: u64) -> Self {
        let p = hits as f64 / reps as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / reps as f64).sqrt(),
            reps,
            seed,
        }
    }
}

/// Random stream for replication `index` under `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Histogram of `S_n(r)` over `reps` uniform random arrangements of `n1`
/// ones among `n` positions. Entry `v` counts replications with maximum `v`.
pub fn scan_histogram_mc(n: usize, n1: usize, r: usize, reps: u64, seed: u64) -> Result<Vec<u64>> {
    check_window(n, n1, r)?;
    if reps < MIN_MC_REPS {
        return Err(invalid(format!("need at least {MIN_MC_REPS} replications, got {reps}")));
    }
    let top = r.min(n1);
    let template: Vec<u8> = (0..n).map(|i| (i < n1) as u8).collect();
    let hist = (0..reps)
        .into_par_iter()
        .fold(
            || (vec![0u64; top + 1], template.clone()),
            |(mut hist, mut bits), i| {
                bits.copy_from_slice(&template);
                bits.shuffle(&mut replication_rng(seed, i));
                hist[max_window_count(&bits, r)] += 1;
                (hist, bits)
            },
        )
        .map(|(hist, _)| hist)
        .reduce(
            || vec![0u64; top + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

/// Estimate of `P(S_n(r) >= s | N1 = n1)`.
pub fn scan_tail_mc(query: ScanQuery, reps: u64, seed: u64) -> Result<McEstimate> {
    let hist = scan_histogram_mc(query.n, query.n1, query.r, reps, seed)?;
    let hits = hist.iter().skip(query.s).sum();
    Ok(McEstimate::from_count(hits, reps, seed))
}

/// Empirical pmf of `S_n(r)` from a Monte Carlo histogram.
pub fn scan_pmf_mc(n: usize, n1: usize, r: usize, reps: u64, seed: u64) -> Result<ConditionalPmf> {
    let hist = scan_histogram_mc(n, n1, r, reps, seed)?;
    let probs = hist.iter().map(|&c| c as f64 / reps as f64).collect();
    Ok(ConditionalPmf::from_atoms(n, n1, Statistic::Scan { r }, 0, probs)?.trimmed())
}
