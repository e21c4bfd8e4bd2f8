//! Conditional probability mass functions of integer-valued statistics
//! given the success count.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack used when comparing accumulated probabilities against a
/// nominal level.
pub(crate) const LEVEL_EPS: f64 = 1e-12;

/// Which statistic a [`ConditionalPmf`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Statistic {
    /// Number of success runs.
    Runs,
    /// Maximum number of ones in any window of `r` consecutive trials.
    Scan { r: usize },
    /// Length of the longest success run.
    LongestRun,
    /// Indicator that some window of length `r` holds at least `s` ones.
    ScanIndicator { r: usize, s: usize },
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::Runs => "R_n".to_string(),
            Statistic::Scan { r } => format!("S_n({r})"),
            Statistic::LongestRun => "L_n".to_string(),
            Statistic::ScanIndicator { r, s } => format!("1{{S_n({r}) >= {s}}}"),
        }
    }
}

/// Exact distribution of a statistic given `n` trials with `n1` successes.
///
/// `support` is strictly increasing and contiguous; `probs[i]` is the mass
/// at `support[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    pub n: usize,
    pub n1: usize,
    pub statistic: Statistic,
    support: Vec<i64>,
    probs: Vec<f64>,
}

impl ConditionalPmf {
    /// Builds a pmf over the contiguous support `first..first + probs.len()`.
    /// Atoms above `-1e-12` are clamped at zero; the total must be one within
    /// `1e-10`.
    pub fn from_atoms(
        n: usize,
        n1: usize,
        statistic: Statistic,
        first: i64,
        mut probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("a pmf needs at least one atom"));
        }
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::Validation(format!(
                    "atom {} has mass {p}",
                    first + i as i64
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("pmf sums to {total}")));
        }
        let support = (0..probs.len() as i64).map(|i| first + i).collect();
        Ok(Self {
            n,
            n1,
            statistic,
            support,
            probs,
        })
    }

    pub fn point_mass(n: usize, n1: usize, statistic: Statistic, value: i64) -> Self {
        Self {
            n,
            n1,
            statistic,
            support: vec![value],
            probs: vec![1.0],
        }
    }

    /// Drops zero-mass atoms from both ends of the support.
    pub(crate) fn trimmed(mut self) -> Self {
        while self.probs.len() > 1 && self.probs[0] == 0.0 {
            self.probs.remove(0);
            self.support.remove(0);
        }
        while self.probs.len() > 1 && *self.probs.last().unwrap() == 0.0 {
            self.probs.pop();
            self.support.pop();
        }
        self
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_value(&self) -> i64 {
        self.support[0]
    }

    pub fn max_value(&self) -> i64 {
        *self.support.last().unwrap()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// `P(T = value)`, zero outside the support.
    pub fn prob(&self, value: i64) -> f64 {
        if value < self.min_value() || value > self.max_value() {
            return 0.0;
        }
        self.probs[(value - self.min_value()) as usize]
    }

    /// `P(T <= value)`.
    pub fn cdf(&self, value: i64) -> f64 {
        if value < self.min_value() {
            return 0.0;
        }
        if value >= self.max_value() {
            return 1.0;
        }
        let upto = (value - self.min_value()) as usize;
        self.probs[..=upto].iter().sum::<f64>().min(1.0)
    }

    /// `P(T >= value)`.
    pub fn tail(&self, value: i64) -> f64 {
        if value <= self.min_value() {
            return 1.0;
        }
        if value > self.max_value() {
            return 0.0;
        }
        let from = (value - self.min_value()) as usize;
        self.probs[from..].iter().sum::<f64>().min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v as f64 * p).sum()
    }
}

/// A percentile together with the probability actually attained at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentile {
    pub value: i64,
    pub attained: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Largest `k` with `P(T <= k) <= alpha`; `min - 1` with attained `0` when
/// even the smallest atom is too heavy.
pub fn lower_percentile(pmf: &ConditionalPmf, alpha: f64) -> Result<Percentile> {
    check_alpha(alpha)?;
    let mut best = Percentile {
        value: pmf.min_value() - 1,
        attained: 0.0,
    };
    let mut cum = 0.0;
    for (v, p) in pmf.iter() {
        cum += p;
        if cum <= alpha * (1.0 + LEVEL_EPS) {
            best = Percentile {
                value: v,
                attained: cum.min(1.0),
            };
        } else {
            break;
        }
    }
    Ok(best)
}

/// Smallest `s` with `P(T >= s) <= alpha`; `max + 1` with attained `0` when
/// even the largest atom is too heavy.
pub fn upper_percentile(pmf: &ConditionalPmf, alpha: f64) -> Result<Percentile> {
    check_alpha(alpha)?;
    let mut best = Percentile {
        value: pmf.max_value() + 1,
        attained: 0.0,
    };
    let mut cum = 0.0;
    for (v, p) in pmf.iter().collect::<Vec<_>>().into_iter().rev() {
        cum += p;
        if cum <= alpha * (1.0 + LEVEL_EPS) {
            best = Percentile {
                value: v,
                attained: cum.min(1.0),
            };
        } else {
            break;
        }
    }
    Ok(best)
}
