//! Conditional distribution of the number of success runs given the success
//! count, computed with the zero-insertion chain.
//!
//! Start from a row of `n1` ones and insert the `n2 = n - n1` zeros one at a
//! time into a uniformly chosen gap. The chain tracks the current number of
//! runs `i`; inserting a zero between two adjacent ones (there are `n1 - i`
//! such gaps among the `n1 + t` available at step `t`) splits a run.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fmci::{propagate, DistributionVector, KernelKind, StateSpace, StepKernel};
use crate::pmf::{lower_percentile, ConditionalPmf, Percentile, Statistic};

/// `n` trials of which `n1` are successes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunsQuery {
    pub n: usize,
    pub n1: usize,
}

impl RunsQuery {
    pub fn new(n: usize, n1: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        if n1 > n {
            return Err(invalid(format!("n1 = {n1} exceeds n = {n}")));
        }
        Ok(Self { n, n1 })
    }

    pub fn n2(&self) -> usize {
        self.n - self.n1
    }

    /// Largest attainable number of runs, `min(n1, n2 + 1)`.
    pub fn max_runs(&self) -> usize {
        self.n1.min(self.n2() + 1)
    }
}

/// States `1..=d` of the insertion chain.
pub fn runs_state_space(query: RunsQuery) -> StateSpace<usize> {
    StateSpace::new((1..=query.max_runs()).collect(), []).expect("labels are distinct")
}

/// Transition kernel for inserting the `t`-th zero.
pub fn runs_step_kernel(query: RunsQuery, t: usize) -> Result<StepKernel> {
    if query.n1 == 0 {
        return Err(invalid("the insertion chain needs at least one success"));
    }
    if t == 0 || t > query.n2() {
        return Err(invalid(format!(
            "step {t} outside 1..={} for n = {}, n1 = {}",
            query.n2(),
            query.n,
            query.n1
        )));
    }
    let space = runs_state_space(query);
    runs_step_kernel_in(&space, query, t)
}

fn runs_step_kernel_in(space: &StateSpace<usize>, query: RunsQuery, t: usize) -> Result<StepKernel> {
    let n1 = query.n1;
    let d = query.max_runs();
    let denom = (n1 + t) as f64;
    let mut entries = Vec::with_capacity(2 * d);
    for i in 1..=d {
        let from = i - 1;
        if i <= t {
            // advance + stay numerators add up to the number of gaps
            assert_eq!((n1 - i) + (t + i), n1 + t);
            let advance = n1 - i;
            if advance > 0 {
                debug_assert!(i < d, "a split would exceed the maximum run count");
                entries.push((from, from + 1, advance as f64 / denom));
            }
            entries.push((from, from, (t + i) as f64 / denom));
        } else {
            entries.push((from, from, 1.0));
        }
    }
    let kernel = StepKernel::from_indexed(space, t, KernelKind::Stochastic, entries)?;
    assert!(kernel.max_out_degree() <= 2);
    Ok(kernel)
}

/// Exact `P(R_n = r | N1 = n1)` for every attainable `r`.
pub fn runs_pmf(query: RunsQuery) -> Result<ConditionalPmf> {
    let RunsQuery { n, n1 } = query;
    if n1 == 0 {
        return Ok(ConditionalPmf::point_mass(n, n1, Statistic::Runs, 0));
    }
    if query.n2() == 0 {
        return Ok(ConditionalPmf::point_mass(n, n1, Statistic::Runs, 1));
    }
    let space = runs_state_space(query);
    let start = DistributionVector::point(&space, &1)?;
    let kernels = (1..=query.n2())
        .map(|t| runs_step_kernel_in(&space, query, t))
        .collect::<Result<Vec<_>>>()?;
    let end = propagate(&start, &kernels)?;
    ConditionalPmf::from_atoms(n, n1, Statistic::Runs, 1, end.mass().to_vec())
}

/// Largest `k` with `P(R_n <= k | n1) <= alpha`, plus the attained mass.
pub fn runs_lower_percentile(query: RunsQuery, alpha: f64) -> Result<Percentile> {
    lower_percentile(&runs_pmf(query)?, alpha)
}

/// Number of maximal blocks of ones.
pub fn count_runs(bits: &[u8]) -> usize {
    let mut runs = 0;
    let mut previous = 0u8;
    for &b in bits {
        if b == 1 && previous == 0 {
            runs += 1;
        }
        previous = b;
    }
    runs
}
