//! The imbedded chain on `(ones drawn so far, ending block)`.
//!
//! Trials are drawn one by one without replacement from an urn holding `n1`
//! ones and `n - n1` zeros. At step `t` a one is drawn with probability
//! `(n1 - m) / (n - t + 1)` and a zero with `(n - n1 - t + m + 1) / (n - t + 1)`.
//! Transitions into the absorbing block are left out of the kernels, so the
//! mass that survives all `n` steps is `P(S_n(r) < s | N1 = n1)`.

use serde::{Deserialize, Serialize};

use super::automaton::{BlockId, EndingBlockAutomaton};
use crate::error::{invalid, Error, Result};
use crate::fmci::{survival_probability, DistributionVector, KernelKind, StateSpace, StepKernel};

/// `n` trials, `n1` ones, window `r`, count threshold `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScanQuery {
    pub n: usize,
    pub n1: usize,
    pub r: usize,
    pub s: usize,
}

impl ScanQuery {
    pub fn new(n: usize, n1: usize, r: usize, s: usize) -> Result<Self> {
        check_window(n, n1, r)?;
        if s == 0 || s > r {
            return Err(invalid(format!("need 1 <= s <= r, got r = {r}, s = {s}")));
        }
        Ok(Self { n, n1, r, s })
    }
}

pub(crate) fn check_window(n: usize, n1: usize, r: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if n1 > n {
        return Err(invalid(format!("n1 = {n1} exceeds n = {n}")));
    }
    if r == 0 || r > n {
        return Err(invalid(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    Ok(())
}

/// A state of the imbedded chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanState {
    Transient { ones: u32, block: BlockId },
    Absorbed,
}

/// The reachable part of the chain for one query, with kernels generated on
/// demand.
pub struct ScanChain<'a> {
    query: ScanQuery,
    automaton: &'a EndingBlockAutomaton,
    space: StateSpace<ScanState>,
    /// Dense `(ones, block) -> state` map; `u32::MAX` marks unreachable cells.
    index: Vec<u32>,
    /// States holding mass after step `t`, for `t = 0..=n`.
    frontiers: Vec<Vec<usize>>,
}

impl<'a> ScanChain<'a> {
    /// Materializes the states reachable forward from `(0, {})`, refusing
    /// once more than `budget` transient states would be needed.
    pub fn new(query: ScanQuery, automaton: &'a EndingBlockAutomaton, budget: u128) -> Result<Self> {
        if automaton.r != query.r || automaton.s != query.s {
            return Err(invalid("automaton was built for a different (r, s)"));
        }
        let ScanQuery { n, n1, .. } = query;
        let blocks = automaton.num_blocks();
        let grid = (n1 as u128 + 1) * blocks as u128;
        // dense (ones, block) -> state index map; the grid bounds what can be
        // materialized
        if grid > budget.max(1 << 20) {
            return Err(Error::Capacity {
                what: format!("scan chain grid for n1 = {n1}, r = {}, s = {}", query.r, query.s),
                required: grid,
                budget,
            });
        }
        let mut index = vec![u32::MAX; grid as usize];
        let mut labels = vec![ScanState::Transient {
            ones: 0,
            block: BlockId::EMPTY,
        }];
        index[0] = 0;
        let mut frontiers = Vec::with_capacity(n + 1);
        frontiers.push(vec![0usize]);
        let mut stamp = vec![0usize; 1];
        for t in 1..=n {
            let mut next = Vec::new();
            for &from in &frontiers[t - 1] {
                let ScanState::Transient { ones, block } = labels[from] else {
                    unreachable!()
                };
                let m = ones as usize;
                for (bit, ok) in [(1u8, n1 > m), (0u8, zeros_left(query, t, m) > 0)] {
                    if !ok {
                        continue;
                    }
                    let target = automaton.step(block, bit);
                    if target.is_absorbing() {
                        continue;
                    }
                    let m2 = m + bit as usize;
                    let cell = m2 * blocks + target.index();
                    let id = if index[cell] == u32::MAX {
                        let id = labels.len();
                        if id as u128 >= budget {
                            return Err(Error::Capacity {
                                what: format!(
                                    "scan chain for n = {n}, n1 = {n1}, r = {}, s = {}",
                                    query.r, query.s
                                ),
                                required: id as u128 + 1,
                                budget,
                            });
                        }
                        index[cell] = id as u32;
                        labels.push(ScanState::Transient {
                            ones: m2 as u32,
                            block: target,
                        });
                        stamp.push(0);
                        id
                    } else {
                        index[cell] as usize
                    };
                    if stamp[id] != t {
                        stamp[id] = t;
                        next.push(id);
                    }
                }
            }
            next.sort_unstable();
            frontiers.push(next);
        }
        labels.push(ScanState::Absorbed);
        let space = StateSpace::new(labels, [ScanState::Absorbed])?;
        Ok(Self {
            query,
            automaton,
            space,
            index,
            frontiers,
        })
    }

    pub fn space(&self) -> &StateSpace<ScanState> {
        &self.space
    }

    pub fn query(&self) -> ScanQuery {
        self.query
    }

    /// Number of materialized transient states.
    pub fn transient_states(&self) -> usize {
        self.space.len() - 1
    }

    /// States that can carry mass just before step `t` (i.e. after `t - 1`).
    pub fn frontier(&self, t: usize) -> &[usize] {
        &self.frontiers[t - 1]
    }

    /// One-step transition probabilities out of `(m, block)` at step `t`,
    /// including the move into the absorbing state: `[(bit, prob, target)]`.
    pub fn transitions(&self, t: usize, m: usize, block: BlockId) -> [(u8, f64, ScanState); 2] {
        let ScanQuery { n, n1, .. } = self.query;
        let denom = (n - t + 1) as f64;
        let one = (n1 - m.min(n1)) as f64 / denom;
        let zero = zeros_left(self.query, t, m) as f64 / denom;
        let target = |bit: u8, m2: usize| {
            let b = self.automaton.step(block, bit);
            if b.is_absorbing() {
                ScanState::Absorbed
            } else {
                ScanState::Transient {
                    ones: m2 as u32,
                    block: b,
                }
            }
        };
        [(1, one, target(1, m + 1)), (0, zero, target(0, m))]
    }

    /// Transient kernel `N_t`.
    pub fn kernel(&self, t: usize) -> Result<StepKernel> {
        let mut entries = Vec::with_capacity(2 * self.frontiers[t - 1].len());
        for &from in &self.frontiers[t - 1] {
            let ScanState::Transient { ones, block } = *self.space.label(from) else {
                unreachable!()
            };
            for (_, p, target) in self.transitions(t, ones as usize, block) {
                if p <= 0.0 {
                    continue;
                }
                if let ScanState::Transient { ones, block } = target {
                    let cell = ones as usize * self.automaton.num_blocks() + block.index();
                    let to = self.index[cell];
                    assert!(to != u32::MAX, "forward reachability covers every target");
                    debug_assert_eq!(self.space.index_of(&target), Some(to as usize));
                    entries.push((from, to as usize, p));
                }
            }
        }
        let kernel = StepKernel::from_indexed(&self.space, t, KernelKind::Transient, entries)?;
        assert!(kernel.max_out_degree() <= 2);
        Ok(kernel)
    }

    pub fn kernels(&self) -> impl Iterator<Item = Result<StepKernel>> + '_ {
        (1..=self.query.n).map(move |t| self.kernel(t))
    }

    /// `P(no pattern occurs in n trials | N1 = n1)`.
    pub fn survival(&self) -> Result<f64> {
        let start = DistributionVector::point(
            &self.space,
            &ScanState::Transient {
                ones: 0,
                block: BlockId::EMPTY,
            },
        )?;
        // kernels are generated one at a time to bound memory
        let mut err = None;
        let kernels = self.kernels().map_while(|k| match k {
            Ok(k) => Some(k),
            Err(e) => {
                err = Some(e);
                None
            }
        });
        let p = survival_probability(&self.space, &start, kernels)?;
        match err {
            Some(e) => Err(e),
            None => Ok(p),
        }
    }
}

/// Zeros still in the urn before step `t` with `m` ones drawn so far.
fn zeros_left(query: ScanQuery, t: usize, m: usize) -> i64 {
    (query.n - query.n1) as i64 - (t as i64 - 1 - m as i64)
}

/// All transient kernels `N_1..N_n` of the chain.
pub fn scan_step_kernels(
    query: ScanQuery,
    automaton: &EndingBlockAutomaton,
    budget: u128,
) -> Result<Vec<StepKernel>> {
    let chain = ScanChain::new(query, automaton, budget)?;
    chain.kernels().collect()
}
