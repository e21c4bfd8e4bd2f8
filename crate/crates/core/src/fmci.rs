//! Propagation engine for nonhomogeneous imbedded Markov chains.
//!
//! A chain is described by a [`StateSpace`] (labels interned to indices, some
//! flagged absorbing) and an ordered list of sparse [`StepKernel`]s. Kernels
//! are validated when they are built so that [`propagate`] and
//! [`survival_probability`] only run the multiply-accumulate loop.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// Finite state space with interned labels.
#[derive(Debug, Clone)]
pub struct StateSpace<L> {
    labels: Vec<L>,
    index: HashMap<L, usize>,
    absorbing: Vec<bool>,
}

impl<L: Clone + Eq + Hash + Debug> StateSpace<L> {
    pub fn new(labels: Vec<L>, absorbing: impl IntoIterator<Item = L>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Structural(format!("duplicate state label {label:?}")));
            }
        }
        let mut flags = vec![false; labels.len()];
        for label in absorbing {
            let i = *index.get(&label).ok_or_else(|| {
                Error::Structural(format!("absorbing label {label:?} is not a state"))
            })?;
            flags[i] = true;
        }
        Ok(Self {
            labels,
            index,
            absorbing: flags,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &L) -> Option<usize> {
        self.index.get(label).copied()
    }

    fn require(&self, label: &L) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::Structural(format!("unknown state {label:?}")))
    }

    pub fn label(&self, i: usize) -> &L {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.absorbing[i]
    }

    pub fn transient_count(&self) -> usize {
        self.absorbing.iter().filter(|a| !**a).count()
    }
}

/// Whether a kernel is a full stochastic matrix or the transient block of an
/// absorbing chain (rows may lose mass to absorption).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Stochastic,
    Transient,
}

/// One step of a nonhomogeneous chain, stored as compressed sparse rows.
/// Only rows with at least one entry are stored, so the cost of building
/// and applying a kernel scales with its entries, not with the state count.
#[derive(Debug, Clone)]
pub struct StepKernel {
    t: usize,
    kind: KernelKind,
    num_states: usize,
    rows: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    probs: Vec<f64>,
}

impl StepKernel {
    /// Builds and validates a kernel from `(from, to, probability)` index
    /// triples. Duplicate pairs are summed and zero entries dropped.
    ///
    /// Absorbing rows of a stochastic kernel may be omitted; they become
    /// self-loops. A transient kernel may not touch absorbing states at all.
    pub fn from_indexed<L: Clone + Eq + Hash + Debug>(
        space: &StateSpace<L>,
        t: usize,
        kind: KernelKind,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if t == 0 {
            return Err(Error::Structural("step index is 1-based".into()));
        }
        let n = space.len();
        for &(from, to, p) in &entries {
            if from >= n || to >= n {
                return Err(Error::Structural(format!(
                    "step {t}: transition {from} -> {to} outside a space of {n} states"
                )));
            }
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::Validation(format!(
                    "step {t}: transition {from} -> {to} has probability {p}"
                )));
            }
        }
        if kind == KernelKind::Stochastic {
            let mut has_row = vec![false; n];
            for &(from, _, _) in &entries {
                has_row[from] = true;
            }
            for (i, present) in has_row.iter().enumerate() {
                if !present && space.is_absorbing(i) {
                    entries.push((i, i, 1.0));
                }
            }
        }
        entries.retain(|e| e.2 > 0.0);
        if !entries.is_sorted_by_key(|e| (e.0, e.1)) {
            entries.sort_unstable_by_key(|e| (e.0, e.1));
        }
        entries.dedup_by(|later, earlier| {
            if later.0 == earlier.0 && later.1 == earlier.1 {
                earlier.2 += later.2;
                true
            } else {
                false
            }
        });

        let mut rows = Vec::new();
        let mut offsets = vec![0usize];
        for (i, &(from, _, _)) in entries.iter().enumerate() {
            if rows.last() != Some(&(from as u32)) {
                if i > 0 {
                    offsets.push(i);
                }
                rows.push(from as u32);
            }
        }
        offsets.push(entries.len());
        if entries.is_empty() {
            offsets.truncate(1);
        }
        let kernel = Self {
            t,
            kind,
            num_states: n,
            rows,
            offsets,
            targets: entries.iter().map(|e| e.1 as u32).collect(),
            probs: entries.iter().map(|e| e.2).collect(),
        };
        kernel.validate(space)?;
        Ok(kernel)
    }

    /// Same as [`StepKernel::from_indexed`] but addressed by state labels.
    pub fn from_labeled<'a, L: Clone + Eq + Hash + Debug + 'a>(
        space: &StateSpace<L>,
        t: usize,
        kind: KernelKind,
        entries: impl IntoIterator<Item = (&'a L, &'a L, f64)>,
    ) -> Result<Self> {
        let indexed = entries
            .into_iter()
            .map(|(from, to, p)| Ok((space.require(from)?, space.require(to)?, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indexed(space, t, kind, indexed)
    }

    fn validate<L: Clone + Eq + Hash + Debug>(&self, space: &StateSpace<L>) -> Result<()> {
        let mut k = 0;
        // a stochastic kernel must cover every row; a transient one may leave
        // rows empty
        let to_check: Box<dyn Iterator<Item = usize>> = match self.kind {
            KernelKind::Stochastic => Box::new(0..self.num_states),
            KernelKind::Transient => Box::new(self.rows.iter().map(|&i| i as usize)),
        };
        for i in to_check {
            let span = if self.rows.get(k) == Some(&(i as u32)) {
                k += 1;
                self.offsets[k - 1]..self.offsets[k]
            } else {
                0..0
            };
            let absorbing = space.is_absorbing(i);
            let mut sum = 0.0;
            for (&to, &p) in self.targets[span.clone()].iter().zip(&self.probs[span]) {
                let to = to as usize;
                sum += p;
                match self.kind {
                    KernelKind::Stochastic if absorbing && to != i => {
                        return Err(Error::Structural(format!(
                            "step {}: absorbing state {:?} leaves to {:?}",
                            self.t,
                            space.label(i),
                            space.label(to)
                        )));
                    }
                    KernelKind::Transient if absorbing || space.is_absorbing(to) => {
                        return Err(Error::Structural(format!(
                            "step {}: transient kernel touches absorbing state ({:?} -> {:?})",
                            self.t,
                            space.label(i),
                            space.label(to)
                        )));
                    }
                    _ => {}
                }
            }
            let ok = match self.kind {
                KernelKind::Stochastic => (sum - 1.0).abs() <= ROW_SUM_TOL,
                KernelKind::Transient => sum <= 1.0 + ROW_SUM_TOL,
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "step {}: row {:?} sums to {sum}",
                    self.t,
                    space.label(i)
                )));
            }
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_entries(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, from: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = match self.rows.binary_search(&(from as u32)) {
            Ok(k) => self.offsets[k]..self.offsets[k + 1],
            Err(_) => 0..0,
        };
        self.targets[span.clone()]
            .iter()
            .map(|&to| to as usize)
            .zip(self.probs[span].iter().copied())
    }

    pub fn row_sum(&self, from: usize) -> f64 {
        self.row(from).map(|(_, p)| p).sum()
    }

    pub fn max_out_degree(&self) -> usize {
        self.offsets
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    /// `next += current * self`, with `next` zeroed first.
    fn apply(&self, current: &[f64], next: &mut [f64]) {
        next.fill(0.0);
        for (k, &from) in self.rows.iter().enumerate() {
            let mass = current[from as usize];
            if mass == 0.0 {
                continue;
            }
            let span = self.offsets[k]..self.offsets[k + 1];
            for (&to, &p) in self.targets[span.clone()].iter().zip(&self.probs[span]) {
                next[to as usize] += mass * p;
            }
        }
    }
}

/// Probability mass over the states of a [`StateSpace`], indexed by state.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    mass: Vec<f64>,
}

impl DistributionVector {
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for (i, &m) in mass.iter().enumerate() {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Validation(format!("state {i} has mass {m}")));
            }
            total += m;
        }
        if total > 1.0 + ROW_SUM_TOL {
            return Err(Error::Validation(format!("total mass {total} exceeds 1")));
        }
        Ok(Self { mass })
    }

    pub fn from_labeled<'a, L: Clone + Eq + Hash + Debug + 'a>(
        space: &StateSpace<L>,
        entries: impl IntoIterator<Item = (&'a L, f64)>,
    ) -> Result<Self> {
        let mut mass = vec![0.0; space.len()];
        for (label, m) in entries {
            mass[space.require(label)?] += m;
        }
        Self::from_mass(mass)
    }

    /// All mass on one state.
    pub fn point<L: Clone + Eq + Hash + Debug>(space: &StateSpace<L>, label: &L) -> Result<Self> {
        let mut mass = vec![0.0; space.len()];
        mass[space.require(label)?] = 1.0;
        Ok(Self { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get<L: Clone + Eq + Hash + Debug>(&self, space: &StateSpace<L>, label: &L) -> f64 {
        space.index_of(label).map_or(0.0, |i| self.mass[i])
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

fn run<K: Borrow<StepKernel>>(
    initial: &DistributionVector,
    kernels: impl IntoIterator<Item = K>,
    transient_only: bool,
) -> Result<DistributionVector> {
    let n = initial.len();
    let mut current = initial.mass.clone();
    let mut next = vec![0.0; n];
    let mut last_t = 0usize;
    for kernel in kernels {
        let kernel = kernel.borrow();
        if kernel.num_states() != n {
            return Err(Error::Structural(format!(
                "step {} kernel has {} states, distribution has {n}",
                kernel.t(),
                kernel.num_states()
            )));
        }
        if kernel.t() <= last_t {
            return Err(Error::Structural(format!(
                "kernels out of order: step {} after step {last_t}",
                kernel.t()
            )));
        }
        if transient_only && kernel.kind() != KernelKind::Transient {
            return Err(Error::Structural(format!(
                "step {} is not a transient kernel",
                kernel.t()
            )));
        }
        last_t = kernel.t();
        let stochastic = kernel.kind() == KernelKind::Stochastic;
        let before: f64 = if stochastic && cfg!(debug_assertions) {
            current.iter().sum()
        } else {
            0.0
        };
        kernel.apply(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        if stochastic && cfg!(debug_assertions) {
            let after: f64 = current.iter().sum();
            debug_assert!(
                (after - before).abs() < 1e-12,
                "mass drift {before} -> {after} at step {}",
                kernel.t()
            );
        }
    }
    Ok(DistributionVector { mass: current })
}

/// Left-multiplies `initial` through every kernel in order.
pub fn propagate<K: Borrow<StepKernel>>(
    initial: &DistributionVector,
    kernels: impl IntoIterator<Item = K>,
) -> Result<DistributionVector> {
    run(initial, kernels, false)
}

/// Probability that the chain is still among the transient states after the
/// last kernel: `initial * prod(N_t) * 1`.
///
/// Every kernel must be [`KernelKind::Transient`]; mass that the initial
/// vector places on absorbing states counts as already absorbed.
pub fn survival_probability<L, K>(
    space: &StateSpace<L>,
    initial: &DistributionVector,
    transient_kernels: impl IntoIterator<Item = K>,
) -> Result<f64>
where
    L: Clone + Eq + Hash + Debug,
    K: Borrow<StepKernel>,
{
    if initial.len() != space.len() {
        return Err(Error::Structural(format!(
            "distribution has {} states, space has {}",
            initial.len(),
            space.len()
        )));
    }
    let mut start = initial.clone();
    for (i, m) in start.mass.iter_mut().enumerate() {
        if space.is_absorbing(i) {
            *m = 0.0;
        }
    }
    let end = run(&start, transient_kernels, true)?;
    Ok(end.total().clamp(0.0, 1.0))
}
