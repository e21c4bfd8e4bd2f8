//! Exact scan distribution for wide windows (`2r >= n`) by direct counting.
//!
//! With `k = n - r`, the first `k` and the last `k` positions are disjoint.
//! Sliding the window one step drops position `j` and adds `j + r`, so the
//! window count is `n1 - b + (V_j - U_j)` where `U_j`, `V_j` count ones among
//! the first `j` positions of the leading and trailing blocks and `b` is the
//! trailing block's total. A joint walk over both blocks, weighted by the
//! number of ways to fill the middle, gives the exact distribution.

use super::chain::check_window;
use crate::error::{invalid, Error, Result};
use crate::pmf::{ConditionalPmf, Statistic};
use crate::scan::pattern::binomial;

fn overflow(n: usize, n1: usize) -> Error {
    Error::Capacity {
        what: format!("exact sequence counts for n = {n}, n1 = {n1}"),
        required: u128::MAX,
        budget: u128::MAX,
    }
}

/// Exact counts `#{sequences : S_n(r) = v}` for `v = 0..=min(r, n1)`.
pub fn wide_window_counts(n: usize, n1: usize, r: usize) -> Result<Vec<u128>> {
    check_window(n, n1, r)?;
    if 2 * r < n {
        return Err(invalid(format!(
            "wide-window counting needs 2r >= n, got r = {r}, n = {n}"
        )));
    }
    let total = binomial(n as u128, n1 as u128).ok_or_else(|| overflow(n, n1))?;
    let top = r.min(n1);
    let mut counts = vec![0u128; top + 1];
    let k = n - r;
    if k == 0 {
        counts[n1] = total;
        return Ok(counts);
    }
    let middle = 2 * r - n;
    let dim = k + 1;
    let at = |u: usize, v: usize, mx: usize| (u * dim + v) * dim + mx;
    let mut cur = vec![0u128; dim * dim * dim];
    let mut next = vec![0u128; dim * dim * dim];
    cur[at(0, 0, 0)] = 1;
    for i in 1..=k {
        next.fill(0);
        let reach = (i - 1).min(n1);
        for u in 0..=reach {
            for v in 0..=reach.min(n1 - u) {
                for mx in 0..i {
                    let c = cur[at(u, v, mx)];
                    if c == 0 {
                        continue;
                    }
                    for (du, dv) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let (u2, v2) = (u + du, v + dv);
                        if u2 + v2 > n1 {
                            continue;
                        }
                        let mx2 = mx.max(v2.saturating_sub(u2));
                        let slot = &mut next[at(u2, v2, mx2)];
                        *slot = slot.checked_add(c).ok_or_else(|| overflow(n, n1))?;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    for a in 0..=k.min(n1) {
        for b in 0..=k.min(n1 - a) {
            let rest = n1 - a - b;
            if rest > middle {
                continue;
            }
            let fill = binomial(middle as u128, rest as u128).ok_or_else(|| overflow(n, n1))?;
            for mx in 0..=k {
                let c = cur[at(a, b, mx)];
                if c == 0 {
                    continue;
                }
                let value = n1 - b + mx;
                let add = c.checked_mul(fill).ok_or_else(|| overflow(n, n1))?;
                counts[value] = counts[value]
                    .checked_add(add)
                    .ok_or_else(|| overflow(n, n1))?;
            }
        }
    }
    let sum = counts
        .iter()
        .try_fold(0u128, |acc, &c| acc.checked_add(c))
        .ok_or_else(|| overflow(n, n1))?;
    assert_eq!(sum, total, "wide-window counts must cover every sequence");
    Ok(counts)
}

/// Exact pmf of `S_n(r)` for `2r >= n`.
pub fn wide_window_pmf(n: usize, n1: usize, r: usize) -> Result<ConditionalPmf> {
    let counts = wide_window_counts(n, n1, r)?;
    let total = binomial(n as u128, n1 as u128).ok_or_else(|| overflow(n, n1))? as f64;
    let probs = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(ConditionalPmf::from_atoms(n, n1, Statistic::Scan { r }, 0, probs)?.trimmed())
}
