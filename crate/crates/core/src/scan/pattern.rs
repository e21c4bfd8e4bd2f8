//! Simple and compound patterns whose first occurrence marks a window of
//! length at most `r` holding `s` ones.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// A binary word that starts and ends with a one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplePattern {
    bits: Vec<u8>,
}

impl SimplePattern {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits[0] != 1 || *bits.last().unwrap() != 1 {
            return Err(invalid("a simple pattern starts and ends with 1"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("pattern bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid(format!("unexpected character {other:?} in pattern"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for SimplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// All simple patterns with `s` ones and length at most `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundPattern {
    pub r: usize,
    pub s: usize,
    patterns: Vec<SimplePattern>,
}

impl CompoundPattern {
    pub fn patterns(&self) -> &[SimplePattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Closed-form number of simple patterns, `sum_{v=0}^{r-s} C(s-2+v, v)`;
/// saturates at `u128::MAX`.
pub fn pattern_count(r: usize, s: usize) -> u128 {
    if s == 0 || s > r {
        return 0;
    }
    if s == 1 {
        return 1;
    }
    (0..=(r - s) as u128)
        .try_fold(0u128, |acc, v| {
            acc.checked_add(binomial(s as u128 - 2 + v, v)?)
        })
        .unwrap_or(u128::MAX)
}

fn check_rs(r: usize, s: usize) -> Result<()> {
    if s == 0 || s > r {
        return Err(invalid(format!("need 1 <= s <= r, got r = {r}, s = {s}")));
    }
    Ok(())
}

/// Enumerates the compound pattern for `(r, s)`, refusing when it would hold
/// more than `budget` simple patterns.
///
/// `s = 1` degenerates to the single pattern `1`.
pub fn enumerate_patterns_with_budget(r: usize, s: usize, budget: u128) -> Result<CompoundPattern> {
    check_rs(r, s)?;
    let expected = pattern_count(r, s);
    if expected > budget {
        return Err(Error::Capacity {
            what: format!("compound pattern for r = {r}, s = {s}"),
            required: expected,
            budget,
        });
    }
    let mut patterns = Vec::with_capacity(expected as usize);
    if s == 1 {
        patterns.push(SimplePattern { bits: vec![1] });
    } else {
        for len in s..=r {
            let mut bits = vec![0u8; len];
            bits[0] = 1;
            bits[len - 1] = 1;
            place_interior(&mut bits, 1, s - 2, &mut patterns);
        }
    }
    debug_assert_eq!(patterns.len() as u128, expected);
    Ok(CompoundPattern { r, s, patterns })
}

/// Same as [`enumerate_patterns_with_budget`] with the default exact budget.
pub fn enumerate_patterns(r: usize, s: usize) -> Result<CompoundPattern> {
    enumerate_patterns_with_budget(r, s, super::DEFAULT_STATE_BUDGET)
}

fn place_interior(bits: &mut Vec<u8>, from: usize, remaining: usize, out: &mut Vec<SimplePattern>) {
    let last = bits.len() - 1;
    if remaining == 0 {
        out.push(SimplePattern { bits: bits.clone() });
        return;
    }
    for pos in from..last {
        if last - pos < remaining {
            break;
        }
        bits[pos] = 1;
        place_interior(bits, pos + 1, remaining - 1, out);
        bits[pos] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn texts(c: &CompoundPattern) -> BTreeSet<String> {
        c.patterns().iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn window_five_threshold_two() {
        let c = enumerate_patterns(5, 2).unwrap();
        let want: BTreeSet<String> = ["11", "101", "1001", "10001"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(texts(&c), want);
        assert_eq!(pattern_count(5, 2), 4);
    }

    #[test]
    fn full_window_is_a_single_run() {
        for s in 1..8 {
            let c = enumerate_patterns(s, s).unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c.patterns()[0].bits(), vec![1u8; s].as_slice());
        }
    }

    #[test]
    fn six_five_against_brute_force_strings() {
        // every string of length <= 6 with five ones, starting and ending with 1
        let mut brute = BTreeSet::new();
        for len in 1..=6usize {
            for mask in 0u32..(1 << len) {
                let s: String = (0..len)
                    .map(|i| if mask >> (len - 1 - i) & 1 == 1 { '1' } else { '0' })
                    .collect();
                if s.starts_with('1') && s.ends_with('1') && s.matches('1').count() == 5 {
                    brute.insert(s);
                }
            }
        }
        let c = enumerate_patterns(6, 5).unwrap();
        assert_eq!(texts(&c), brute);
        assert_eq!(c.len(), 5);
        assert_eq!(pattern_count(6, 5), 5);
    }

    #[test]
    fn count_identity_holds_up_to_fourteen() {
        for r in 2..=14 {
            for s in 2..=r {
                let c = enumerate_patterns(r, s).unwrap();
                assert_eq!(c.len() as u128, pattern_count(r, s), "r={r} s={s}");
                assert_eq!(pattern_count(r, s), binomial(r as u128 - 1, (r - s) as u128).unwrap());
                assert!(c.patterns().iter().all(|p| p.ones() == s && p.len() <= r));
            }
        }
    }

    #[test]
    fn budget_and_argument_errors() {
        assert!(matches!(
            enumerate_patterns_with_budget(40, 20, 1000),
            Err(Error::Capacity { .. })
        ));
        assert!(enumerate_patterns(3, 4).is_err());
        assert!(enumerate_patterns(3, 0).is_err());
        assert_eq!(enumerate_patterns(4, 1).unwrap().patterns()[0].to_string(), "1");
        assert!(SimplePattern::parse("0110").is_err());
        assert_eq!(SimplePattern::parse("1011").unwrap().ones(), 3);
    }
}
