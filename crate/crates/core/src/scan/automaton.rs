//! Ending-block automaton: a deterministic automaton whose states are the
//! proper prefixes of the simple patterns ("ending blocks") plus an absorbing
//! state entered when any pattern completes.
//!
//! Transitions follow the longest-suffix rule and are computed with failure
//! links over the pattern trie.

use std::collections::VecDeque;
use std::fmt;

use super::pattern::{binomial, CompoundPattern};
use crate::error::{Error, Result};

/// Index of an automaton node. [`BlockId::EMPTY`] is the empty block and
/// [`BlockId::ABSORBING`] the state reached once a pattern has occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub(crate) u32);

impl BlockId {
    pub const EMPTY: BlockId = BlockId(0);
    pub const ABSORBING: BlockId = BlockId(u32::MAX);

    pub fn is_absorbing(self) -> bool {
        self == Self::ABSORBING
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct TrieNode {
    children: [u32; 2],
    terminal: bool,
    parent: u32,
    bit: u8,
    depth: u32,
    ones: u32,
}

/// Trie over the pattern set, built either from explicit patterns or from the
/// implicit description of the scan patterns.
struct Trie {
    nodes: Vec<TrieNode>,
}

impl Trie {
    fn new() -> Self {
        Self {
            nodes: vec![TrieNode {
                children: [NONE; 2],
                terminal: false,
                parent: 0,
                bit: 0,
                depth: 0,
                ones: 0,
            }],
        }
    }

    fn child_or_insert(&mut self, node: usize, bit: u8) -> usize {
        let c = self.nodes[node].children[bit as usize];
        if c != NONE {
            return c as usize;
        }
        let id = self.nodes.len();
        let (depth, ones) = (self.nodes[node].depth + 1, self.nodes[node].ones + bit as u32);
        self.nodes.push(TrieNode {
            children: [NONE; 2],
            terminal: false,
            parent: node as u32,
            bit,
            depth,
            ones,
        });
        self.nodes[node].children[bit as usize] = id as u32;
        id
    }
}

#[derive(Debug, Clone)]
struct Node {
    next: [u32; 2],
    parent: u32,
    bit: u8,
    depth: u32,
    ones: u32,
}

/// Deterministic, total automaton over `{0, 1}` tracking the longest ending
/// block.
#[derive(Debug, Clone)]
pub struct EndingBlockAutomaton {
    pub r: usize,
    pub s: usize,
    nodes: Vec<Node>,
}

/// Number of ending blocks (including the empty block) for the scan pattern
/// `(r, s)`: words starting with 1 that hold at most `s - 1` ones and at most
/// `r - s` zeros. Saturates at `u128::MAX`.
pub fn ending_block_count(r: usize, s: usize) -> u128 {
    if s == 0 || s > r {
        return 0;
    }
    let zeros = (r - s) as u128;
    let mut total: u128 = 1;
    for k in 1..s as u128 {
        for z in 0..=zeros {
            let term = match binomial(k - 1 + z, z) {
                Some(t) => t,
                None => return u128::MAX,
            };
            total = match total.checked_add(term) {
                Some(t) => t,
                None => return u128::MAX,
            };
        }
    }
    total
}

/// Builds the automaton for an explicit compound pattern.
pub fn build_automaton(compound: &CompoundPattern) -> EndingBlockAutomaton {
    let mut trie = Trie::new();
    for pattern in compound.patterns() {
        let mut node = 0;
        for &b in pattern.bits() {
            node = trie.child_or_insert(node, b);
        }
        trie.nodes[node].terminal = true;
    }
    finish(trie, compound.r, compound.s)
}

impl EndingBlockAutomaton {
    /// Builds the automaton for the scan pattern `(r, s)` directly, without
    /// listing the simple patterns. Produces the same node numbering as
    /// [`build_automaton`] on `enumerate_patterns(r, s)`.
    pub fn for_scan(r: usize, s: usize, budget: u128) -> Result<Self> {
        if s == 0 || s > r {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= s <= r, got r = {r}, s = {s}"
            )));
        }
        let count = ending_block_count(r, s);
        // terminal leaves roughly match the pattern count; bound both
        let patterns = super::pattern::pattern_count(r, s);
        let required = count.saturating_add(patterns);
        if required > budget {
            return Err(Error::Capacity {
                what: format!("ending-block automaton for r = {r}, s = {s}"),
                required,
                budget,
            });
        }
        let max_zeros = r - s;
        let mut trie = Trie::new();
        // (node, ones, zeros)
        let mut queue = VecDeque::new();
        let first = trie.child_or_insert(0, 1);
        if s == 1 {
            trie.nodes[first].terminal = true;
        } else {
            queue.push_back((first, 1usize, 0usize));
        }
        while let Some((node, ones, zeros)) = queue.pop_front() {
            if zeros < max_zeros {
                let c = trie.child_or_insert(node, 0);
                queue.push_back((c, ones, zeros + 1));
            }
            let c = trie.child_or_insert(node, 1);
            if ones + 1 == s {
                trie.nodes[c].terminal = true;
            } else {
                queue.push_back((c, ones + 1, zeros));
            }
        }
        Ok(finish(trie, r, s))
    }

    pub fn num_blocks(&self) -> usize {
        self.nodes.len()
    }

    /// Transition on one input bit.
    pub fn step(&self, block: BlockId, bit: u8) -> BlockId {
        if block.is_absorbing() {
            return BlockId::ABSORBING;
        }
        BlockId(self.nodes[block.index()].next[(bit & 1) as usize])
    }

    /// Feeds a bit stream from the empty block, returning the 1-based index
    /// at which the automaton absorbs, if it does.
    pub fn absorption_time(&self, bits: &[u8]) -> Option<usize> {
        let mut block = BlockId::EMPTY;
        for (i, &b) in bits.iter().enumerate() {
            block = self.step(block, b);
            if block.is_absorbing() {
                return Some(i + 1);
            }
        }
        None
    }

    /// Number of ones in the block's word.
    pub fn ones(&self, block: BlockId) -> usize {
        self.nodes[block.index()].ones as usize
    }

    pub fn depth(&self, block: BlockId) -> usize {
        self.nodes[block.index()].depth as usize
    }

    /// The word a block stands for.
    pub fn word(&self, block: BlockId) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.depth(block));
        let mut id = block.0;
        while id != 0 {
            let node = &self.nodes[id as usize];
            out.push(node.bit);
            id = node.parent;
        }
        out.reverse();
        out
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> {
        (0..self.nodes.len() as u32).map(BlockId)
    }
}

/// Word labels for display: the empty block prints as `{}`.
pub struct BlockLabel<'a>(pub &'a EndingBlockAutomaton, pub BlockId);

impl fmt::Display for BlockLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1.is_absorbing() {
            return write!(f, "alpha");
        }
        let word = self.0.word(self.1);
        if word.is_empty() {
            return write!(f, "{{}}");
        }
        for b in word {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Failure-link completion: turns the trie into a total transition table,
/// folds terminal nodes into the absorbing state, and renumbers the
/// surviving nodes in breadth-first order (child 0 before child 1).
#[allow(clippy::needless_range_loop)]
fn finish(trie: Trie, r: usize, s: usize) -> EndingBlockAutomaton {
    let n = trie.nodes.len();
    let mut goto = vec![[0u32; 2]; n];
    let mut fail = vec![0u32; n];
    let mut terminal: Vec<bool> = trie.nodes.iter().map(|t| t.terminal).collect();
    let mut queue = VecDeque::new();
    for b in 0..2 {
        let c = trie.nodes[0].children[b];
        if c == NONE {
            goto[0][b] = 0;
        } else {
            goto[0][b] = c;
            fail[c as usize] = 0;
            queue.push_back(c as usize);
        }
    }
    while let Some(u) = queue.pop_front() {
        for b in 0..2 {
            let c = trie.nodes[u].children[b];
            let via_fail = goto[fail[u] as usize][b];
            if c == NONE {
                goto[u][b] = via_fail;
            } else {
                goto[u][b] = c;
                fail[c as usize] = via_fail;
                if terminal[via_fail as usize] {
                    terminal[c as usize] = true;
                }
                queue.push_back(c as usize);
            }
        }
    }

    // Keep non-terminal nodes reachable from the root without absorbing.
    let mut new_id = vec![NONE; n];
    let mut kept = Vec::new();
    let mut bfs = VecDeque::new();
    new_id[0] = 0;
    kept.push(0usize);
    bfs.push_back(0usize);
    while let Some(u) = bfs.pop_front() {
        for b in 0..2u8 {
            let v = goto[u][b as usize] as usize;
            if terminal[v] || new_id[v] != NONE {
                continue;
            }
            new_id[v] = kept.len() as u32;
            kept.push(v);
            bfs.push_back(v);
        }
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(kept.len());
    for (i, &old) in kept.iter().enumerate() {
        let next = [0usize, 1].map(|b| {
            let v = goto[old][b] as usize;
            if terminal[v] {
                BlockId::ABSORBING.0
            } else {
                new_id[v]
            }
        });
        let t = &trie.nodes[old];
        // a reachable block's trie parent is itself a reachable block
        let parent = if i == 0 { 0 } else { new_id[t.parent as usize] };
        debug_assert!(parent != NONE);
        nodes.push(Node {
            next,
            parent,
            bit: t.bit,
            depth: t.depth,
            ones: t.ones,
        });
    }
    EndingBlockAutomaton { r, s, nodes }
}

#[cfg(test)]
mod tests {
    use super::super::pattern::enumerate_patterns;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_run_pattern() {
        let a = build_automaton(&enumerate_patterns(2, 2).unwrap());
        assert_eq!(a.num_blocks(), 2);
        let one = a.step(BlockId::EMPTY, 1);
        assert_eq!(a.word(one), vec![1]);
        assert_eq!(a.step(one, 1), BlockId::ABSORBING);
        assert_eq!(a.step(one, 0), BlockId::EMPTY);
        assert_eq!(a.step(BlockId::EMPTY, 0), BlockId::EMPTY);
        assert_eq!(a.step(BlockId::ABSORBING, 0), BlockId::ABSORBING);
    }

    #[test]
    fn spaced_pair_absorbs_on_fifth_bit() {
        let a = build_automaton(&enumerate_patterns(5, 2).unwrap());
        assert_eq!(a.absorption_time(&[1, 0, 0, 0, 1]), Some(5));
        assert_eq!(a.absorption_time(&[1, 0, 0, 0, 0, 1]), None);
        // blocks: {}, 1, 10, 100, 1000
        assert_eq!(a.num_blocks(), 5);
        assert_eq!(ending_block_count(5, 2), 5);
    }

    fn naive_first_hit(bits: &[u8], patterns: &[Vec<u8>]) -> Option<usize> {
        (1..=bits.len()).find(|&end| {
            patterns
                .iter()
                .any(|p| p.len() <= end && &bits[end - p.len()..end] == p.as_slice())
        })
    }

    #[test]
    fn absorption_matches_naive_substring_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(r, s) in &[(5usize, 2usize), (6, 4), (4, 4), (7, 3), (3, 1)] {
            let compound = enumerate_patterns(r, s).unwrap();
            let a = build_automaton(&compound);
            let pats: Vec<Vec<u8>> = compound.patterns().iter().map(|p| p.bits().to_vec()).collect();
            for _ in 0..1000 {
                let density = rng.random_range(0.05..0.6);
                let bits: Vec<u8> = (0..20).map(|_| rng.random_bool(density) as u8).collect();
                assert_eq!(a.absorption_time(&bits), naive_first_hit(&bits, &pats), "{bits:?}");
            }
        }
    }

    #[test]
    fn implicit_construction_is_identical() {
        for r in 1..=9 {
            for s in 1..=r {
                let explicit = build_automaton(&enumerate_patterns(r, s).unwrap());
                let implicit = EndingBlockAutomaton::for_scan(r, s, u128::MAX).unwrap();
                assert_eq!(explicit.num_blocks(), implicit.num_blocks(), "r={r} s={s}");
                assert_eq!(explicit.num_blocks() as u128, ending_block_count(r, s));
                for b in explicit.blocks() {
                    for bit in 0..2 {
                        assert_eq!(explicit.step(b, bit), implicit.step(b, bit));
                    }
                    assert_eq!(explicit.word(b), implicit.word(b));
                }
            }
        }
    }

    #[test]
    fn transitions_take_the_longest_suffix_block() {
        let r = 6;
        let s = 3;
        let a = build_automaton(&enumerate_patterns(r, s).unwrap());
        let is_block = |w: &[u8]| {
            w.is_empty()
                || (w[0] == 1
                    && w.iter().filter(|&&b| b == 1).count() < s
                    && w.iter().filter(|&&b| b == 0).count() <= r - s)
        };
        for block in a.blocks() {
            for bit in 0..2u8 {
                let mut w = a.word(block);
                w.push(bit);
                let got = a.step(block, bit);
                if got.is_absorbing() {
                    continue;
                }
                let longest = (0..=w.len()).find(|&cut| is_block(&w[cut..])).unwrap();
                assert_eq!(a.word(got), w[longest..].to_vec());
            }
        }
    }

    #[test]
    fn budget_is_respected() {
        assert!(matches!(
            EndingBlockAutomaton::for_scan(40, 20, 5_000_000),
            Err(Error::Capacity { .. })
        ));
    }
}
