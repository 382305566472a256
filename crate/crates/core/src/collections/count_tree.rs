//! Dense multiplicity histograms over a fixed slot domain with an earliest-nonzero
//! index, point updates, and an undo journal.
//!
//! The index is a 64-ary tree of occupancy bits: level 0 has one bit per slot, each
//! higher level one bit per word of the level below. Finding the first nonzero slot
//! at or after a position touches one word per level.

use alloc::vec;
use alloc::vec::Vec;

use crate::Checksum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CountError {
    #[error("slot {slot} outside domain of size {domain}")]
    SlotOutOfRange { slot: usize, domain: usize },
    #[error("tree {tree} outside forest of {trees}")]
    TreeOutOfRange { tree: usize, trees: usize },
    #[error("count at slot {slot} would become negative")]
    Negative { slot: usize },
}

/// Many histograms sharing one domain, stored flat. A single journal covers all
/// trees; [`rollback`](Self::rollback) undoes every journaled change since the last
/// [`checkpoint`](Self::checkpoint).
#[derive(Clone, Debug)]
pub struct CountForest {
    domain: usize,
    trees: usize,
    counts: Vec<u32>,
    level_words: Vec<usize>,
    level_offset: Vec<usize>,
    words_per_tree: usize,
    bits: Vec<u64>,
    journal: Vec<(u32, u32, i32)>,
}

impl CountForest {
    pub fn new(trees: usize, domain: usize) -> Self {
        let domain = domain.max(1);
        let mut level_words = Vec::new();
        let mut level_offset = Vec::new();
        let mut width = domain;
        let mut offset = 0;
        loop {
            let words = width.div_ceil(64);
            level_words.push(words);
            level_offset.push(offset);
            offset += words;
            if words == 1 {
                break;
            }
            width = words;
        }
        Self {
            domain,
            trees,
            counts: vec![0; trees * domain],
            level_words,
            level_offset,
            words_per_tree: offset,
            bits: vec![0; trees * offset],
            journal: Vec::new(),
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn trees(&self) -> usize {
        self.trees
    }

    pub fn count(&self, tree: usize, slot: usize) -> u32 {
        self.counts[tree * self.domain + slot]
    }

    pub fn counts(&self, tree: usize) -> &[u32] {
        &self.counts[tree * self.domain..(tree + 1) * self.domain]
    }

    /// Journaled point update.
    pub fn add(&mut self, tree: usize, slot: usize, delta: i32) -> Result<(), CountError> {
        self.apply(tree, slot, delta)?;
        self.journal.push((tree as u32, slot as u32, delta));
        Ok(())
    }

    /// Point update that is not journaled; used while building.
    pub(crate) fn bump(&mut self, tree: usize, slot: usize, delta: i32) -> Result<(), CountError> {
        self.apply(tree, slot, delta)
    }

    fn apply(&mut self, tree: usize, slot: usize, delta: i32) -> Result<(), CountError> {
        if tree >= self.trees {
            return Err(CountError::TreeOutOfRange { tree, trees: self.trees });
        }
        if slot >= self.domain {
            return Err(CountError::SlotOutOfRange { slot, domain: self.domain });
        }
        let cell = &mut self.counts[tree * self.domain + slot];
        let old = *cell;
        let new = i64::from(old) + i64::from(delta);
        if new < 0 {
            return Err(CountError::Negative { slot });
        }
        *cell = new as u32;
        if old == 0 && new != 0 {
            self.set_bit(tree, slot);
        } else if old != 0 && new == 0 {
            self.clear_bit(tree, slot);
        }
        Ok(())
    }

    fn set_bit(&mut self, tree: usize, mut pos: usize) {
        let base = tree * self.words_per_tree;
        for level in 0..self.level_words.len() {
            let w = base + self.level_offset[level] + pos / 64;
            let was_empty = self.bits[w] == 0;
            self.bits[w] |= 1 << (pos % 64);
            if !was_empty {
                break;
            }
            pos /= 64;
        }
    }

    fn clear_bit(&mut self, tree: usize, mut pos: usize) {
        let base = tree * self.words_per_tree;
        for level in 0..self.level_words.len() {
            let w = base + self.level_offset[level] + pos / 64;
            self.bits[w] &= !(1 << (pos % 64));
            if self.bits[w] != 0 {
                break;
            }
            pos /= 64;
        }
    }

    fn next_set(&self, base: usize, level: usize, pos: usize) -> Option<usize> {
        if level == self.level_words.len() {
            return None;
        }
        let w = pos / 64;
        if w >= self.level_words[level] {
            return None;
        }
        let off = base + self.level_offset[level];
        let word = self.bits[off + w] & (!0u64 << (pos % 64));
        if word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
        let nw = self.next_set(base, level + 1, w + 1)?;
        Some(nw * 64 + self.bits[off + nw].trailing_zeros() as usize)
    }

    /// Smallest slot `>= start` with a nonzero count.
    pub fn first_nonzero_from(&self, tree: usize, start: usize) -> Option<usize> {
        if start >= self.domain {
            return None;
        }
        self.next_set(tree * self.words_per_tree, 0, start)
    }

    pub fn first_nonzero(&self, tree: usize) -> Option<usize> {
        self.first_nonzero_from(tree, 0)
    }

    /// The two smallest nonzero slots, in increasing order.
    pub fn first_two_nonzero(&self, tree: usize) -> (Option<usize>, Option<usize>) {
        match self.first_nonzero(tree) {
            None => (None, None),
            Some(a) => (Some(a), self.first_nonzero_from(tree, a + 1)),
        }
    }

    /// Commits every journaled change.
    pub fn checkpoint(&mut self) {
        self.journal.clear();
    }

    /// Undoes every journaled change since the last checkpoint.
    pub fn rollback(&mut self) {
        while let Some((tree, slot, delta)) = self.journal.pop() {
            self.apply(tree as usize, slot as usize, -delta)
                .expect("journal replays in reverse");
        }
    }

    pub fn journal_len(&self) -> usize {
        self.journal.len()
    }

    pub fn checksum(&self, sum: &mut Checksum) {
        sum.word(self.trees as u64).word(self.domain as u64);
        for &c in &self.counts {
            sum.word(u64::from(c));
        }
        for &b in &self.bits {
            sum.word(b);
        }
        sum.word(self.journal.len() as u64);
    }
}

/// A single histogram with checkpoint/rollback.
#[derive(Clone, Debug)]
pub struct CountTree(CountForest);

impl CountTree {
    pub fn new(domain: usize) -> Self {
        Self(CountForest::new(1, domain))
    }

    pub fn from_counts(counts: &[u32]) -> Self {
        let mut f = CountForest::new(1, counts.len());
        for (slot, &c) in counts.iter().enumerate() {
            f.bump(0, slot, c as i32).expect("slot in domain");
        }
        Self(f)
    }

    pub fn domain(&self) -> usize {
        self.0.domain()
    }

    pub fn counts(&self) -> &[u32] {
        self.0.counts(0)
    }

    pub fn add(&mut self, slot: usize, delta: i32) -> Result<(), CountError> {
        self.0.add(0, slot, delta)
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.first_nonzero(0)
    }

    pub fn first_two_nonzero(&self) -> (Option<usize>, Option<usize>) {
        self.0.first_two_nonzero(0)
    }

    pub fn checkpoint(&mut self) {
        self.0.checkpoint();
    }

    pub fn rollback(&mut self) {
        self.0.rollback();
    }
}
