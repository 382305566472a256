//! Journaled point-assign / global-minimum segment trees, many per allocation.

use alloc::vec;
use alloc::vec::Vec;

use crate::Checksum;

/// Ordered minimum key: `value` first, then `tag` (the witness index) for ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MinKey {
    pub value: i64,
    pub tag: u32,
}

impl MinKey {
    pub fn new(value: i64, tag: usize) -> Self {
        Self { value, tag: tag as u32 }
    }
}

type Cell = Option<(MinKey, u32)>;

fn better(a: Cell, b: Cell) -> Cell {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y < x { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Clone, Debug)]
pub struct MinForest {
    domain: usize,
    width: usize,
    trees: usize,
    cells: Vec<Cell>,
    journal: Vec<(u32, u32, Option<MinKey>)>,
}

impl MinForest {
    pub fn new(trees: usize, domain: usize) -> Self {
        let width = domain.max(1).next_power_of_two();
        Self {
            domain,
            width,
            trees,
            cells: vec![None; trees * 2 * width],
            journal: Vec::new(),
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn get(&self, tree: usize, slot: usize) -> Option<MinKey> {
        self.cells[tree * 2 * self.width + self.width + slot].map(|(k, _)| k)
    }

    /// Journaled assignment; `None` is +∞.
    pub fn set(&mut self, tree: usize, slot: usize, key: Option<MinKey>) {
        let old = self.get(tree, slot);
        self.journal.push((tree as u32, slot as u32, old));
        self.write(tree, slot, key);
    }

    pub(crate) fn set_untracked(&mut self, tree: usize, slot: usize, key: Option<MinKey>) {
        self.write(tree, slot, key);
    }

    fn write(&mut self, tree: usize, slot: usize, key: Option<MinKey>) {
        assert!(slot < self.domain, "slot {slot} outside domain {}", self.domain);
        let base = tree * 2 * self.width;
        let mut i = self.width + slot;
        self.cells[base + i] = key.map(|k| (k, slot as u32));
        while i > 1 {
            i /= 2;
            self.cells[base + i] = better(self.cells[base + 2 * i], self.cells[base + 2 * i + 1]);
        }
    }

    /// Smallest key in the tree and the slot holding it.
    pub fn min(&self, tree: usize) -> Option<(MinKey, usize)> {
        self.cells[tree * 2 * self.width + 1].map(|(k, s)| (k, s as usize))
    }

    pub fn checkpoint(&mut self) {
        self.journal.clear();
    }

    pub fn rollback(&mut self) {
        while let Some((tree, slot, old)) = self.journal.pop() {
            self.write(tree as usize, slot as usize, old);
        }
    }

    pub fn checksum(&self, sum: &mut Checksum) {
        sum.word(self.trees as u64).word(self.domain as u64);
        for c in &self.cells {
            match c {
                Some((k, s)) => sum.word(1).signed(k.value).word(u64::from(k.tag)).word(u64::from(*s)),
                None => sum.word(0),
            };
        }
        sum.word(self.journal.len() as u64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_with_ties_and_rollback() {
        let mut f = MinForest::new(2, 5);
        f.set_untracked(0, 0, Some(MinKey::new(4, 9)));
        f.set_untracked(0, 3, Some(MinKey::new(2, 7)));
        f.set_untracked(0, 4, Some(MinKey::new(2, 1)));
        assert_eq!(f.min(0), Some((MinKey::new(2, 1), 4)));
        assert_eq!(f.min(1), None);
        f.set(0, 4, None);
        f.set(0, 3, None);
        assert_eq!(f.min(0), Some((MinKey::new(4, 9), 0)));
        f.rollback();
        assert_eq!(f.min(0), Some((MinKey::new(2, 1), 4)));
    }

    #[test]
    fn single_slot_domain() {
        let mut f = MinForest::new(1, 1);
        f.set_untracked(0, 0, Some(MinKey::new(-3, 0)));
        assert_eq!(f.min(0), Some((MinKey::new(-3, 0), 0)));
    }
}
