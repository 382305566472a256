//! Balanced trees keyed by element handles, ordered by the handles' current rank in
//! an [`OrderTree`]. Ranks are resolved at use time, so stored handles never need
//! updating when the sequence shifts.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::order_tree::{ElementHandle, OrderError, OrderTree};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum HandleTreeError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("key already present")]
    DuplicateKey,
    #[error("key not present")]
    MissingKey,
    #[error("pair is not ordered: first comes after second")]
    UnorderedPair,
}

#[derive(Clone, Debug)]
struct Entry {
    key: ElementHandle,
    second: ElementHandle,
    left: u32,
    right: u32,
    height: u8,
    size: u32,
    /// Entry in this subtree whose `second` has the smallest rank.
    min_entry: u32,
}

#[derive(Clone, Debug)]
struct HandleTree {
    nodes: Vec<Entry>,
    free: Vec<u32>,
    root: u32,
    track_min: bool,
}

impl HandleTree {
    fn new(track_min: bool) -> Self {
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            track_min,
        }
    }

    fn len(&self) -> usize {
        self.size(self.root) as usize
    }

    fn size(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].size
        }
    }

    fn height(&self, x: u32) -> u8 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].height
        }
    }

    fn rank_of(order: &OrderTree, h: ElementHandle) -> usize {
        order.rank(h).expect("handle tree entries must be live")
    }

    fn pull(&mut self, order: &OrderTree, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let size = self.size(l) + self.size(r) + 1;
        let height = 1 + self.height(l).max(self.height(r));
        let mut min_entry = x;
        if self.track_min {
            let mut best = Self::rank_of(order, self.nodes[x as usize].second);
            for c in [l, r] {
                if c != NIL {
                    let m = self.nodes[c as usize].min_entry;
                    let rk = Self::rank_of(order, self.nodes[m as usize].second);
                    if rk < best {
                        best = rk;
                        min_entry = m;
                    }
                }
            }
        }
        let n = &mut self.nodes[x as usize];
        n.size = size;
        n.height = height;
        n.min_entry = min_entry;
    }

    fn rotate_left(&mut self, order: &OrderTree, x: u32) -> u32 {
        let y = self.nodes[x as usize].right;
        self.nodes[x as usize].right = self.nodes[y as usize].left;
        self.nodes[y as usize].left = x;
        self.pull(order, x);
        self.pull(order, y);
        y
    }

    fn rotate_right(&mut self, order: &OrderTree, x: u32) -> u32 {
        let y = self.nodes[x as usize].left;
        self.nodes[x as usize].left = self.nodes[y as usize].right;
        self.nodes[y as usize].right = x;
        self.pull(order, x);
        self.pull(order, y);
        y
    }

    fn bf(&self, x: u32) -> i16 {
        let n = &self.nodes[x as usize];
        i16::from(self.height(n.left)) - i16::from(self.height(n.right))
    }

    fn rebalance(&mut self, order: &OrderTree, x: u32) -> u32 {
        self.pull(order, x);
        let bf = self.bf(x);
        if bf > 1 {
            let l = self.nodes[x as usize].left;
            if self.bf(l) < 0 {
                self.nodes[x as usize].left = self.rotate_left(order, l);
            }
            return self.rotate_right(order, x);
        }
        if bf < -1 {
            let r = self.nodes[x as usize].right;
            if self.bf(r) > 0 {
                self.nodes[x as usize].right = self.rotate_right(order, r);
            }
            return self.rotate_left(order, x);
        }
        x
    }

    fn alloc(&mut self, key: ElementHandle, second: ElementHandle) -> u32 {
        let e = Entry {
            key,
            second,
            left: NIL,
            right: NIL,
            height: 1,
            size: 1,
            min_entry: 0,
        };
        let x = if let Some(x) = self.free.pop() {
            self.nodes[x as usize] = e;
            x
        } else {
            self.nodes.push(e);
            (self.nodes.len() - 1) as u32
        };
        self.nodes[x as usize].min_entry = x;
        x
    }

    fn insert(
        &mut self,
        order: &OrderTree,
        key: ElementHandle,
        second: ElementHandle,
    ) -> Result<(), HandleTreeError> {
        let rk = order.rank(key)?;
        order.rank(second)?;
        self.root = self.insert_rec(order, self.root, rk, key, second)?;
        Ok(())
    }

    fn insert_rec(
        &mut self,
        order: &OrderTree,
        x: u32,
        rk: usize,
        key: ElementHandle,
        second: ElementHandle,
    ) -> Result<u32, HandleTreeError> {
        if x == NIL {
            return Ok(self.alloc(key, second));
        }
        match rk.cmp(&Self::rank_of(order, self.nodes[x as usize].key)) {
            Ordering::Less => {
                let l = self.insert_rec(order, self.nodes[x as usize].left, rk, key, second)?;
                self.nodes[x as usize].left = l;
            }
            Ordering::Greater => {
                let r = self.insert_rec(order, self.nodes[x as usize].right, rk, key, second)?;
                self.nodes[x as usize].right = r;
            }
            Ordering::Equal => return Err(HandleTreeError::DuplicateKey),
        }
        Ok(self.rebalance(order, x))
    }

    fn remove(&mut self, order: &OrderTree, key: ElementHandle) -> Result<ElementHandle, HandleTreeError> {
        let rk = order.rank(key)?;
        let mut removed = None;
        self.root = self.remove_rec(order, self.root, rk, &mut removed)?;
        removed.ok_or(HandleTreeError::MissingKey)
    }

    fn remove_rec(
        &mut self,
        order: &OrderTree,
        x: u32,
        rk: usize,
        removed: &mut Option<ElementHandle>,
    ) -> Result<u32, HandleTreeError> {
        if x == NIL {
            return Err(HandleTreeError::MissingKey);
        }
        match rk.cmp(&Self::rank_of(order, self.nodes[x as usize].key)) {
            Ordering::Less => {
                let l = self.remove_rec(order, self.nodes[x as usize].left, rk, removed)?;
                self.nodes[x as usize].left = l;
            }
            Ordering::Greater => {
                let r = self.remove_rec(order, self.nodes[x as usize].right, rk, removed)?;
                self.nodes[x as usize].right = r;
            }
            Ordering::Equal => {
                *removed = Some(self.nodes[x as usize].second);
                let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
                if l == NIL || r == NIL {
                    self.free.push(x);
                    return Ok(if l == NIL { r } else { l });
                }
                let (new_r, m) = self.remove_min(order, r);
                let (mk, ms) = (self.nodes[m as usize].key, self.nodes[m as usize].second);
                self.free.push(m);
                let n = &mut self.nodes[x as usize];
                n.key = mk;
                n.second = ms;
                n.right = new_r;
            }
        }
        Ok(self.rebalance(order, x))
    }

    fn remove_min(&mut self, order: &OrderTree, x: u32) -> (u32, u32) {
        let l = self.nodes[x as usize].left;
        if l == NIL {
            return (self.nodes[x as usize].right, x);
        }
        let (nl, m) = self.remove_min(order, l);
        self.nodes[x as usize].left = nl;
        (self.rebalance(order, x), m)
    }

    /// Entries whose key rank is at most `r`.
    fn count_le(&self, order: &OrderTree, r: usize) -> usize {
        let mut acc = 0;
        let mut x = self.root;
        while x != NIL {
            let n = &self.nodes[x as usize];
            if Self::rank_of(order, n.key) <= r {
                acc += self.size(n.left) as usize + 1;
                x = n.right;
            } else {
                x = n.left;
            }
        }
        acc
    }

    fn select(&self, mut idx: usize) -> Option<&Entry> {
        if idx == 0 || idx > self.len() {
            return None;
        }
        let mut x = self.root;
        loop {
            let n = &self.nodes[x as usize];
            let l = self.size(n.left) as usize;
            match idx.cmp(&(l + 1)) {
                Ordering::Less => x = n.left,
                Ordering::Equal => return Some(n),
                Ordering::Greater => {
                    idx -= l + 1;
                    x = n.right;
                }
            }
        }
    }

    /// Among entries with key rank ≥ `l`, the one whose second has the smallest rank.
    fn min_second_from(&self, order: &OrderTree, l: usize) -> Option<(usize, u32)> {
        let mut best: Option<(usize, u32)> = None;
        let consider = |rk: usize, e: u32, best: &mut Option<(usize, u32)>| {
            if best.is_none_or(|(b, _)| rk < b) {
                *best = Some((rk, e));
            }
        };
        let mut x = self.root;
        while x != NIL {
            let n = &self.nodes[x as usize];
            if Self::rank_of(order, n.key) >= l {
                consider(Self::rank_of(order, n.second), x, &mut best);
                if n.right != NIL {
                    let m = self.nodes[n.right as usize].min_entry;
                    consider(Self::rank_of(order, self.nodes[m as usize].second), m, &mut best);
                }
                x = n.left;
            } else {
                x = n.right;
            }
        }
        best
    }

    fn entries(&self) -> Vec<(ElementHandle, ElementHandle)> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut x = self.root;
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x as usize].left;
            }
            let top = stack.pop().unwrap();
            out.push((self.nodes[top as usize].key, self.nodes[top as usize].second));
            x = self.nodes[top as usize].right;
        }
        out
    }
}

/// Occurrences of one value, ordered by sequence rank.
#[derive(Clone, Debug)]
pub struct OccurrenceTree(HandleTree);

impl Default for OccurrenceTree {
    fn default() -> Self {
        Self::new()
    }
}

impl OccurrenceTree {
    pub fn new() -> Self {
        Self(HandleTree::new(false))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn insert(&mut self, order: &OrderTree, h: ElementHandle) -> Result<(), HandleTreeError> {
        self.0.insert(order, h, h)
    }

    pub fn remove(&mut self, order: &OrderTree, h: ElementHandle) -> Result<(), HandleTreeError> {
        self.0.remove(order, h).map(|_| ())
    }

    /// Occurrences with rank in `[l, r]`.
    pub fn count_in_range(&self, order: &OrderTree, l: usize, r: usize) -> usize {
        if l > r {
            return 0;
        }
        self.0.count_le(order, r) - self.0.count_le(order, l.saturating_sub(1))
    }

    /// The `idx`-th occurrence (1-based).
    pub fn select(&self, idx: usize) -> Option<ElementHandle> {
        self.0.select(idx).map(|e| e.key)
    }

    /// 1-based index of a live occurrence `h` among all occurrences (or of the
    /// position `h` would take).
    pub fn index_of(&self, order: &OrderTree, h: ElementHandle) -> Result<usize, OrderError> {
        Ok(self.0.count_le(order, order.rank(h)?))
    }

    pub fn handles(&self) -> Vec<ElementHandle> {
        self.0.entries().into_iter().map(|(k, _)| k).collect()
    }
}

/// Pairs `(first, second)` keyed by `first`, augmented with the minimum rank of
/// `second` per subtree.
#[derive(Clone, Debug)]
pub struct PairTree(HandleTree);

impl Default for PairTree {
    fn default() -> Self {
        Self::new()
    }
}

impl PairTree {
    pub fn new() -> Self {
        Self(HandleTree::new(true))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn insert(
        &mut self,
        order: &OrderTree,
        first: ElementHandle,
        second: ElementHandle,
    ) -> Result<(), HandleTreeError> {
        if order.rank(first)? > order.rank(second)? {
            return Err(HandleTreeError::UnorderedPair);
        }
        self.0.insert(order, first, second)
    }

    /// Removes the pair keyed by `first`, returning its second handle.
    pub fn remove(&mut self, order: &OrderTree, first: ElementHandle) -> Result<ElementHandle, HandleTreeError> {
        self.0.remove(order, first)
    }

    /// A stored pair lying entirely inside ranks `[l, r]`, if any.
    pub fn find_within(&self, order: &OrderTree, l: usize, r: usize) -> Option<(ElementHandle, ElementHandle)> {
        let (rk, e) = self.0.min_second_from(order, l)?;
        if rk > r {
            return None;
        }
        let n = &self.0.nodes[e as usize];
        Some((n.key, n.second))
    }

    pub fn exists_within(&self, order: &OrderTree, l: usize, r: usize) -> bool {
        self.find_within(order, l, r).is_some()
    }

    pub fn pairs(&self) -> Vec<(ElementHandle, ElementHandle)> {
        self.0.entries()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize) -> (OrderTree, Vec<ElementHandle>) {
        let mut t = OrderTree::new();
        let hs = (0..n).map(|i| t.insert(i + 1, i as u32).unwrap()).collect();
        (t, hs)
    }

    #[test]
    fn pair_examples() {
        let (t, h) = seq(10);
        let mut p = PairTree::new();
        assert!(!p.exists_within(&t, 1, 10));
        p.insert(&t, h[1], h[3]).unwrap();
        p.insert(&t, h[4], h[8]).unwrap();
        assert!(p.exists_within(&t, 1, 4));
        let mut q = PairTree::new();
        q.insert(&t, h[1], h[3]).unwrap();
        assert!(!q.exists_within(&t, 3, 9));
        assert_eq!(q.insert(&t, h[5], h[2]), Err(HandleTreeError::UnorderedPair));
        assert_eq!(q.insert(&t, h[1], h[2]), Err(HandleTreeError::DuplicateKey));
    }

    #[test]
    fn occurrence_counts_follow_shifts() {
        let (mut t, h) = seq(6);
        let mut occ = OccurrenceTree::new();
        for &x in &[h[0], h[2], h[4]] {
            occ.insert(&t, x).unwrap();
        }
        assert_eq!(occ.count_in_range(&t, 1, 6), 3);
        assert_eq!(occ.count_in_range(&t, 2, 4), 1);
        t.insert(1, 99).unwrap();
        assert_eq!(occ.count_in_range(&t, 2, 4), 2);
        assert_eq!(occ.index_of(&t, h[4]), Ok(3));
        assert_eq!(occ.select(2), Some(h[2]));
        occ.remove(&t, h[2]).unwrap();
        assert_eq!(occ.handles(), [h[0], h[4]]);
    }

    proptest! {
        #[test]
        fn pair_tree_matches_scan(
            raw in proptest::collection::vec((0usize..60, 0usize..12), 0..200),
            queries in proptest::collection::vec((1usize..=60, 0usize..60), 1..40),
            removals in proptest::collection::vec(0usize..200, 0..40),
        ) {
            let (t, h) = seq(60);
            let mut p = PairTree::new();
            let mut stored: Vec<(usize, usize)> = Vec::new();
            for (a, d) in raw {
                let b = (a + d).min(59);
                if stored.iter().all(|&(x, _)| x != a) {
                    p.insert(&t, h[a], h[b]).unwrap();
                    stored.push((a, b));
                }
            }
            for r in removals {
                if !stored.is_empty() {
                    let (a, b) = stored.remove(r % stored.len());
                    prop_assert_eq!(p.remove(&t, h[a]), Ok(h[b]));
                }
            }
            prop_assert_eq!(p.len(), stored.len());
            for (l, w) in queries {
                let r = (l + w).min(60);
                let expect = stored.iter().any(|&(a, b)| a + 1 >= l && b < r);
                prop_assert_eq!(p.exists_within(&t, l, r), expect);
                if let Some((a, b)) = p.find_within(&t, l, r) {
                    let (ra, rb) = (t.rank(a).unwrap(), t.rank(b).unwrap());
                    prop_assert!(ra >= l && rb <= r);
                }
            }
        }
    }
}
