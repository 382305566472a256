//! Order-maintenance sequence: an AVL tree in an arena, augmented with live subtree
//! sizes, whose nodes double as stable element handles.
//!
//! Deleting a pinned element leaves a tombstone in place: it no longer counts toward
//! ranks, but it can still be located (`live_before`) and walked past (`next`). The
//! node is unlinked once its last pin is released.

use alloc::vec::Vec;

use crate::Checksum;

const NIL: u32 = u32::MAX;

/// Stable reference to one element of an [`OrderTree`].
///
/// A handle stays valid across unrelated insertions and deletions. Once its own
/// element is removed (and unpinned) the slot may be reused; the generation counter
/// makes the old handle detectably stale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementHandle {
    slot: u32,
    generation: u32,
}

impl ElementHandle {
    pub fn slot(self) -> usize {
        self.slot as usize
    }

    pub(crate) fn to_word(self) -> u64 {
        (u64::from(self.generation) << 32) | u64::from(self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("position {pos} out of range 1..={max}")]
    PositionOutOfRange { pos: usize, max: usize },
    #[error("stale element handle")]
    StaleHandle,
    #[error("element already deleted")]
    Deleted,
}

#[derive(Clone, Debug)]
struct Node {
    value: u32,
    left: u32,
    right: u32,
    parent: u32,
    height: u8,
    alive: bool,
    occupied: bool,
    live: u32,
    pins: u32,
    generation: u32,
}

#[derive(Clone, Debug)]
pub struct OrderTree {
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
    tombstones: usize,
}

impl Default for OrderTree {
    fn default() -> Self {
        Self::new()
    }
}

impl OrderTree {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            tombstones: 0,
        }
    }

    /// Number of live elements.
    pub fn len(&self) -> usize {
        self.live(self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Deleted-but-pinned nodes still linked into the tree.
    pub fn tombstones(&self) -> usize {
        self.tombstones
    }

    /// Inserts `value` so that it becomes the element at 1-based position `pos`.
    pub fn insert(&mut self, pos: usize, value: u32) -> Result<ElementHandle, OrderError> {
        let len = self.len();
        if pos == 0 || pos > len + 1 {
            return Err(OrderError::PositionOutOfRange { pos, max: len + 1 });
        }
        let idx = self.alloc(value);
        if self.root == NIL {
            self.root = idx;
            return Ok(self.handle(idx));
        }
        if pos <= len {
            let x = self.select_slot(pos);
            let l = self.nodes[x as usize].left;
            if l == NIL {
                self.nodes[x as usize].left = idx;
                self.nodes[idx as usize].parent = x;
            } else {
                let y = self.rightmost(l);
                self.nodes[y as usize].right = idx;
                self.nodes[idx as usize].parent = y;
            }
        } else {
            let y = self.rightmost(self.root);
            self.nodes[y as usize].right = idx;
            self.nodes[idx as usize].parent = y;
        }
        self.retrace(self.nodes[idx as usize].parent);
        Ok(self.handle(idx))
    }

    /// Removes the element behind `h`, returning its value.
    pub fn remove(&mut self, h: ElementHandle) -> Result<u32, OrderError> {
        let x = self.check(h)?;
        let node = &self.nodes[x as usize];
        if !node.alive {
            return Err(OrderError::Deleted);
        }
        let value = node.value;
        if node.pins > 0 {
            self.nodes[x as usize].alive = false;
            self.tombstones += 1;
            let mut cur = x;
            while cur != NIL {
                self.nodes[cur as usize].live -= 1;
                cur = self.nodes[cur as usize].parent;
            }
        } else {
            self.unlink(x);
        }
        Ok(value)
    }

    /// Handle of the live element at 1-based position `pos`.
    pub fn select(&self, pos: usize) -> Option<ElementHandle> {
        if pos == 0 || pos > self.len() {
            return None;
        }
        Some(self.handle(self.select_slot(pos)))
    }

    /// 1-based position of a live element.
    pub fn rank(&self, h: ElementHandle) -> Result<usize, OrderError> {
        let x = self.check(h)?;
        if !self.nodes[x as usize].alive {
            return Err(OrderError::Deleted);
        }
        Ok(self.live_before_slot(x) + 1)
    }

    /// Number of live elements strictly before `h`. Works for tombstones.
    pub fn live_before(&self, h: ElementHandle) -> Result<usize, OrderError> {
        let x = self.check(h)?;
        Ok(self.live_before_slot(x))
    }

    pub fn value(&self, h: ElementHandle) -> Result<u32, OrderError> {
        let x = self.check(h)?;
        Ok(self.nodes[x as usize].value)
    }

    pub fn is_valid(&self, h: ElementHandle) -> bool {
        self.check(h).is_ok()
    }

    pub fn is_alive(&self, h: ElementHandle) -> bool {
        self.check(h)
            .map(|x| self.nodes[x as usize].alive)
            .unwrap_or(false)
    }

    /// Keeps the node linked (as a tombstone) if its element is deleted.
    pub fn pin(&mut self, h: ElementHandle) -> Result<(), OrderError> {
        let x = self.check(h)?;
        self.nodes[x as usize].pins += 1;
        Ok(())
    }

    pub fn unpin(&mut self, h: ElementHandle) -> Result<(), OrderError> {
        let x = self.check(h)?;
        let node = &mut self.nodes[x as usize];
        debug_assert!(node.pins > 0, "unpin without pin");
        node.pins = node.pins.saturating_sub(1);
        if node.pins == 0 && !node.alive {
            self.tombstones -= 1;
            self.unlink(x);
        }
        Ok(())
    }

    /// First node in sequence order, tombstones included.
    pub fn first(&self) -> Option<ElementHandle> {
        if self.root == NIL {
            None
        } else {
            Some(self.handle(self.leftmost(self.root)))
        }
    }

    /// In-order successor, tombstones included.
    pub fn next(&self, h: ElementHandle) -> Result<Option<ElementHandle>, OrderError> {
        let x = self.check(h)?;
        let r = self.nodes[x as usize].right;
        if r != NIL {
            return Ok(Some(self.handle(self.leftmost(r))));
        }
        let mut cur = x;
        let mut p = self.nodes[x as usize].parent;
        while p != NIL && self.nodes[p as usize].right == cur {
            cur = p;
            p = self.nodes[p as usize].parent;
        }
        Ok(if p == NIL { None } else { Some(self.handle(p)) })
    }

    /// Next live element after `h`.
    pub fn next_live(&self, h: ElementHandle) -> Result<Option<ElementHandle>, OrderError> {
        let mut cur = self.next(h)?;
        while let Some(c) = cur {
            if self.nodes[c.slot as usize].alive {
                return Ok(Some(c));
            }
            cur = self.next(c)?;
        }
        Ok(None)
    }

    /// Live elements with 1-based positions in `[l, r]`, in order.
    pub fn range(&self, l: usize, r: usize) -> RangeIter<'_> {
        let start = if l <= r { self.select(l) } else { None };
        RangeIter {
            tree: self,
            next: start,
            remaining: if start.is_some() { r.min(self.len()) + 1 - l } else { 0 },
        }
    }

    /// Live values in sequence order.
    pub fn values(&self) -> Vec<u32> {
        self.range(1, self.len()).map(|(_, v)| v).collect()
    }

    pub fn checksum(&self, sum: &mut Checksum) {
        sum.word(self.len() as u64).word(self.tombstones as u64);
        for (h, v) in self.range(1, self.len()) {
            sum.word(h.to_word()).word(u64::from(v));
        }
    }

    /// Verifies AVL balance, parent links, and live counts. Test support.
    pub fn check_invariants(&self) -> bool {
        fn walk(t: &OrderTree, x: u32, parent: u32) -> Option<(u8, u32)> {
            if x == NIL {
                return Some((0, 0));
            }
            let n = &t.nodes[x as usize];
            if n.parent != parent || !n.occupied {
                return None;
            }
            let (hl, ll) = walk(t, n.left, x)?;
            let (hr, lr) = walk(t, n.right, x)?;
            if hl.abs_diff(hr) > 1 {
                return None;
            }
            let h = 1 + hl.max(hr);
            let live = ll + lr + u32::from(n.alive);
            (h == n.height && live == n.live).then_some((h, live))
        }
        walk(self, self.root, NIL).is_some()
    }

    fn check(&self, h: ElementHandle) -> Result<u32, OrderError> {
        match self.nodes.get(h.slot as usize) {
            Some(n) if n.occupied && n.generation == h.generation => Ok(h.slot),
            _ => Err(OrderError::StaleHandle),
        }
    }

    fn handle(&self, x: u32) -> ElementHandle {
        ElementHandle {
            slot: x,
            generation: self.nodes[x as usize].generation,
        }
    }

    fn alloc(&mut self, value: u32) -> u32 {
        let fresh = |generation| Node {
            value,
            left: NIL,
            right: NIL,
            parent: NIL,
            height: 1,
            alive: true,
            occupied: true,
            live: 1,
            pins: 0,
            generation,
        };
        if let Some(x) = self.free.pop() {
            let generation = self.nodes[x as usize].generation;
            self.nodes[x as usize] = fresh(generation);
            x
        } else {
            self.nodes.push(fresh(0));
            (self.nodes.len() - 1) as u32
        }
    }

    fn live(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].live
        }
    }

    fn height(&self, x: u32) -> u8 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].height
        }
    }

    fn update(&mut self, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let h = 1 + self.height(l).max(self.height(r));
        let live = self.live(l) + self.live(r) + u32::from(self.nodes[x as usize].alive);
        let n = &mut self.nodes[x as usize];
        n.height = h;
        n.live = live;
    }

    fn leftmost(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].left != NIL {
            x = self.nodes[x as usize].left;
        }
        x
    }

    fn rightmost(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].right != NIL {
            x = self.nodes[x as usize].right;
        }
        x
    }

    fn select_slot(&self, mut pos: usize) -> u32 {
        let mut x = self.root;
        loop {
            let n = &self.nodes[x as usize];
            let l = self.live(n.left) as usize;
            if pos <= l {
                x = n.left;
            } else {
                let here = usize::from(n.alive);
                if here == 1 && pos == l + 1 {
                    return x;
                }
                pos -= l + here;
                x = n.right;
            }
        }
    }

    fn live_before_slot(&self, x: u32) -> usize {
        let mut acc = self.live(self.nodes[x as usize].left) as usize;
        let mut cur = x;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                return acc;
            }
            let pn = &self.nodes[p as usize];
            if pn.right == cur {
                acc += self.live(pn.left) as usize + usize::from(pn.alive);
            }
            cur = p;
        }
    }

    fn replace_child(&mut self, p: u32, old: u32, new: u32) {
        if p == NIL {
            self.root = new;
        } else if self.nodes[p as usize].left == old {
            self.nodes[p as usize].left = new;
        } else {
            self.nodes[p as usize].right = new;
        }
    }

    fn rotate_left(&mut self, x: u32) -> u32 {
        let y = self.nodes[x as usize].right;
        let p = self.nodes[x as usize].parent;
        let b = self.nodes[y as usize].left;
        self.nodes[x as usize].right = b;
        if b != NIL {
            self.nodes[b as usize].parent = x;
        }
        self.nodes[y as usize].left = x;
        self.nodes[x as usize].parent = y;
        self.nodes[y as usize].parent = p;
        self.replace_child(p, x, y);
        self.update(x);
        self.update(y);
        y
    }

    fn rotate_right(&mut self, x: u32) -> u32 {
        let y = self.nodes[x as usize].left;
        let p = self.nodes[x as usize].parent;
        let b = self.nodes[y as usize].right;
        self.nodes[x as usize].left = b;
        if b != NIL {
            self.nodes[b as usize].parent = x;
        }
        self.nodes[y as usize].right = x;
        self.nodes[x as usize].parent = y;
        self.nodes[y as usize].parent = p;
        self.replace_child(p, x, y);
        self.update(x);
        self.update(y);
        y
    }

    fn balance_factor(&self, x: u32) -> i16 {
        let n = &self.nodes[x as usize];
        i16::from(self.height(n.left)) - i16::from(self.height(n.right))
    }

    fn rebalance(&mut self, x: u32) -> u32 {
        let bf = self.balance_factor(x);
        if bf > 1 {
            let l = self.nodes[x as usize].left;
            if self.balance_factor(l) < 0 {
                self.rotate_left(l);
            }
            return self.rotate_right(x);
        }
        if bf < -1 {
            let r = self.nodes[x as usize].right;
            if self.balance_factor(r) > 0 {
                self.rotate_right(r);
            }
            return self.rotate_left(x);
        }
        x
    }

    fn retrace(&mut self, mut x: u32) {
        while x != NIL {
            self.update(x);
            let top = self.rebalance(x);
            x = self.nodes[top as usize].parent;
        }
    }

    fn transplant(&mut self, u: u32, v: u32) {
        let p = self.nodes[u as usize].parent;
        self.replace_child(p, u, v);
        if v != NIL {
            self.nodes[v as usize].parent = p;
        }
    }

    fn unlink(&mut self, z: u32) {
        let (zl, zr, zp) = {
            let n = &self.nodes[z as usize];
            (n.left, n.right, n.parent)
        };
        let start;
        if zl == NIL {
            start = zp;
            self.transplant(z, zr);
        } else if zr == NIL {
            start = zp;
            self.transplant(z, zl);
        } else {
            let y = self.leftmost(zr);
            if self.nodes[y as usize].parent != z {
                start = self.nodes[y as usize].parent;
                let yr = self.nodes[y as usize].right;
                self.transplant(y, yr);
                self.nodes[y as usize].right = zr;
                self.nodes[zr as usize].parent = y;
            } else {
                start = y;
            }
            self.transplant(z, y);
            self.nodes[y as usize].left = zl;
            self.nodes[zl as usize].parent = y;
        }
        let n = &mut self.nodes[z as usize];
        n.occupied = false;
        n.generation = n.generation.wrapping_add(1);
        n.left = NIL;
        n.right = NIL;
        n.parent = NIL;
        self.free.push(z);
        self.retrace(start);
    }
}

/// Iterator over `(handle, value)` of live elements in a rank range.
pub struct RangeIter<'a> {
    tree: &'a OrderTree,
    next: Option<ElementHandle>,
    remaining: usize,
}

impl Iterator for RangeIter<'_> {
    type Item = (ElementHandle, u32);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let h = self.next?;
        self.remaining -= 1;
        self.next = if self.remaining > 0 {
            self.tree.next_live(h).ok().flatten()
        } else {
            None
        };
        Some((h, self.tree.nodes[h.slot as usize].value))
    }
}
