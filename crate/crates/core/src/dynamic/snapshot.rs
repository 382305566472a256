//! The frozen part of the structure: frequent values and a balanced hierarchy of
//! crossing nodes, each with segment-prefix count matrices behind a [`MonotoneMpq`].

use alloc::vec;
use alloc::vec::Vec;

use super::Thresholds;
use crate::mpq::omega::default_omega;
use crate::mpq::{MonotoneMpq, MpqError, Sampling};
use crate::{Checksum, ElementHandle, IndexSet, Matrix, OrderTree};

/// Shape of one crossing node over frozen indices `[lo, hi)`; the right half starts at `mid`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct NodePlan {
    pub lo: usize,
    pub mid: usize,
    pub hi: usize,
    pub children: [Option<usize>; 2],
}

/// Nodes in preorder; a range becomes a node only when it is longer than two segments.
pub(crate) fn plan_nodes(len: usize, seg: usize) -> Vec<NodePlan> {
    fn go(lo: usize, hi: usize, seg: usize, out: &mut Vec<NodePlan>) -> Option<usize> {
        if hi - lo <= 2 * seg {
            return None;
        }
        let mid = (lo + hi) / 2;
        let me = out.len();
        out.push(NodePlan { lo, mid, hi, children: [None, None] });
        let left = go(lo, mid, seg, out);
        let right = go(mid, hi, seg, out);
        out[me].children = [left, right];
        Some(me)
    }
    let mut out = Vec::new();
    go(0, len, seg.max(1), &mut out);
    out
}

/// Approximate cost of building a node, in the same units as one captured element.
pub(crate) fn node_weight(plan: &NodePlan, seg: usize, columns: usize) -> usize {
    let rows = (plan.mid - plan.lo).div_ceil(seg) + 1;
    let cols = (plan.hi - plan.mid).div_ceil(seg) + 1;
    rows * cols * columns.max(1)
}

#[derive(Clone, Debug)]
pub(crate) struct CrossNode {
    pub plan: NodePlan,
    pub mid: ElementHandle,
    /// First element of left segment `s` (index `s - 1`), moving away from `mid`.
    pub left_starts: Vec<ElementHandle>,
    /// Element just past right segment `s`; `None` is the end of the sequence.
    pub right_ends: Vec<Option<ElementHandle>>,
    pub mpq: Option<MonotoneMpq>,
}

/// Structural problems found while building nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub nodes: usize,
    pub violations: usize,
    pub clipped_rows: usize,
}

pub(crate) fn build_node(
    plan: NodePlan,
    items: &[(ElementHandle, u32)],
    freq: &[u32],
    th: &Thresholds,
    seed: u64,
    report: &mut BuildReport,
) -> CrossNode {
    let seg = th.t3;
    let left_count = (plan.mid - plan.lo).div_ceil(seg);
    let right_count = (plan.hi - plan.mid).div_ceil(seg);
    let left_starts = (1..=left_count)
        .map(|s| items[plan.mid.saturating_sub(s * seg).max(plan.lo)].0)
        .collect();
    let right_ends = (1..=right_count)
        .map(|s| items.get((plan.mid + s * seg).min(plan.hi)).map(|x| x.0))
        .collect();

    let mpq = if freq.is_empty() {
        None
    } else {
        let column = |v: u32| freq.binary_search(&v).ok();
        let mut a = Matrix::infinite(left_count + 1, freq.len());
        let mut acc = vec![0i64; freq.len()];
        for k in 0..freq.len() {
            a.set(0, k, Some(0));
        }
        for s in 1..=left_count {
            let (from, to) = (plan.mid.saturating_sub(s * seg).max(plan.lo), plan.mid - (s - 1) * seg);
            for &(_, v) in &items[from..to] {
                if let Some(k) = column(v) {
                    acc[k] += 1;
                }
            }
            for (k, &x) in acc.iter().enumerate() {
                a.set(s, k, Some(-x));
            }
        }
        let mut b = Matrix::infinite(freq.len(), right_count + 1);
        acc.fill(0);
        for k in 0..freq.len() {
            b.set(k, 0, Some(0));
        }
        for s in 1..=right_count {
            let (from, to) = (plan.mid + (s - 1) * seg, (plan.mid + s * seg).min(plan.hi));
            for &(_, v) in &items[from..to] {
                if let Some(k) = column(v) {
                    acc[k] += 1;
                }
            }
            for (k, &x) in acc.iter().enumerate() {
                b.set(k, s, Some(-x));
            }
        }
        match MonotoneMpq::build(a, b, th.t2, seg as i64, default_omega, Sampling::Seeded(seed)) {
            Ok(m) => {
                let d = m.diagnostics();
                report.clipped_rows += d.clipped_per_block.iter().sum::<usize>();
                report.violations +=
                    d.clipped_per_block.iter().filter(|&&x| x as f64 > d.clip_limit).count();
                Some(m)
            }
            Err(MpqError::NotMonotone { .. } | MpqError::DropBound { .. }) => {
                report.violations += 1;
                None
            }
            Err(e) => panic!("segment matrices rejected: {e}"),
        }
    };
    report.nodes += 1;
    CrossNode { plan, mid: items[plan.mid].0, left_starts, right_ends, mpq }
}

/// Sorted values occurring more than `N / T1` times.
pub(crate) fn frequent_values(items: &[(ElementHandle, u32)], th: &Thresholds) -> Vec<u32> {
    let mut vals: Vec<u32> = items.iter().map(|x| x.1).collect();
    vals.sort_unstable();
    let mut out = Vec::new();
    let mut x = 0;
    while x < vals.len() {
        let run = vals[x..].iter().take_while(|&&v| v == vals[x]).count();
        if th.is_frequent(run) {
            out.push(vals[x]);
        }
        x += run;
    }
    out
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Snapshot {
    pub epoch: u64,
    pub frozen_len: usize,
    pub freq: Vec<u32>,
    pub nodes: Vec<CrossNode>,
    pub pinned: Vec<ElementHandle>,
    pub report: BuildReport,
}

/// What a crossing node contributes to one query.
pub(crate) struct Crossing<'a> {
    pub node: &'a mut CrossNode,
    /// Covered left and right segments.
    pub i: usize,
    pub j: usize,
    /// Positions scanned outside the covered segments.
    pub scan: [(usize, usize); 2],
    pub covered: usize,
}

pub(crate) enum Route<'a> {
    Scan,
    Cross(Crossing<'a>),
}

impl Snapshot {
    pub fn assemble(
        epoch: u64,
        frozen_len: usize,
        freq: Vec<u32>,
        nodes: Vec<CrossNode>,
        report: BuildReport,
        order: &mut OrderTree,
    ) -> Self {
        let mut pinned = Vec::new();
        for n in &nodes {
            pinned.push(n.mid);
            pinned.extend(n.left_starts.iter().copied());
            pinned.extend(n.right_ends.iter().flatten().copied());
        }
        pinned.sort_unstable();
        pinned.dedup();
        for &h in &pinned {
            order.pin(h).expect("snapshot handles are live or pinned");
        }
        Self { epoch, frozen_len, freq, nodes, pinned, report }
    }

    pub fn retire(self, order: &mut OrderTree) {
        for h in self.pinned {
            order.unpin(h).expect("snapshot pinned its handles");
        }
    }

    pub fn column(&self, v: u32) -> Option<usize> {
        self.freq.binary_search(&v).ok()
    }

    /// Finds the node whose midpoint splits `[l, r]`, if any.
    pub fn route(&mut self, order: &OrderTree, l: usize, r: usize) -> Route<'_> {
        let pos = |h: ElementHandle| order.live_before(h).expect("pinned handle");
        let mut cur = if self.nodes.is_empty() { None } else { Some(0) };
        while let Some(x) = cur {
            let node = &self.nodes[x];
            let mid_pos = pos(node.mid) + 1;
            if r < mid_pos {
                cur = node.plan.children[0];
            } else if l >= mid_pos {
                cur = node.plan.children[1];
            } else {
                break;
            }
        }
        let Some(x) = cur else { return Route::Scan };
        let node = &mut self.nodes[x];
        let mid_pos = pos(node.mid) + 1;
        let len = order.len();
        // left segment s covers [pos(start_s) + 1, mid_pos - 1]
        let start_pos = |s: usize| if s == 0 { mid_pos } else { pos(node.left_starts[s - 1]) + 1 };
        let end_pos = |s: usize| match s {
            0 => mid_pos - 1,
            _ => node.right_ends[s - 1].map_or(len, pos),
        };
        let i = last_true(node.left_starts.len(), |s| start_pos(s) >= l);
        let j = last_true(node.right_ends.len(), |s| end_pos(s) <= r);
        let (lo, hi) = (start_pos(i), end_pos(j));
        Route::Cross(Crossing {
            i,
            j,
            scan: [(l, lo - 1), (hi + 1, r)],
            covered: hi + 1 - lo,
            node,
        })
    }

    pub fn checksum(&self, acc: &mut Checksum) {
        acc.word(self.epoch).word(self.frozen_len as u64).word(self.freq.len() as u64);
        for &v in &self.freq {
            acc.word(u64::from(v));
        }
        for n in &self.nodes {
            acc.word(n.plan.lo as u64).word(n.plan.mid as u64).word(n.plan.hi as u64);
            acc.word(n.mid.to_word());
            for h in &n.left_starts {
                acc.word(h.to_word());
            }
            for h in &n.right_ends {
                acc.word(h.map_or(0, |h| h.to_word() + 1));
            }
            match &n.mpq {
                Some(m) => m.checksum(acc.word(1)),
                None => {
                    acc.word(0);
                }
            }
        }
    }
}

/// Largest `s` in `0..=n` with `pred(s)`, where `pred` holds on a prefix and `pred(0)`.
fn last_true(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let m = (lo + hi).div_ceil(2);
        if pred(m) {
            lo = m;
        } else {
            hi = m - 1;
        }
    }
    lo
}

/// Minimum of the node's matrices at `(i, j)` with the given columns excluded.
pub(crate) fn best_column(node: &mut CrossNode, i: usize, j: usize, s: &IndexSet) -> Option<(usize, i64)> {
    let mpq = node.mpq.as_mut()?;
    let w = mpq.query(i, j, s).expect("query inside the matrices");
    w.map(|w| (w.witness, -w.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_shapes() {
        assert!(plan_nodes(0, 1).is_empty());
        assert!(plan_nodes(4, 2).is_empty());
        let p = plan_nodes(5, 2);
        assert_eq!(p, vec![NodePlan { lo: 0, mid: 2, hi: 5, children: [None, None] }]);
        let p = plan_nodes(16, 1);
        assert_eq!(p[0].mid, 8);
        assert_eq!(p[0].children, [Some(1), Some(p[0].children[1].unwrap())]);
        // every node spans more than two segments and children nest inside parents
        for n in &p {
            assert!(n.hi - n.lo > 2);
            for (side, c) in n.children.iter().enumerate() {
                if let Some(c) = c {
                    let (lo, hi) = if side == 0 { (n.lo, n.mid) } else { (n.mid, n.hi) };
                    assert_eq!((p[*c].lo, p[*c].hi), (lo, hi));
                }
            }
        }
    }

    #[test]
    fn last_true_search() {
        assert_eq!(last_true(0, |_| true), 0);
        assert_eq!(last_true(5, |s| s <= 3), 3);
        assert_eq!(last_true(5, |_| true), 5);
        assert_eq!(last_true(5, |s| s == 0), 0);
    }
}
