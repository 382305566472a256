//! A rebuild expressed as a resumable queue of small work items, so it can be spread
//! over many operations while the previous snapshot keeps serving queries.
//!
//! The sequence is captured element by element. Captured elements are pinned, so
//! the walk survives deletions behind the cursor; values touched after the rebuild
//! started are tracked separately and become the next snapshot's modified set.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::snapshot::{build_node, frequent_values, node_weight, plan_nodes, BuildReport, CrossNode, NodePlan, Snapshot};
use super::Thresholds;
use crate::{ElementHandle, OrderTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Capture,
    Classify,
    Nodes,
    Release,
    Ready,
}

#[derive(Clone, Debug)]
pub(crate) struct StagedRebuild {
    epoch: u64,
    seed: u64,
    phase: Phase,
    cursor: Option<ElementHandle>,
    items: Vec<(ElementHandle, u32)>,
    freq: Vec<u32>,
    plans: Vec<NodePlan>,
    nodes: Vec<CrossNode>,
    report: BuildReport,
    released: usize,
    snapshot: Option<Snapshot>,
    expected_columns: usize,
    /// Values updated since the capture started.
    pub touched: BTreeSet<u32>,
    /// Updates since the capture started.
    pub updates: usize,
    /// Work to do per update under the deamortized schedule.
    pub per_update: usize,
}

impl StagedRebuild {
    pub fn start(epoch: u64, seed: u64, expected_columns: usize) -> Self {
        Self {
            epoch,
            seed,
            phase: Phase::Capture,
            cursor: None,
            items: Vec::new(),
            freq: Vec::new(),
            plans: Vec::new(),
            nodes: Vec::new(),
            report: BuildReport::default(),
            released: 0,
            snapshot: None,
            expected_columns,
            touched: BTreeSet::new(),
            updates: 0,
            per_update: 0,
        }
    }

    pub fn is_ready(&self) -> bool {
        self.phase == Phase::Ready
    }

    /// Estimated work units still to do.
    pub fn remaining(&self, order: &OrderTree, th: &Thresholds) -> usize {
        let seg = th.t3;
        match self.phase {
            Phase::Capture => {
                let len = order.len().max(self.items.len());
                let nodes: usize = plan_nodes(len, seg)
                    .iter()
                    .map(|p| node_weight(p, seg, self.expected_columns))
                    .sum();
                (len - self.items.len()) + len + nodes + len
            }
            Phase::Classify => {
                let nodes: usize = plan_nodes(self.items.len(), seg)
                    .iter()
                    .map(|p| node_weight(p, seg, self.expected_columns))
                    .sum();
                2 * self.items.len() + nodes
            }
            Phase::Nodes => {
                let nodes: usize = self.plans[self.nodes.len()..]
                    .iter()
                    .map(|p| node_weight(p, seg, self.freq.len()))
                    .sum();
                nodes + self.items.len()
            }
            Phase::Release => self.items.len() - self.released,
            Phase::Ready => 0,
        }
    }

    /// Does at least one item of work and stops once `budget` units are spent.
    pub fn step(&mut self, order: &mut OrderTree, th: &Thresholds, budget: usize) {
        let mut spent = 0;
        while spent < budget.max(1) && self.phase != Phase::Ready {
            spent += self.item(order, th);
        }
    }

    fn item(&mut self, order: &mut OrderTree, th: &Thresholds) -> usize {
        match self.phase {
            Phase::Capture => {
                let next = match self.cursor {
                    Some(h) => order.next_live(h).expect("cursor is pinned"),
                    None => order.first().and_then(|h| {
                        if order.is_alive(h) {
                            Some(h)
                        } else {
                            order.next_live(h).expect("valid handle")
                        }
                    }),
                };
                match next {
                    Some(h) => {
                        order.pin(h).expect("live handle");
                        self.items.push((h, order.value(h).expect("live handle")));
                        self.cursor = Some(h);
                    }
                    None => self.phase = Phase::Classify,
                }
                1
            }
            Phase::Classify => {
                self.freq = frequent_values(&self.items, th);
                self.plans = plan_nodes(self.items.len(), th.t3);
                self.phase = Phase::Nodes;
                self.items.len().max(1)
            }
            Phase::Nodes => {
                let x = self.nodes.len();
                if x == self.plans.len() {
                    let snap = Snapshot::assemble(
                        self.epoch,
                        self.items.len(),
                        core::mem::take(&mut self.freq),
                        core::mem::take(&mut self.nodes),
                        core::mem::take(&mut self.report),
                        order,
                    );
                    self.snapshot = Some(snap);
                    self.phase = Phase::Release;
                    return 1;
                }
                let plan = self.plans[x];
                let node_seed = super::mix(self.seed ^ (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let node = build_node(plan, &self.items, &self.freq, th, node_seed, &mut self.report);
                self.nodes.push(node);
                node_weight(&plan, th.t3, self.freq.len())
            }
            Phase::Release => {
                if self.released == self.items.len() {
                    self.phase = Phase::Ready;
                } else {
                    order.unpin(self.items[self.released].0).expect("captured handle");
                    self.released += 1;
                }
                1
            }
            Phase::Ready => 0,
        }
    }

    /// Drops unfinished work, releasing every pin it holds.
    pub fn abandon(mut self, order: &mut OrderTree) {
        if let Some(s) = self.snapshot.take() {
            s.retire(order);
        }
        for &(h, _) in &self.items[self.released..] {
            order.unpin(h).expect("captured handle");
        }
    }

    pub fn take_snapshot(&mut self) -> Snapshot {
        debug_assert!(self.is_ready());
        self.snapshot.take().expect("finished rebuild has a snapshot")
    }
}
