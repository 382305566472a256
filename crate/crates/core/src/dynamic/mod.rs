//! Dynamic range mode: insertions, deletions and "most frequent value in positions
//! `l..=r`" queries over a sequence of at most `N` values.
//!
//! A query takes the best of four candidate sources:
//!
//! 1. windowed occurrence pairs, which find any mode of frequency at most `⌈N/T1⌉`;
//! 2. a direct count of every value updated since the last rebuild;
//! 3. a scan of the few elements outside the covered segments of a crossing node;
//! 4. a min-plus query over that node's segment-prefix counts for the remaining
//!    frequent values.
//!
//! Every candidate's frequency is recounted, so reported frequencies are exact.

mod snapshot;
mod staged;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::collections::{OccurrenceTree, PairTree};
use crate::{Checksum, IndexSet, OrderTree};
use snapshot::{best_column, Route, Snapshot};
use staged::StagedRebuild;

pub use snapshot::BuildReport;

/// Default `t2`, the point where update and rebuild costs balance.
pub const DEFAULT_T2: f64 = 0.655994;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeConfig {
    /// Upper bound `N` on the sequence length.
    pub capacity: usize,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Spread rebuilds over the operations that precede them.
    pub deamortize: bool,
    pub seed: u64,
}

impl ModeConfig {
    /// `t2` = [`DEFAULT_T2`], `t1 = 1 - t2/2`, `t3 = t2`.
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            t1: 1.0 - DEFAULT_T2 / 2.0,
            t2: DEFAULT_T2,
            t3: DEFAULT_T2,
            deamortize: false,
            seed: 0,
        }
    }

    pub fn exponents(mut self, t1: f64, t2: f64, t3: f64) -> Self {
        self.t1 = t1;
        self.t2 = t2;
        self.t3 = t3;
        self
    }

    pub fn deamortized(mut self, on: bool) -> Self {
        self.deamortize = on;
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn thresholds(&self) -> Thresholds {
        let n = self.capacity.max(1);
        let pow = |t: f64| (libm::ceil(libm::pow(n as f64, t)) as usize).clamp(1, n);
        let t1 = pow(self.t1);
        Thresholds {
            capacity: n,
            t1,
            t2: pow(self.t2),
            t3: pow(self.t3),
            windows: n.div_ceil(t1),
        }
    }
}

/// Integer thresholds `T_x = ⌈N^{t_x}⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub capacity: usize,
    /// Values with more than `N / T1` occurrences are frequent.
    pub t1: usize,
    /// Updates between rebuilds; also the forbidden-set budget.
    pub t2: usize,
    /// Segment length.
    pub t3: usize,
    /// Largest window size kept in the pair trees, `⌈N / T1⌉`.
    pub windows: usize,
}

impl Thresholds {
    pub fn is_frequent(&self, count: usize) -> bool {
        count * self.t1 > self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModeError {
    #[error("sequence already holds {capacity} elements")]
    CapacityExceeded { capacity: usize },
    #[error("position {pos} out of range 1..={max}")]
    PositionOutOfRange { pos: usize, max: usize },
    #[error("range [{l}, {r}] invalid for length {len}")]
    RangeOutOfBounds { l: usize, r: usize, len: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("staged rebuilds need the deamortize option")]
    NotDeamortized,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Which candidate sources a query consults. All on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sources {
    pub windows: bool,
    pub modified: bool,
    pub scan: bool,
    pub matrix: bool,
}

impl Default for Sources {
    fn default() -> Self {
        Self { windows: true, modified: true, scan: true, matrix: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModeStats {
    pub rebuilds: usize,
    pub matrix_queries: usize,
    pub largest_forbidden_set: usize,
    /// Matrix queries whose forbidden set reached the budget.
    pub budget_violations: usize,
    /// Structural violations found while building snapshots.
    pub build_violations: usize,
    /// Most rebuild work done during a single update.
    pub max_step_work: usize,
}

#[derive(Clone, Debug)]
pub struct DynamicMode {
    config: ModeConfig,
    th: Thresholds,
    order: OrderTree,
    occ: BTreeMap<u32, OccurrenceTree>,
    /// `pairs[k - 2]` holds windows of `k` consecutive occurrences.
    pairs: Vec<PairTree>,
    snapshot: Snapshot,
    modified: BTreeSet<u32>,
    updates_since: usize,
    staged: Option<StagedRebuild>,
    epoch: u64,
    sources: Sources,
    stats: ModeStats,
}

pub(crate) fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl DynamicMode {
    pub fn new(config: ModeConfig) -> Result<Self, ModeError> {
        if config.capacity == 0 {
            return Err(ModeError::InvalidConfig("capacity must be positive"));
        }
        for t in [config.t1, config.t2, config.t3] {
            if !(0.0..=1.0).contains(&t) {
                return Err(ModeError::InvalidConfig("exponents must lie in [0, 1]"));
            }
        }
        let th = config.thresholds();
        Ok(Self {
            pairs: (2..=th.windows).map(|_| PairTree::new()).collect(),
            config,
            th,
            order: OrderTree::new(),
            occ: BTreeMap::new(),
            snapshot: Snapshot::default(),
            modified: BTreeSet::new(),
            updates_since: 0,
            staged: None,
            epoch: 0,
            sources: Sources::default(),
            stats: ModeStats::default(),
        })
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn thresholds(&self) -> Thresholds {
        self.th
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn values(&self) -> Vec<u32> {
        self.order.values()
    }

    pub fn stats(&self) -> &ModeStats {
        &self.stats
    }

    pub fn set_sources(&mut self, sources: Sources) {
        self.sources = sources;
    }

    /// Values updated since the current snapshot was taken.
    pub fn modified(&self) -> impl Iterator<Item = u32> + '_ {
        self.modified.iter().copied()
    }

    pub fn updates_since_rebuild(&self) -> usize {
        self.updates_since
    }

    pub fn is_staging(&self) -> bool {
        self.staged.is_some()
    }

    /// Frequent values of the current snapshot, ascending.
    pub fn frequent_values(&self) -> &[u32] {
        &self.snapshot.freq
    }

    pub fn build_report(&self) -> &BuildReport {
        &self.snapshot.report
    }

    /// Positions of the occurrences of `v`.
    pub fn occurrences(&self, v: u32) -> Vec<usize> {
        self.occ.get(&v).map_or_else(Vec::new, |t| {
            t.handles().into_iter().map(|h| self.order.rank(h).expect("live occurrence")).collect()
        })
    }

    /// Stored windows of `k` consecutive occurrences, as position pairs.
    pub fn windows(&self, k: usize) -> Vec<(usize, usize)> {
        if k < 2 || k > self.th.windows {
            return Vec::new();
        }
        let rank = |h| self.order.rank(h).expect("live element");
        let mut out: Vec<(usize, usize)> =
            self.pairs[k - 2].pairs().into_iter().map(|(a, b)| (rank(a), rank(b))).collect();
        out.sort_unstable();
        out
    }

    pub fn insert(&mut self, pos: usize, value: u32) -> Result<(), ModeError> {
        let len = self.order.len();
        if len >= self.th.capacity {
            return Err(ModeError::CapacityExceeded { capacity: self.th.capacity });
        }
        if pos == 0 || pos > len + 1 {
            return Err(ModeError::PositionOutOfRange { pos, max: len + 1 });
        }
        let h = self.order.insert(pos, value).expect("position checked");
        let occ = self.occ.entry(value).or_default();
        let p = occ.count_in_range(&self.order, 1, pos - 1) + 1;
        let t = occ.len();
        for k in 2..=self.th.windows {
            let tree = &mut self.pairs[k - 2];
            for x in window_starts(p as isize + 1 - k as isize, p as isize - 1, (t + 1).saturating_sub(k)) {
                tree.remove(&self.order, occ.select(x).expect("occurrence")).expect("stored window");
            }
        }
        occ.insert(&self.order, h).expect("fresh handle");
        for k in 2..=self.th.windows {
            let tree = &mut self.pairs[k - 2];
            for x in window_starts(p as isize + 1 - k as isize, p as isize, (t + 2).saturating_sub(k)) {
                let (a, b) = (occ.select(x).expect("occurrence"), occ.select(x + k - 1).expect("occurrence"));
                tree.insert(&self.order, a, b).expect("ordered window");
            }
        }
        self.after_update(value);
        Ok(())
    }

    pub fn delete(&mut self, pos: usize) -> Result<u32, ModeError> {
        let len = self.order.len();
        if len == 0 {
            return Err(ModeError::EmptySequence);
        }
        let h = self
            .order
            .select(pos)
            .ok_or(ModeError::PositionOutOfRange { pos, max: len })?;
        let value = self.order.value(h).expect("live handle");
        let occ = self.occ.get_mut(&value).expect("value has occurrences");
        let p = occ.index_of(&self.order, h).expect("live handle");
        let t = occ.len();
        for k in 2..=self.th.windows {
            let tree = &mut self.pairs[k - 2];
            for x in window_starts(p as isize + 1 - k as isize, p as isize, (t + 1).saturating_sub(k)) {
                tree.remove(&self.order, occ.select(x).expect("occurrence")).expect("stored window");
            }
        }
        occ.remove(&self.order, h).expect("stored occurrence");
        self.order.remove(h).expect("live handle");
        for k in 2..=self.th.windows {
            let tree = &mut self.pairs[k - 2];
            for x in window_starts(p as isize + 1 - k as isize, p as isize - 1, t.saturating_sub(k)) {
                let (a, b) = (occ.select(x).expect("occurrence"), occ.select(x + k - 1).expect("occurrence"));
                tree.insert(&self.order, a, b).expect("ordered window");
            }
        }
        if occ.is_empty() {
            self.occ.remove(&value);
        }
        self.after_update(value);
        Ok(value)
    }

    fn after_update(&mut self, value: u32) {
        self.modified.insert(value);
        self.updates_since += 1;
        let t2 = self.th.t2;
        if !self.config.deamortize || t2 <= 3 {
            if self.updates_since >= t2 {
                self.rebuild();
            }
            return;
        }
        if let Some(st) = self.staged.as_mut() {
            st.touched.insert(value);
            st.updates += 1;
        } else if self.updates_since >= t2 / 2 {
            self.begin_staging();
            let window = (t2 - 1).saturating_sub(self.updates_since).max(1);
            let total = {
                let st = self.staged.as_ref().expect("just started");
                st.remaining(&self.order, &self.th)
            };
            self.staged.as_mut().expect("just started").per_update = total.div_ceil(window);
        }
        let Some(st) = self.staged.as_mut() else { return };
        let before = st.remaining(&self.order, &self.th);
        let budget = if self.updates_since >= t2 - 1 { usize::MAX } else { st.per_update };
        st.step(&mut self.order, &self.th, budget);
        let after = st.remaining(&self.order, &self.th);
        self.stats.max_step_work = self.stats.max_step_work.max(before.saturating_sub(after));
        if st.is_ready() {
            self.swap_in_staged();
        }
    }

    fn begin_staging(&mut self) {
        self.epoch += 1;
        let expected = self.occ.values().filter(|t| self.th.is_frequent(t.len())).count();
        self.staged = Some(StagedRebuild::start(self.epoch, mix(self.config.seed ^ mix(self.epoch)), expected));
    }

    fn swap_in_staged(&mut self) {
        let mut st = self.staged.take().expect("staged rebuild");
        let fresh = st.take_snapshot();
        let old = core::mem::replace(&mut self.snapshot, fresh);
        old.retire(&mut self.order);
        self.stats.build_violations += self.snapshot.report.violations;
        self.stats.rebuilds += 1;
        self.modified = core::mem::take(&mut st.touched);
        self.updates_since = st.updates;
    }

    /// Rebuilds the snapshot from the current sequence at once.
    pub fn rebuild(&mut self) {
        if let Some(st) = self.staged.take() {
            st.abandon(&mut self.order);
        }
        self.begin_staging();
        let st = self.staged.as_mut().expect("just started");
        st.step(&mut self.order, &self.th, usize::MAX);
        self.swap_in_staged();
    }

    /// Advances (starting if needed) a staged rebuild by about `budget` work units and
    /// returns the estimated work left; 0 means the new snapshot is in service.
    pub fn rebuild_step(&mut self, budget: usize) -> Result<usize, ModeError> {
        if !self.config.deamortize {
            return Err(ModeError::NotDeamortized);
        }
        if self.staged.is_none() {
            self.begin_staging();
        }
        let st = self.staged.as_mut().expect("staged rebuild");
        st.step(&mut self.order, &self.th, budget);
        if st.is_ready() {
            self.swap_in_staged();
            return Ok(0);
        }
        Ok(st.remaining(&self.order, &self.th).max(1))
    }

    fn count(&self, v: u32, l: usize, r: usize) -> usize {
        self.occ.get(&v).map_or(0, |t| t.count_in_range(&self.order, l, r))
    }

    /// A most frequent value in positions `l..=r` (1-based, inclusive) and its frequency.
    pub fn query(&mut self, l: usize, r: usize) -> Result<(u32, usize), ModeError> {
        let len = self.order.len();
        if len == 0 {
            return Err(ModeError::EmptySequence);
        }
        if l == 0 || l > r || r > len {
            return Err(ModeError::RangeOutOfBounds { l, r, len });
        }
        let mut best: Option<(u32, usize)> = None;
        let mut offer = |v: u32, f: usize| {
            if best.is_none_or(|(bv, bf)| f > bf || (f == bf && v < bv)) {
                best = Some((v, f));
            }
        };

        if self.sources.windows {
            let v = self.longest_window(l, r);
            offer(v, self.count(v, l, r));
        }
        if self.sources.modified {
            for &v in &self.modified {
                let f = self.count(v, l, r);
                if f > 0 {
                    offer(v, f);
                }
            }
        }

        let forbidden: IndexSet = self.modified.iter().filter_map(|&v| self.snapshot.column(v)).collect();
        let mut scanned: Vec<u32> = Vec::new();
        let mut matrix_pick: Option<u32> = None;
        match self.snapshot.route(&self.order, l, r) {
            Route::Scan => {
                scanned.extend(self.order.range(l, r).map(|x| x.1));
            }
            Route::Cross(cross) => {
                let mut seen = 0;
                for (a, b) in cross.scan {
                    for (_, v) in self.order.range(a, b) {
                        scanned.push(v);
                        seen += 1;
                    }
                }
                debug_assert_eq!(seen + cross.covered, r + 1 - l, "every element covered or scanned");
                if self.sources.matrix && cross.i + cross.j > 0 {
                    self.stats.matrix_queries += 1;
                    self.stats.largest_forbidden_set = self.stats.largest_forbidden_set.max(forbidden.len());
                    if forbidden.len() >= self.th.t2 {
                        self.stats.budget_violations += 1;
                    } else if let Some((k, _)) = best_column(cross.node, cross.i, cross.j, &forbidden) {
                        matrix_pick = Some(self.snapshot.freq[k]);
                    }
                }
            }
        }
        if self.sources.scan {
            scanned.sort_unstable();
            scanned.dedup();
            for &v in &scanned {
                offer(v, self.count(v, l, r));
            }
        }
        if let Some(v) = matrix_pick {
            offer(v, self.count(v, l, r));
        }
        Ok(best.expect("a non-empty range has a candidate"))
    }

    /// Value of the longest stored window inside `[l, r]`, or the value at `l`.
    fn longest_window(&self, l: usize, r: usize) -> u32 {
        let (mut lo, mut hi) = (1, self.th.windows.min(r + 1 - l));
        while lo < hi {
            let k = (lo + hi).div_ceil(2);
            if self.pairs[k - 2].exists_within(&self.order, l, r) {
                lo = k;
            } else {
                hi = k - 1;
            }
        }
        let h = if lo >= 2 {
            self.pairs[lo - 2].find_within(&self.order, l, r).expect("window found").0
        } else {
            self.order.select(l).expect("position in range")
        };
        self.order.value(h).expect("live element")
    }

    /// Digest of the observable state: sequence, snapshot, modified set, counters.
    pub fn checksum(&self) -> u64 {
        let mut acc = Checksum::new();
        self.order.checksum(&mut acc);
        self.snapshot.checksum(&mut acc);
        acc.word(self.modified.len() as u64).word(self.updates_since as u64);
        for &v in &self.modified {
            acc.word(u64::from(v));
        }
        for t in &self.pairs {
            acc.word(t.len() as u64);
        }
        acc.finish()
    }

    /// Digest of the current snapshot alone.
    pub fn snapshot_checksum(&self) -> u64 {
        let mut acc = Checksum::new();
        self.snapshot.checksum(&mut acc);
        acc.finish()
    }

    /// Re-validates the matrices of every crossing node; returns the number of
    /// nodes whose right-hand matrix is not monotone with drops bounded by `T3`.
    pub fn validate_snapshot(&self) -> usize {
        self.snapshot
            .nodes
            .iter()
            .filter_map(|n| n.mpq.as_ref())
            .filter(|m| crate::mpq::check_monotone(m.b(), self.th.t3 as i64).is_err())
            .count()
    }

    /// Number of crossing nodes in the current snapshot.
    pub fn snapshot_nodes(&self) -> usize {
        self.snapshot.nodes.len()
    }
}

/// Window start indices `x` (1-based) with `lo <= x <= hi` and `x <= last`.
fn window_starts(lo: isize, hi: isize, last: usize) -> core::ops::RangeInclusive<usize> {
    let lo = lo.max(1) as usize;
    let hi = (hi.max(0) as usize).min(last);
    lo..=hi
}
