//! Min-plus queries with witnesses for arbitrary `A` and a `B` whose rows are
//! non-increasing and whose column sums drop by at most `D` per step.
//!
//! Columns are grouped into blocks of width `Δ` and `W = Δ²`. A row that drops by
//! more than `W` inside a block is replaced by a large sentinel there, which makes
//! the matrix block-bounded; the true sums of those few rows live in per-column
//! exception trees.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::bounded_diff::{check_blocks, BdDiagnostics, BoundedDiffMpq, Sampling};
use super::{check_dims, check_finite, check_query, keep_min, MpqError, Witnessed};
use crate::collections::{MinForest, MinKey};
use crate::{Checksum, IndexSet, Matrix};

#[derive(Clone, Debug)]
struct Exceptions {
    /// Clipped inner indices, ascending.
    ks: Vec<u32>,
    /// One tree per row of `A`, slot `x` holding the true sum of `ks[x]`.
    sums: MinForest,
}

#[derive(Clone, Debug)]
pub struct MonotoneMpq {
    b: Matrix,
    delta: usize,
    w: i64,
    sentinel: i64,
    drop_bound: i64,
    inner: BoundedDiffMpq,
    /// Clipped indices of each block, ascending.
    clipped: Vec<Vec<u32>>,
    exceptions: BTreeMap<usize, Exceptions>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonoDiagnostics {
    pub delta: usize,
    pub w: i64,
    pub sentinel: i64,
    pub clipped_per_block: Vec<usize>,
    /// `Δ·D/W`, the most rows a block can clip.
    pub clip_limit: f64,
    pub inner: BdDiagnostics,
}

/// Checks that rows of `b` never increase and column sums drop by at most `bound`.
pub fn check_monotone(b: &Matrix, bound: i64) -> Result<(), MpqError> {
    check_finite(b, "B")?;
    for k in 0..b.rows() {
        for j in 1..b.cols() {
            if b.fin(k, j) > b.fin(k, j - 1) {
                return Err(MpqError::NotMonotone { k, j: j - 1 });
            }
        }
    }
    let col_sum = |j: usize| (0..b.rows()).map(|k| b.fin(k, j)).sum::<i64>();
    let mut prev = if b.cols() > 0 { col_sum(0) } else { 0 };
    for j in 1..b.cols() {
        let cur = col_sum(j);
        if prev - cur > bound {
            return Err(MpqError::DropBound { j: j - 1, drop: prev - cur, bound });
        }
        prev = cur;
    }
    Ok(())
}

/// Block width `max(1, ⌊L^{1/5} · n^{(2 - ω(s))/5}⌋)` with `s = log_n c`, capped at `cols`.
pub fn block_width(budget: usize, n: usize, c: usize, cols: usize, omega: fn(f64) -> f64) -> usize {
    let s = if n <= 1 || c <= 1 {
        1.0
    } else {
        libm::log(c as f64) / libm::log(n as f64)
    };
    let raw = libm::pow(budget as f64, 0.2) * libm::pow(n.max(1) as f64, (2.0 - omega(s)) / 5.0);
    let width = if raw.is_finite() && raw >= 1.0 { libm::floor(raw) as usize } else { 1 };
    width.clamp(1, cols.max(1))
}

impl MonotoneMpq {
    /// `budget` bounds query sets (`|S| < budget`); `drop_bound` is `D`.
    pub fn build(
        a: Matrix,
        b: Matrix,
        budget: usize,
        drop_bound: i64,
        omega: fn(f64) -> f64,
        sampling: Sampling,
    ) -> Result<Self, MpqError> {
        check_dims(&a, &b)?;
        check_monotone(&b, drop_bound)?;
        let (n, c, m) = (a.rows(), a.cols(), b.cols());
        let delta = block_width(budget, n.max(m), c, m, omega);
        Self::build_with_width(a, b, budget, drop_bound, delta, sampling)
    }

    /// Like [`build`](Self::build) with an explicit block width.
    pub fn build_with_width(
        a: Matrix,
        b: Matrix,
        budget: usize,
        drop_bound: i64,
        delta: usize,
        sampling: Sampling,
    ) -> Result<Self, MpqError> {
        check_dims(&a, &b)?;
        check_monotone(&b, drop_bound)?;
        if delta < 1 {
            return Err(MpqError::InvalidParameter("block width must be at least 1"));
        }
        let (n, c, m) = (a.rows(), a.cols(), b.cols());
        let w = (delta * delta) as i64;
        let sentinel = 4 * a.max_abs().max(b.max_abs()) + 4 * w + 1;

        let blocks = m.div_ceil(delta);
        let mut clipped_b = b.clone();
        let mut clipped = Vec::with_capacity(blocks);
        for blk in 0..blocks {
            let (start, end) = (blk * delta, ((blk + 1) * delta).min(m));
            let rows: Vec<u32> = (0..c)
                .filter(|&k| b.fin(k, start) - b.fin(k, end - 1) > w)
                .map(|k| k as u32)
                .collect();
            assert!(
                (rows.len() as f64) <= (delta as f64) * (drop_bound as f64) / (w as f64),
                "block {blk} clips {} rows",
                rows.len()
            );
            for &k in &rows {
                for j in start..end {
                    clipped_b.set(k as usize, j, Some(sentinel));
                }
            }
            clipped.push(rows);
        }
        debug_assert!(check_blocks(&clipped_b, delta, w).is_ok());

        let mut exceptions = BTreeMap::new();
        for j in 0..m {
            let ks = &clipped[j / delta];
            if ks.is_empty() {
                continue;
            }
            let mut sums = MinForest::new(n, ks.len());
            for i in 0..n {
                for (x, &k) in ks.iter().enumerate() {
                    if let Some(v) = a.get(i, k as usize) {
                        sums.set_untracked(i, x, Some(MinKey::new(v + b.fin(k as usize, j), k as usize)));
                    }
                }
            }
            exceptions.insert(j, Exceptions { ks: ks.clone(), sums });
        }

        let inner = BoundedDiffMpq::build(a, clipped_b, delta, w, budget, sampling)?;
        Ok(Self { b, delta, w, sentinel, drop_bound, inner, clipped, exceptions })
    }

    pub fn a(&self) -> &Matrix {
        self.inner.a()
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// `B` with clipped rows replaced by the sentinel.
    pub fn clipped_b(&self) -> &Matrix {
        self.inner.b()
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn w(&self) -> i64 {
        self.w
    }

    pub fn sentinel(&self) -> i64 {
        self.sentinel
    }

    pub fn budget(&self) -> usize {
        self.inner.budget()
    }

    pub fn is_clipped(&self, k: usize, j: usize) -> bool {
        self.clipped[j / self.delta].binary_search(&(k as u32)).is_ok()
    }

    pub fn diagnostics(&self) -> MonoDiagnostics {
        MonoDiagnostics {
            delta: self.delta,
            w: self.w,
            sentinel: self.sentinel,
            clipped_per_block: self.clipped.iter().map(Vec::len).collect(),
            clip_limit: self.delta as f64 * self.drop_bound as f64 / self.w as f64,
            inner: self.inner.diagnostics(),
        }
    }

    pub fn query(&mut self, i: usize, j: usize, s: &IndexSet) -> Result<Option<Witnessed>, MpqError> {
        check_query(self.inner.a(), &self.b, i, j, s)?;
        if s.len() >= self.budget() {
            return Err(MpqError::ForbiddenSetTooLarge { size: s.len(), limit: self.budget() });
        }
        Ok(self.query_unchecked(i, j, s))
    }

    pub(crate) fn query_unchecked(&mut self, i: usize, j: usize, s: &IndexSet) -> Option<Witnessed> {
        // A clipped witness means every remaining candidate carries the sentinel.
        let mut best = self.inner.query_unchecked(i, j, s).filter(|x| !self.is_clipped(x.witness, j));
        if let Some(ex) = self.exceptions.get_mut(&j) {
            for k in s.iter() {
                if let Ok(x) = ex.ks.binary_search(&(k as u32)) {
                    ex.sums.set(i, x, None);
                }
            }
            if let Some((key, _)) = ex.sums.min(i) {
                keep_min(&mut best, Witnessed::new(key.value, key.tag as usize));
            }
            ex.sums.rollback();
        }
        best
    }

    pub fn checksum(&self, acc: &mut Checksum) {
        acc.word(self.delta as u64).signed(self.sentinel).signed(self.drop_bound);
        self.inner.checksum(acc);
        for (&j, ex) in &self.exceptions {
            acc.word(j as u64).word(ex.ks.len() as u64);
            ex.sums.checksum(acc);
        }
    }
}
