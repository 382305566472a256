//! Min-plus queries with witnesses for arbitrary `A` and a `B` whose rows vary by at
//! most `W` inside each block of `Δ` consecutive columns.
//!
//! Within a block every column is approximated by the block's last column. For each
//! `(i, block)` the threshold `Ĉ` is the `L`-th smallest approximate sum. Pairs
//! `(i, k)` whose sum lands near the threshold at a sampled column are *covered* and
//! answered by a [`BucketedMpq`] on shifted matrices; the rest are handled by two
//! short candidate lists. The answer is exact whatever columns get sampled.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bucketed::BucketedMpq;
use super::{check_dims, check_finite, check_query, keep_min, sum, MpqError, Witnessed};
use crate::{Checksum, IndexSet, Matrix};

/// How the sampled column of every round is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Uniform columns from a ChaCha stream.
    Seeded(u64),
    /// Fixed columns, reused cyclically if there are fewer than rounds.
    Columns(Vec<usize>),
}

const UNCOVERED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct BoundedDiffMpq {
    a: Matrix,
    b: Matrix,
    delta: usize,
    w: i64,
    l: usize,
    blocks: usize,
    /// `n × blocks`.
    threshold: Vec<Option<i64>>,
    /// `n × blocks`: indices whose approximate sum sits more than `2W` below the
    /// threshold (every finite index when there is no threshold), ascending.
    below: Vec<Vec<u32>>,
    sampled: Vec<usize>,
    rounds: Vec<Option<BucketedMpq>>,
    /// `n × c`: covering round or [`UNCOVERED`].
    covered: Vec<u32>,
    /// `n × m`: up to `L` uncovered indices near the threshold, ascending by exact sum.
    near: Vec<Vec<u32>>,
    band_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdDiagnostics {
    pub delta: usize,
    pub w: i64,
    pub budget: usize,
    pub rounds: usize,
    pub bucket_size: usize,
    pub covered_pairs: usize,
    /// Uncovered `(i, k, j)` within `2W` of the threshold, before truncation.
    pub uncovered_triples: usize,
    pub stored_triples: usize,
}

impl BoundedDiffMpq {
    /// `budget` bounds query sets: queries need `|S| < budget`.
    pub fn build(
        a: Matrix,
        b: Matrix,
        delta: usize,
        w: i64,
        budget: usize,
        sampling: Sampling,
    ) -> Result<Self, MpqError> {
        check_dims(&a, &b)?;
        if budget < 1 {
            return Err(MpqError::InvalidParameter("query budget must be at least 1"));
        }
        if delta < 1 {
            return Err(MpqError::InvalidParameter("block width must be at least 1"));
        }
        if w < 0 {
            return Err(MpqError::InvalidParameter("W must be non-negative"));
        }
        if matches!(&sampling, Sampling::Columns(v) if v.is_empty()) {
            return Err(MpqError::InvalidParameter("no sampled columns given"));
        }
        check_finite(&b, "B")?;
        check_blocks(&b, delta, w)?;

        let (n, c, m) = (a.rows(), a.cols(), b.cols());
        let blocks = m.div_ceil(delta);
        let mut this = Self {
            a,
            b,
            delta,
            w,
            l: budget,
            blocks,
            threshold: vec![None; n * blocks],
            below: vec![Vec::new(); n * blocks],
            sampled: Vec::new(),
            rounds: Vec::new(),
            covered: vec![UNCOVERED; n * c],
            near: vec![Vec::new(); n * m],
            band_size: 0,
        };

        let mut sums: Vec<(i64, u32)> = Vec::with_capacity(c);
        for i in 0..n {
            for blk in 0..blocks {
                let rep = this.representative(blk);
                sums.clear();
                sums.extend((0..c).filter_map(|k| {
                    this.a.get(i, k).map(|x| (x + this.b.fin(k, rep), k as u32))
                }));
                sums.sort_unstable();
                let cell = i * blocks + blk;
                if sums.len() < budget {
                    this.below[cell] = sums.iter().map(|x| x.1).collect();
                } else {
                    let t = sums[budget - 1].0;
                    this.threshold[cell] = Some(t);
                    this.below[cell] = sums.iter().take_while(|x| x.0 - t < -2 * w).map(|x| x.1).collect();
                }
            }
        }

        if m > 0 {
            let mut rng = match &sampling {
                Sampling::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
                Sampling::Columns(_) => None,
            };
            for r in 0..delta {
                let col = match (&sampling, rng.as_mut()) {
                    (Sampling::Columns(v), _) => v[r % v.len()],
                    (_, Some(rng)) => rng.random_range(0..m),
                    _ => unreachable!(),
                };
                if col >= m {
                    return Err(MpqError::IndexOutOfRange { what: "sampled column", index: col, limit: m });
                }
                this.sampled.push(col);
                let round = this.build_round(r, col)?;
                this.rounds.push(round);
            }
        }

        let mut cand: Vec<(i64, u32)> = Vec::with_capacity(c);
        for i in 0..n {
            for j in 0..m {
                let blk = j / delta;
                let Some(t) = this.threshold[i * blocks + blk] else { continue };
                let rep = this.representative(blk);
                cand.clear();
                for k in 0..c {
                    if this.covered[i * c + k] != UNCOVERED {
                        continue;
                    }
                    let Some(x) = this.a.get(i, k) else { continue };
                    if (x + this.b.fin(k, rep) - t).abs() <= 2 * w {
                        cand.push((x + this.b.fin(k, j), k as u32));
                    }
                }
                this.band_size += cand.len();
                if cand.len() > budget {
                    cand.select_nth_unstable(budget - 1);
                    cand.truncate(budget);
                }
                cand.sort_unstable();
                this.near[i * m + j] = cand.iter().map(|x| x.1).collect();
            }
        }
        Ok(this)
    }

    fn build_round(&mut self, r: usize, col: usize) -> Result<Option<BucketedMpq>, MpqError> {
        let (n, c) = (self.a.rows(), self.a.cols());
        let blk = col / self.delta;
        let mut shifted_a = Matrix::infinite(n, c);
        let mut any = false;
        for i in 0..n {
            let Some(t) = self.threshold[i * self.blocks + blk] else { continue };
            for k in 0..c {
                if self.covered[i * c + k] != UNCOVERED {
                    continue;
                }
                let Some(x) = self.a.get(i, k) else { continue };
                let shift = x + self.b.fin(k, col) - t;
                if shift.abs() <= 3 * self.w {
                    shifted_a.set(i, k, Some(shift));
                    self.covered[i * c + k] = r as u32;
                    any = true;
                }
            }
        }
        if !any {
            return Ok(None);
        }
        let shifted_b = Matrix::from_fn(c, self.b.cols(), |k, j| Some(self.b.fin(k, j) - self.b.fin(k, col)));
        BucketedMpq::build(shifted_a, shifted_b, (3 * self.w).max(1), self.bucket_size()).map(Some)
    }

    /// Last column of block `blk`.
    pub fn representative(&self, blk: usize) -> usize {
        ((blk + 1) * self.delta).min(self.b.cols()) - 1
    }

    /// The block approximation of `B[k][j]`.
    pub fn estimate(&self, k: usize, j: usize) -> i64 {
        self.b.fin(k, self.representative(j / self.delta))
    }

    /// `Ĉ` for row `i` and column `j`'s block; `None` with fewer than `L` finite sums.
    pub fn threshold(&self, i: usize, j: usize) -> Option<i64> {
        self.threshold[i * self.blocks + j / self.delta]
    }

    pub fn covering_round(&self, i: usize, k: usize) -> Option<usize> {
        let r = self.covered[i * self.a.cols() + k];
        (r != UNCOVERED).then_some(r as usize)
    }

    pub fn sampled_columns(&self) -> &[usize] {
        &self.sampled
    }

    pub fn bucket_size(&self) -> usize {
        self.l.div_ceil(self.delta).max(1)
    }

    pub fn budget(&self) -> usize {
        self.l
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn diagnostics(&self) -> BdDiagnostics {
        BdDiagnostics {
            delta: self.delta,
            w: self.w,
            budget: self.l,
            rounds: self.sampled.len(),
            bucket_size: self.bucket_size(),
            covered_pairs: self.covered.iter().filter(|&&r| r != UNCOVERED).count(),
            uncovered_triples: self.band_size,
            stored_triples: self.near.iter().map(Vec::len).sum(),
        }
    }

    pub fn query(&mut self, i: usize, j: usize, s: &IndexSet) -> Result<Option<Witnessed>, MpqError> {
        check_query(&self.a, &self.b, i, j, s)?;
        if s.len() >= self.l {
            return Err(MpqError::ForbiddenSetTooLarge { size: s.len(), limit: self.l });
        }
        Ok(self.query_unchecked(i, j, s))
    }

    pub(crate) fn query_unchecked(&mut self, i: usize, j: usize, s: &IndexSet) -> Option<Witnessed> {
        let c = self.a.cols();
        let mut best = None;

        let mut per_round: Vec<IndexSet> = vec![IndexSet::empty(); self.rounds.len()];
        let mut grouped: Vec<Vec<usize>> = vec![Vec::new(); self.rounds.len()];
        for k in s.iter() {
            let r = self.covered[i * c + k];
            if r != UNCOVERED {
                grouped[r as usize].push(k);
            }
        }
        for (r, ks) in grouped.into_iter().enumerate() {
            per_round[r] = ks.into_iter().collect();
        }
        for (r, round) in self.rounds.iter_mut().enumerate() {
            let col = self.sampled[r];
            let Some(inner) = round.as_mut() else { continue };
            if let Some(x) = inner.query_unchecked(i, j, &per_round[r]) {
                let t = self.threshold[i * self.blocks + col / self.delta].expect("covered rows have a threshold");
                keep_min(&mut best, Witnessed::new(x.value + t, x.witness));
            }
        }

        let blk = j / self.delta;
        for &k in &self.below[i * self.blocks + blk] {
            let k = k as usize;
            if !s.contains(k) {
                if let Some(v) = sum(self.a.get(i, k), self.b.get(k, j)) {
                    keep_min(&mut best, Witnessed::new(v, k));
                }
            }
        }

        if let Some(&k) = self.near[i * self.b.cols() + j].iter().find(|&&k| !s.contains(k as usize)) {
            let k = k as usize;
            keep_min(&mut best, Witnessed::new(self.a.fin(i, k) + self.b.fin(k, j), k));
        }
        best
    }

    pub fn checksum(&self, acc: &mut Checksum) {
        acc.word(self.delta as u64).signed(self.w).word(self.l as u64);
        for &t in &self.threshold {
            acc.opt(t);
        }
        for list in self.below.iter().chain(&self.near) {
            acc.word(list.len() as u64);
            for &k in list {
                acc.word(u64::from(k));
            }
        }
        for &r in &self.covered {
            acc.word(u64::from(r));
        }
        for &col in &self.sampled {
            acc.word(col as u64);
        }
        for round in &self.rounds {
            match round {
                Some(x) => x.checksum(acc.word(1)),
                None => {
                    acc.word(0);
                }
            }
        }
    }
}

/// Rejects `B` unless every row stays within `w` across each block of `delta` columns.
pub(crate) fn check_blocks(b: &Matrix, delta: usize, w: i64) -> Result<(), MpqError> {
    for k in 0..b.rows() {
        let mut start = 0;
        while start < b.cols() {
            let end = (start + delta).min(b.cols());
            let (mut jmin, mut jmax) = (start, start);
            for j in start..end {
                if b.fin(k, j) < b.fin(k, jmin) {
                    jmin = j;
                }
                if b.fin(k, j) > b.fin(k, jmax) {
                    jmax = j;
                }
            }
            let diff = b.fin(k, jmax) - b.fin(k, jmin);
            if diff > w {
                return Err(MpqError::BoundedDifference { k, j1: jmin.min(jmax), j2: jmin.max(jmax), diff, w });
            }
            start = end;
        }
    }
    Ok(())
}

/// Whether the `rank`-th smallest elements (1-based) of two sequences that differ
/// entrywise by at most `w` are themselves within `w`.
pub fn claim_holds(a: &[i64], b: &[i64], w: i64, rank: usize) -> Result<bool, MpqError> {
    if a.len() != b.len() {
        return Err(MpqError::InvalidParameter("sequences differ in length"));
    }
    if rank < 1 || rank > a.len() {
        return Err(MpqError::InvalidParameter("rank outside the sequence"));
    }
    if a.iter().zip(b).any(|(x, y)| (x - y).abs() > w) {
        return Err(MpqError::InvalidParameter("sequences differ by more than W"));
    }
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    let x = *a.select_nth_unstable(rank - 1).1;
    let y = *b.select_nth_unstable(rank - 1).1;
    Ok((x - y).abs() <= w)
}
