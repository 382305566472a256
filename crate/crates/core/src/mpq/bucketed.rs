//! Min-plus queries with witnesses when only `A` has small entries.
//!
//! Each column of `B` is sorted and cut into buckets of `P` consecutive ranks. A
//! bucket whose values span at most `2W` is *small*: shifting it by its minimum
//! turns it into a bounded matrix served by a [`SmallEntriesMpq`]. Among the
//! remaining *large* buckets, the first two that still hold a usable index dominate
//! every later one, so a query scans just those two.

use alloc::vec;
use alloc::vec::Vec;

use super::small::{Backend, SmallEntriesMpq};
use super::{check_bounded, check_dims, check_finite, check_query, keep_min, sum, MpqError, QueryStats, Witnessed};
use crate::collections::{CountForest, MinForest, MinKey};
use crate::{Checksum, IndexSet, Matrix};

#[derive(Clone, Debug)]
pub struct BucketedMpq {
    a: Matrix,
    b: Matrix,
    w: i64,
    p: usize,
    buckets: usize,
    /// Column `j` occupies `sorted[j*c..(j+1)*c]`: inner indices by `(B[k][j], k)`.
    sorted: Vec<u32>,
    /// `bucket_of[j*c + k]`.
    bucket_of: Vec<u32>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    shifted: Vec<Option<SmallEntriesMpq>>,
    /// Per `(i, j)`: best `(value, k)` of every small bucket.
    small_best: MinForest,
    /// Per `(i, j)`: number of finite `A[i][k]` in every large bucket.
    large_counts: CountForest,
    stats: QueryStats,
}

/// A broken link in the chain showing that the first large bucket beats the third.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketViolation {
    pub column: usize,
    pub row: usize,
    pub buckets: (usize, usize, usize),
    pub link: &'static str,
}

impl BucketedMpq {
    /// `A` must be bounded by `W`; `B` must be finite.
    pub fn build(a: Matrix, b: Matrix, w: i64, p: usize) -> Result<Self, MpqError> {
        check_dims(&a, &b)?;
        if w < 1 {
            return Err(MpqError::InvalidParameter("W must be at least 1"));
        }
        if p == 0 {
            return Err(MpqError::InvalidParameter("bucket size must be at least 1"));
        }
        check_bounded(&a, "A", w)?;
        check_finite(&b, "B")?;
        let (n, c, m) = (a.rows(), a.cols(), b.cols());
        let buckets = c.div_ceil(p);

        let mut sorted = Vec::with_capacity(c * m);
        let mut bucket_of = vec![0u32; c * m];
        let mut lo = vec![0; m * buckets];
        let mut hi = vec![0; m * buckets];
        for j in 0..m {
            let mut ks: Vec<u32> = (0..c as u32).collect();
            ks.sort_unstable_by_key(|&k| (b.fin(k as usize, j), k));
            for (rank, &k) in ks.iter().enumerate() {
                bucket_of[j * c + k as usize] = (rank / p) as u32;
            }
            for l in 0..buckets {
                let members = &ks[l * p..((l + 1) * p).min(c)];
                lo[j * buckets + l] = b.fin(members[0] as usize, j);
                hi[j * buckets + l] = b.fin(members[members.len() - 1] as usize, j);
            }
            sorted.extend_from_slice(&ks);
        }

        let mut this = Self {
            a,
            b,
            w,
            p,
            buckets,
            sorted,
            bucket_of,
            lo,
            hi,
            shifted: Vec::new(),
            small_best: MinForest::new(n * m, buckets),
            large_counts: CountForest::new(n * m, buckets),
            stats: QueryStats::default(),
        };

        for l in 0..buckets {
            let mut any = false;
            let shifted_b = Matrix::from_fn(c, m, |k, j| {
                let keep = this.bucket_of[j * c + k] as usize == l && this.is_small(j, l);
                any |= keep;
                keep.then(|| this.b.fin(k, j) - this.lo[j * buckets + l] - w)
            });
            this.shifted.push(if any {
                Some(SmallEntriesMpq::build(this.a.clone(), shifted_b, w, Backend::Direct)?)
            } else {
                None
            });
        }

        for i in 0..n {
            for j in 0..m {
                let tree = i * m + j;
                for l in 0..buckets {
                    if this.is_small(j, l) {
                        let best = this.scan(i, j, l, &IndexSet::empty());
                        this.small_best
                            .set_untracked(tree, l, best.map(|x| MinKey::new(x.value, x.witness)));
                    } else {
                        let finite = this
                            .members(j, l)
                            .iter()
                            .filter(|&&k| this.a.get(i, k as usize).is_some())
                            .count();
                        if finite > 0 {
                            this.large_counts.bump(tree, l, finite as i32).expect("bucket in domain");
                        }
                    }
                }
            }
        }
        Ok(this)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn w(&self) -> i64 {
        self.w
    }

    pub fn bucket_size(&self) -> usize {
        self.p
    }

    /// Buckets per column.
    pub fn buckets(&self) -> usize {
        self.buckets
    }

    /// Inner indices of bucket `l` of column `j`, in rank order.
    pub fn members(&self, j: usize, l: usize) -> &[u32] {
        let c = self.a.cols();
        &self.sorted[j * c + l * self.p..j * c + ((l + 1) * self.p).min(c)]
    }

    pub fn bucket_of(&self, k: usize, j: usize) -> usize {
        self.bucket_of[j * self.a.cols() + k] as usize
    }

    /// Smallest and largest `B` value in bucket `l` of column `j`.
    pub fn bounds(&self, j: usize, l: usize) -> (i64, i64) {
        (self.lo[j * self.buckets + l], self.hi[j * self.buckets + l])
    }

    pub fn is_small(&self, j: usize, l: usize) -> bool {
        let (lo, hi) = self.bounds(j, l);
        hi - lo <= 2 * self.w
    }

    pub fn shifted_structure(&self, l: usize) -> Option<&SmallEntriesMpq> {
        self.shifted[l].as_ref()
    }

    /// Finite-`A` count of a large bucket as stored for `(i, j)`.
    pub fn large_count(&self, i: usize, j: usize, l: usize) -> u32 {
        self.large_counts.count(i * self.b.cols() + j, l)
    }

    pub fn last_stats(&self) -> QueryStats {
        self.stats
    }

    fn scan(&self, i: usize, j: usize, l: usize, s: &IndexSet) -> Option<Witnessed> {
        let mut best = None;
        for &k in self.members(j, l) {
            let k = k as usize;
            if s.contains(k) {
                continue;
            }
            if let Some(v) = sum(self.a.get(i, k), self.b.get(k, j)) {
                keep_min(&mut best, Witnessed::new(v, k));
            }
        }
        best
    }

    pub fn query(&mut self, i: usize, j: usize, s: &IndexSet) -> Result<Option<Witnessed>, MpqError> {
        check_query(&self.a, &self.b, i, j, s)?;
        Ok(self.query_unchecked(i, j, s))
    }

    pub(crate) fn query_unchecked(&mut self, i: usize, j: usize, s: &IndexSet) -> Option<Witnessed> {
        let tree = i * self.b.cols() + j;
        let mut touched = s.len();

        let mut small_hits: Vec<(u32, u32)> = Vec::new();
        for k in s.iter() {
            let l = self.bucket_of(k, j);
            if self.is_small(j, l) {
                small_hits.push((l as u32, k as u32));
            } else if self.a.get(i, k).is_some() {
                self.large_counts.add(tree, l, -1).expect("forbidden index counted once");
            }
        }
        small_hits.sort_unstable();

        // Small buckets touched by S: ask the shifted structure, then hide the bucket's
        // precomputed best.
        let mut masked: Option<(i64, usize)> = None;
        let mut start = 0;
        while start < small_hits.len() {
            let l = small_hits[start].0 as usize;
            let end = start + small_hits[start..].iter().take_while(|x| x.0 as usize == l).count();
            let d = self.shifted[l].as_mut().expect("small bucket has a shifted structure");
            let ks = small_hits[start..end].iter().map(|x| x.1 as usize);
            if let Some(v) = d.query_unchecked(i, j, ks) {
                let value = v + self.lo[j * self.buckets + l] + self.w;
                if masked.is_none_or(|(mv, _)| value < mv) {
                    masked = Some((value, l));
                }
            }
            self.small_best.set(tree, l, None);
            start = end;
        }

        let mut best = self
            .small_best
            .min(tree)
            .map(|(key, _)| Witnessed::new(key.value, key.tag as usize));

        let (l1, l2) = self.large_counts.first_two_nonzero(tree);
        for l in [l1, l2].into_iter().flatten() {
            touched += self.members(j, l).len();
            if let Some(x) = self.scan(i, j, l, s) {
                keep_min(&mut best, x);
            }
        }

        if let Some((value, l)) = masked {
            if best.is_none_or(|b| value < b.value) {
                touched += self.members(j, l).len();
                best = self.scan(i, j, l, s);
                debug_assert_eq!(best.map(|x| x.value), Some(value));
            }
        }

        self.large_counts.rollback();
        self.small_best.rollback();
        self.stats = QueryStats { touched };
        best
    }

    /// Checks, from the stored bucket bounds, that in every column the best usable
    /// index of any large bucket beats every index two or more large buckets later.
    pub fn self_check(&self) -> Vec<BucketViolation> {
        let (n, m, w) = (self.a.rows(), self.b.cols(), self.w);
        let mut out = Vec::new();
        for j in 0..m {
            let large: Vec<usize> = (0..self.buckets).filter(|&l| !self.is_small(j, l)).collect();
            for i in 0..n {
                let extreme = |l: usize, max: bool| {
                    let sums = self
                        .members(j, l)
                        .iter()
                        .filter_map(|&k| sum(self.a.get(i, k as usize), self.b.get(k as usize, j)));
                    if max {
                        sums.max()
                    } else {
                        sums.min()
                    }
                };
                for (x, &l1) in large.iter().enumerate() {
                    let Some(worst1) = extreme(l1, true) else { continue };
                    for (y, &l2) in large.iter().enumerate().skip(x + 1) {
                        for &l3 in &large[y + 1..] {
                            let Some(best3) = extreme(l3, false) else { continue };
                            let (_, hi1) = self.bounds(j, l1);
                            let (lo2, hi2) = self.bounds(j, l2);
                            let (lo3, _) = self.bounds(j, l3);
                            let links = [
                                (worst1 <= w + hi1, "first bucket above its upper bound"),
                                (hi1 <= lo2, "first bucket overlaps the second"),
                                (w + lo2 < hi2 - w, "second bucket not large"),
                                (hi2 <= lo3, "second bucket overlaps the third"),
                                (lo3 - w <= best3, "third bucket below its lower bound"),
                            ];
                            for (ok, link) in links {
                                if !ok {
                                    out.push(BucketViolation { column: j, row: i, buckets: (l1, l2, l3), link });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn checksum(&self, acc: &mut Checksum) {
        acc.word(self.p as u64).signed(self.w);
        for &x in &self.lo {
            acc.signed(x);
        }
        for &x in &self.hi {
            acc.signed(x);
        }
        self.small_best.checksum(acc);
        self.large_counts.checksum(acc);
        for d in self.shifted.iter().flatten() {
            d.checksum(acc);
        }
    }
}
