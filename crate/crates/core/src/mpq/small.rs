//! Min-plus queries when every finite entry of both matrices lies in `[-W, W]`.
//!
//! For each `(i, j)` the structure keeps the histogram `r[t] = |{k : A[i][k] + B[k][j]
//! = t - 2W}|`, `t ∈ [0, 4W]`. A query decrements the slots of forbidden indices,
//! reads the earliest nonzero slot, and rolls the decrements back.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{check_bounded, check_dims, check_query, sum, MpqError, QueryStats};
use crate::collections::CountForest;
use crate::{Checksum, IndexSet, Matrix};

/// How the sum histograms are computed at build time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Triple loop over `(i, j, k)`.
    #[default]
    Direct,
    /// Product of `A'[i][k] = (c+1)^(A[i][k]+W)` and `B'[k][j] = (c+1)^(B[k][j]+W)`
    /// over big integers, decoded digit by digit in base `c + 1`.
    BigInt,
}

#[derive(Clone, Debug)]
pub struct SmallEntriesMpq {
    a: Matrix,
    b: Matrix,
    w: i64,
    counts: CountForest,
    stats: QueryStats,
}

impl SmallEntriesMpq {
    pub fn build(a: Matrix, b: Matrix, w: i64, backend: Backend) -> Result<Self, MpqError> {
        check_dims(&a, &b)?;
        if w < 1 {
            return Err(MpqError::InvalidParameter("W must be at least 1"));
        }
        check_bounded(&a, "A", w)?;
        check_bounded(&b, "B", w)?;
        let slots = (4 * w + 1) as usize;
        let mut counts = CountForest::new(a.rows() * b.cols(), slots);
        match backend {
            Backend::Direct => fill_direct(&a, &b, w, &mut counts),
            Backend::BigInt => fill_bigint(&a, &b, w, &mut counts),
        }
        Ok(Self { a, b, w, counts, stats: QueryStats::default() })
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

    fn tree(&self, i: usize, j: usize) -> usize {
        i * self.b.cols() + j
    }

    /// `min_{k ∉ S} A[i][k] + B[k][j]`, or `None` when no finite sum remains.
    pub fn query(&mut self, i: usize, j: usize, s: &IndexSet) -> Result<Option<i64>, MpqError> {
        check_query(&self.a, &self.b, i, j, s)?;
        Ok(self.query_unchecked(i, j, s.iter()))
    }

    pub(crate) fn query_unchecked(&mut self, i: usize, j: usize, s: impl Iterator<Item = usize>) -> Option<i64> {
        let tree = self.tree(i, j);
        let mut touched = 0;
        for k in s {
            touched += 1;
            if let Some(v) = sum(self.a.get(i, k), self.b.get(k, j)) {
                self.counts
                    .add(tree, (v + 2 * self.w) as usize, -1)
                    .expect("each forbidden sum is counted once");
            }
        }
        let best = self.counts.first_nonzero(tree).map(|t| t as i64 - 2 * self.w);
        self.counts.rollback();
        self.stats = QueryStats { touched };
        best
    }

    /// Number of `k` with `A[i][k] + B[k][j] = value`.
    pub fn count_at(&self, i: usize, j: usize, value: i64) -> Result<u32, MpqError> {
        check_query(&self.a, &self.b, i, j, &IndexSet::empty())?;
        if value.abs() > 2 * self.w {
            return Err(MpqError::InvalidParameter("value outside [-2W, 2W]"));
        }
        Ok(self.counts.count(self.tree(i, j), (value + 2 * self.w) as usize))
    }

    /// The full histogram for `(i, j)`, slot `t` holding sums equal to `t - 2W`.
    pub fn count_table(&self, i: usize, j: usize) -> &[u32] {
        self.counts.counts(self.tree(i, j))
    }

    pub fn last_stats(&self) -> QueryStats {
        self.stats
    }

    pub fn checksum(&self, sum: &mut Checksum) {
        sum.signed(self.w);
        self.counts.checksum(sum);
    }
}

fn fill_direct(a: &Matrix, b: &Matrix, w: i64, counts: &mut CountForest) {
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let Some(x) = a.get(i, k) else { continue };
            for j in 0..b.cols() {
                if let Some(y) = b.get(k, j) {
                    counts
                        .bump(i * b.cols() + j, (x + y + 2 * w) as usize, 1)
                        .expect("sum within [-2W, 2W]");
                }
            }
        }
    }
}

fn fill_bigint(a: &Matrix, b: &Matrix, w: i64, counts: &mut CountForest) {
    let base = BigUint::from(a.cols() as u64 + 1);
    let top = (4 * w) as usize;
    let mut powers = Vec::with_capacity(top + 1);
    powers.push(BigUint::one());
    for t in 1..=top {
        let next = &powers[t - 1] * &base;
        powers.push(next);
    }
    let encode = |v: Option<i64>| match v {
        Some(x) => powers[(x + w) as usize].clone(),
        None => BigUint::zero(),
    };
    let a_enc: Vec<BigUint> = (0..a.rows() * a.cols()).map(|x| encode(a.get(x / a.cols(), x % a.cols()))).collect();
    let b_enc: Vec<BigUint> = (0..b.rows() * b.cols()).map(|x| encode(b.get(x / b.cols(), x % b.cols()))).collect();
    let mut digits = vec![0u32; top + 1];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = BigUint::zero();
            for k in 0..a.cols() {
                let (x, y) = (&a_enc[i * a.cols() + k], &b_enc[k * b.cols() + j]);
                if !x.is_zero() && !y.is_zero() {
                    acc += x * y;
                }
            }
            // most significant digit first
            for t in (0..=top).rev() {
                let (q, r) = acc.div_rem(&powers[t]);
                digits[t] = q.to_u32().expect("digit below base");
                acc = r;
            }
            for (t, &d) in digits.iter().enumerate() {
                if d > 0 {
                    counts.bump(i * b.cols() + j, t, d as i32).expect("slot in domain");
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpq::testutil::*;
    use rand::SeedableRng;

    fn example() -> (Matrix, Matrix) {
        let a = Matrix::from_rows(&[vec![Some(0), Some(2), None], vec![Some(1), Some(-1), Some(0)]]);
        let b = Matrix::from_finite(&[vec![1, 2], vec![0, -2], vec![3, 1]]);
        (a, b)
    }

    #[test]
    fn worked_example() {
        let (a, b) = example();
        let mut d = SmallEntriesMpq::build(a, b, 3, Backend::Direct).unwrap();
        // sums at (0,0): k0 → 1, k1 → 2, k2 → ∞
        let table = d.count_table(0, 0).to_vec();
        let nonzero: Vec<(i64, u32)> = table
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, &c)| (t as i64 - 6, c))
            .collect();
        assert_eq!(nonzero, [(1, 1), (2, 1)]);
        assert_eq!(d.query(0, 0, &IndexSet::empty()), Ok(Some(1)));
        assert_eq!(d.query(0, 0, &IndexSet::from([0])), Ok(Some(2)));
        assert_eq!(d.query(0, 0, &IndexSet::from([0, 1, 2])), Ok(None));
        assert_eq!(d.count_at(0, 0, 1), Ok(1));
    }

    #[test]
    fn all_infinite_a() {
        let a = Matrix::infinite(2, 3);
        let b = Matrix::from_finite(&[vec![1, 2], vec![0, -2], vec![3, 1]]);
        let d = SmallEntriesMpq::build(a, b, 3, Backend::BigInt).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(d.count_table(i, j).iter().all(|&c| c == 0));
                assert_eq!(d.count_at(i, j, 0), Ok(0));
            }
        }
    }

    #[test]
    fn build_errors() {
        let (a, b) = example();
        assert!(matches!(
            SmallEntriesMpq::build(a.clone(), b.clone(), 2, Backend::Direct),
            Err(MpqError::EntryOutOfRange { which: "B", row: 2, col: 0, value: 3, bound: 2 })
        ));
        assert!(matches!(
            SmallEntriesMpq::build(b.clone(), b, 3, Backend::Direct),
            Err(MpqError::DimensionMismatch { .. })
        ));
        let mut d = SmallEntriesMpq::build(a.clone(), example().1, 3, Backend::Direct).unwrap();
        assert!(d.query(2, 0, &IndexSet::empty()).is_err());
        assert!(d.query(0, 0, &IndexSet::from([3])).is_err());
        assert!(d.count_at(0, 0, 13).is_err());
    }

    #[test]
    fn backends_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let w = 3;
            let a = random_matrix(&mut rng, 8, 16, -w, w, 0.2);
            let b = random_matrix(&mut rng, 16, 8, -w, w, 0.2);
            let d1 = SmallEntriesMpq::build(a.clone(), b.clone(), w, Backend::Direct).unwrap();
            let d2 = SmallEntriesMpq::build(a, b, w, Backend::BigInt).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(d1.count_table(i, j), d2.count_table(i, j));
                }
            }
        }
    }

    #[test]
    fn histogram_sums_to_finite_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let w = 4;
        let a = random_matrix(&mut rng, 6, 10, -w, w, 0.3);
        let b = random_matrix(&mut rng, 10, 5, -w, w, 0.3);
        let d = SmallEntriesMpq::build(a.clone(), b.clone(), w, Backend::Direct).unwrap();
        for i in 0..6 {
            for j in 0..5 {
                let finite = (0..10).filter(|&k| sum(a.get(i, k), b.get(k, j)).is_some()).count();
                let total: u32 = (-2 * w..=2 * w).map(|v| d.count_at(i, j, v).unwrap()).sum();
                assert_eq!(total as usize, finite);
            }
        }
    }

    #[test]
    fn exhaustive_small_instances_are_pure() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let w = 2;
        let (n, c) = (3, 8);
        let a = random_matrix(&mut rng, n, c, -w, w, 0.25);
        let b = random_matrix(&mut rng, c, n, -w, w, 0.25);
        let mut d = SmallEntriesMpq::build(a.clone(), b.clone(), w, Backend::Direct).unwrap();
        let mut before = Checksum::new();
        d.checksum(&mut before);
        for s in all_sets(c) {
            for i in 0..n {
                for j in 0..n {
                    let got = d.query(i, j, &s).unwrap();
                    assert_eq!(got, brute(&a, &b, i, j, &s).map(|x| x.value));
                }
            }
        }
        let mut after = Checksum::new();
        d.checksum(&mut after);
        assert_eq!(before.finish(), after.finish());
    }

    #[test]
    fn random_queries_up_to_16x32() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let w = 3;
        let a = random_matrix(&mut rng, 16, 32, -w, w, 0.2);
        let b = random_matrix(&mut rng, 32, 16, -w, w, 0.2);
        let mut d = SmallEntriesMpq::build(a.clone(), b.clone(), w, Backend::Direct).unwrap();
        for _ in 0..2000 {
            let s = random_set(&mut rng, 32, 32);
            let (i, j) = (rand::Rng::random_range(&mut rng, 0..16), rand::Rng::random_range(&mut rng, 0..16));
            assert_eq!(d.query(i, j, &s).unwrap(), brute(&a, &b, i, j, &s).map(|x| x.value));
        }
    }
}
