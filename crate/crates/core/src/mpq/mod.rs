//! Min-plus query structures.
//!
//! Each structure preprocesses `A` (`n × c`) and `B` (`c × m`) and then answers
//! `min_{k ∉ S} A[i][k] + B[k][j]` for a forbidden set `S` given with the query.
//! The stack, bottom up:
//!
//! * [`SmallEntriesMpq`]: both matrices bounded by `W`; answers by counting sums.
//! * [`BucketedMpq`]: only `A` bounded; buckets each column of `B` by rank.
//! * [`BoundedDiffMpq`]: `B` varies by at most `W` inside column blocks.
//! * [`MonotoneMpq`]: `B` has non-increasing rows and bounded column-sum drops.
//!
//! Queries journal their temporary changes and roll them back before returning, so
//! they need `&mut self` but leave no observable trace.

mod bounded_diff;
mod bucketed;
mod monotone;
pub mod omega;
mod small;

pub use bounded_diff::{claim_holds, BdDiagnostics, BoundedDiffMpq, Sampling};
pub use bucketed::{BucketViolation, BucketedMpq};
pub use monotone::{block_width, check_monotone, MonoDiagnostics, MonotoneMpq};
pub use small::{Backend, SmallEntriesMpq};

use crate::{IndexSet, Matrix};

/// A query answer: the minimum value and an inner index attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witnessed {
    pub value: i64,
    pub witness: usize,
}

impl Witnessed {
    pub fn new(value: i64, witness: usize) -> Self {
        Self { value, witness }
    }
}

/// Keeps the smaller of `best` and `cand` (by value, then witness).
pub(crate) fn keep_min(best: &mut Option<Witnessed>, cand: Witnessed) {
    if best.is_none_or(|b| cand < b) {
        *best = Some(cand);
    }
}

/// Work done by the most recent query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Inner-index entries read or updated: forbidden-set updates plus bucket scans.
    pub touched: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MpqError {
    #[error("dimension mismatch: A is {a_rows}x{a_cols}, B is {b_rows}x{b_cols}")]
    DimensionMismatch { a_rows: usize, a_cols: usize, b_rows: usize, b_cols: usize },
    #[error("{which}[{row}][{col}] = {value} lies outside [-{bound}, {bound}]")]
    EntryOutOfRange { which: &'static str, row: usize, col: usize, value: i64, bound: i64 },
    #[error("{which}[{row}][{col}] must be finite")]
    InfiniteEntry { which: &'static str, row: usize, col: usize },
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange { what: &'static str, index: usize, limit: usize },
    #[error("B[{k}] differs by {diff} > {w} between columns {j1} and {j2} of one block")]
    BoundedDifference { k: usize, j1: usize, j2: usize, diff: i64, w: i64 },
    #[error("row {k} of B increases between columns {j} and {}", j + 1)]
    NotMonotone { k: usize, j: usize },
    #[error("column sum of B drops by {drop} > {bound} after column {j}")]
    DropBound { j: usize, drop: i64, bound: i64 },
    #[error("forbidden set of size {size} exceeds the budget (must be < {limit})")]
    ForbiddenSetTooLarge { size: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub(crate) fn check_dims(a: &Matrix, b: &Matrix) -> Result<(), MpqError> {
    if a.cols() != b.rows() {
        return Err(MpqError::DimensionMismatch {
            a_rows: a.rows(),
            a_cols: a.cols(),
            b_rows: b.rows(),
            b_cols: b.cols(),
        });
    }
    Ok(())
}

pub(crate) fn check_query(a: &Matrix, b: &Matrix, i: usize, j: usize, s: &IndexSet) -> Result<(), MpqError> {
    if i >= a.rows() {
        return Err(MpqError::IndexOutOfRange { what: "row", index: i, limit: a.rows() });
    }
    if j >= b.cols() {
        return Err(MpqError::IndexOutOfRange { what: "column", index: j, limit: b.cols() });
    }
    if let Some(k) = s.max().filter(|&k| k >= a.cols()) {
        return Err(MpqError::IndexOutOfRange { what: "inner", index: k, limit: a.cols() });
    }
    Ok(())
}

pub(crate) fn check_bounded(m: &Matrix, which: &'static str, bound: i64) -> Result<(), MpqError> {
    for (row, col, v) in m.entries() {
        if let Some(value) = v {
            if value.abs() > bound {
                return Err(MpqError::EntryOutOfRange { which, row, col, value, bound });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_finite(m: &Matrix, which: &'static str) -> Result<(), MpqError> {
    match m.first_infinite() {
        Some((row, col)) => Err(MpqError::InfiniteEntry { which, row, col }),
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn sum(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}
