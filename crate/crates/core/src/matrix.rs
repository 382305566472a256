//! Integer matrices with a distinguished infinity, and forbidden index sets.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::Checksum;

/// Row-major integer matrix. `None` entries are +∞: they never take part in a sum.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Option<i64>>,
}

impl Matrix {
    /// All-∞ matrix.
    pub fn infinite(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![None; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Option<i64>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Option<i64>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_finite(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&x| Some(x)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<i64> {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<i64>) {
        self.data[i * self.cols + j] = v;
    }

    /// Entry that must be finite.
    #[inline]
    pub(crate) fn fin(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j].expect("finite entry")
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Option<i64>)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(x, &v)| (x / self.cols.max(1), x % self.cols.max(1), v))
    }

    /// Largest absolute value of a finite entry (0 when there is none).
    pub fn max_abs(&self) -> i64 {
        self.data.iter().flatten().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// First ∞ entry, if any.
    pub fn first_infinite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(Option::is_none)
            .map(|x| (x / self.cols, x % self.cols))
    }

    pub fn checksum(&self, sum: &mut Checksum) {
        sum.word(self.rows as u64).word(self.cols as u64);
        for &v in &self.data {
            sum.opt(v);
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                match self.get(i, j) {
                    Some(v) => write!(f, " {v:>4}")?,
                    None => write!(f, "  inf")?,
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Sorted, duplicate-free set of inner indices excluded from a query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(a: [usize; N]) -> Self {
        a.into_iter().collect()
    }
}
