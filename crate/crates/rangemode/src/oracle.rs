//! Brute-force reference answers.

use std::collections::HashMap;

use rangemode_core::mpq::Witnessed;
use rangemode_core::{IndexSet, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("range [{l}, {r}] invalid for length {len}")]
pub struct RangeError {
    pub l: usize,
    pub r: usize,
    pub len: usize,
}

/// Mode of `seq[l..=r]` (1-based) by full recount, smallest value on ties.
pub fn oracle_query(seq: &[u32], l: usize, r: usize) -> Result<(u32, usize), RangeError> {
    if l == 0 || l > r || r > seq.len() {
        return Err(RangeError { l, r, len: seq.len() });
    }
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &v in &seq[l - 1..r] {
        *counts.entry(v).or_default() += 1;
    }
    let best = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty range");
    Ok(best)
}

/// Occurrences of `v` in `seq[l..=r]` (1-based).
pub fn recount(seq: &[u32], l: usize, r: usize, v: u32) -> usize {
    seq[l - 1..r].iter().filter(|&&x| x == v).count()
}

/// `min_{k ∉ S} A[i][k] + B[k][j]` by direct scan, smallest `k` on ties.
pub fn oracle_minplus(a: &Matrix, b: &Matrix, i: usize, j: usize, s: &IndexSet) -> Option<Witnessed> {
    let mut best: Option<Witnessed> = None;
    for k in 0..a.cols() {
        if s.contains(k) {
            continue;
        }
        if let (Some(x), Some(y)) = (a.get(i, k), b.get(k, j)) {
            if best.is_none_or(|w| x + y < w.value) {
                best = Some(Witnessed::new(x + y, k));
            }
        }
    }
    best
}

/// Whether `got` is an acceptable answer: same value as the scan and, when present,
/// a witness outside `S` whose sum reproduces that value.
pub fn minplus_answer_ok(a: &Matrix, b: &Matrix, i: usize, j: usize, s: &IndexSet, got: Option<Witnessed>) -> bool {
    let want = oracle_minplus(a, b, i, j, s);
    match (want, got) {
        (None, None) => true,
        (Some(w), Some(g)) => {
            g.value == w.value
                && g.witness < a.cols()
                && !s.contains(g.witness)
                && matches!((a.get(i, g.witness), b.get(g.witness, j)), (Some(x), Some(y)) if x + y == g.value)
        }
        _ => false,
    }
}
