//! Trace replay against either implementation.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rangemode_core::dynamic::DEFAULT_T2;
use rangemode_core::{DynamicMode, ModeConfig, ModeError};

use crate::oracle::oracle_query;
use crate::trace::{Op, OpKind, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Impl {
    Naive,
    Mpq,
}

impl Impl {
    pub const ALL: [Impl; 2] = [Impl::Naive, Impl::Mpq];

    pub fn name(self) -> &'static str {
        match self {
            Impl::Naive => "naive",
            Impl::Mpq => "mpq",
        }
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown implementation `{0}` (expected naive or mpq)")]
pub struct UnknownImpl(pub String);

impl FromStr for Impl {
    type Err = UnknownImpl;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Impl::Naive),
            "mpq" => Ok(Impl::Mpq),
            _ => Err(UnknownImpl(s.to_string())),
        }
    }
}

/// Exponent overrides. A missing `t2` is the default; a missing `t1` is `1 - t2/2`
/// and a missing `t3` is `t2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tuning {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t3: Option<f64>,
    pub deamortize: bool,
}

impl Tuning {
    pub fn config(&self, capacity: usize, seed: u64) -> ModeConfig {
        let t2 = self.t2.unwrap_or(DEFAULT_T2);
        let t1 = self.t1.unwrap_or(1.0 - t2 / 2.0);
        let t3 = self.t3.unwrap_or(t2);
        ModeConfig::new(capacity).exponents(t1, t2, t3).deamortized(self.deamortize).seeded(seed)
    }
}

/// Common face of the two implementations. Positions are 1-based.
pub trait Engine {
    fn insert(&mut self, pos: usize, value: u32) -> Result<(), ModeError>;
    fn delete(&mut self, pos: usize) -> Result<u32, ModeError>;
    fn query(&mut self, l: usize, r: usize) -> Result<(u32, usize), ModeError>;
}

/// A plain vector with a full recount per query.
#[derive(Clone, Debug, Default)]
pub struct Naive {
    pub seq: Vec<u32>,
    capacity: usize,
}

impl Naive {
    pub fn new(capacity: usize) -> Self {
        Self { seq: Vec::new(), capacity }
    }
}

impl Engine for Naive {
    fn insert(&mut self, pos: usize, value: u32) -> Result<(), ModeError> {
        if self.seq.len() >= self.capacity {
            return Err(ModeError::CapacityExceeded { capacity: self.capacity });
        }
        if pos == 0 || pos > self.seq.len() + 1 {
            return Err(ModeError::PositionOutOfRange { pos, max: self.seq.len() + 1 });
        }
        self.seq.insert(pos - 1, value);
        Ok(())
    }

    fn delete(&mut self, pos: usize) -> Result<u32, ModeError> {
        if pos == 0 || pos > self.seq.len() {
            return Err(ModeError::PositionOutOfRange { pos, max: self.seq.len() });
        }
        Ok(self.seq.remove(pos - 1))
    }

    fn query(&mut self, l: usize, r: usize) -> Result<(u32, usize), ModeError> {
        if self.seq.is_empty() {
            return Err(ModeError::EmptySequence);
        }
        oracle_query(&self.seq, l, r).map_err(|e| ModeError::RangeOutOfBounds { l: e.l, r: e.r, len: e.len })
    }
}

impl Engine for DynamicMode {
    fn insert(&mut self, pos: usize, value: u32) -> Result<(), ModeError> {
        DynamicMode::insert(self, pos, value)
    }

    fn delete(&mut self, pos: usize) -> Result<u32, ModeError> {
        DynamicMode::delete(self, pos)
    }

    fn query(&mut self, l: usize, r: usize) -> Result<(u32, usize), ModeError> {
        DynamicMode::query(self, l, r)
    }
}

/// Applies one op; queries return their answer.
pub fn apply(engine: &mut impl Engine, op: Op) -> Result<Option<(u32, usize)>, ModeError> {
    match op {
        Op::Insert { pos, value } => engine.insert(pos, value).map(|_| None),
        Op::Delete { pos } => engine.delete(pos).map(|_| None),
        Op::Query { l, r } => engine.query(l, r).map(Some),
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    /// One `(value, frequency)` per query, in order.
    pub answers: Vec<(u32, usize)>,
    /// Nanoseconds per op, grouped by op kind in [`OpKind::ALL`] order.
    pub latencies: [Vec<u64>; 3],
    pub total: Duration,
}

impl RunOutput {
    pub fn latencies_of(&self, kind: OpKind) -> &[u64] {
        &self.latencies[kind as usize]
    }

    /// The answers file: `<value> <freq>` per line.
    pub fn answers_text(&self) -> String {
        self.answers.iter().map(|(v, f)| format!("{v} {f}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("op {index} (`{op}`) failed: {source}")]
pub struct RunError {
    pub index: usize,
    pub op: Op,
    pub source: ModeError,
}

pub fn engine_for(which: Impl, config: &ModeConfig) -> Result<Box<dyn DynEngine>, ModeError> {
    Ok(match which {
        Impl::Naive => Box::new(Naive::new(config.capacity)),
        Impl::Mpq => Box::new(DynamicMode::new(config.clone())?),
    })
}

/// Object-safe wrapper so the runner can hold either engine.
pub trait DynEngine {
    fn apply(&mut self, op: Op) -> Result<Option<(u32, usize)>, ModeError>;
}

impl<E: Engine> DynEngine for E {
    fn apply(&mut self, op: Op) -> Result<Option<(u32, usize)>, ModeError> {
        apply(self, op)
    }
}

/// Replays `trace`, timing every op.
pub fn run_trace(trace: &Trace, which: Impl, config: &ModeConfig) -> Result<RunOutput, RunError> {
    let mut engine = engine_for(which, config).map_err(|source| RunError {
        index: 0,
        op: trace.ops.first().copied().unwrap_or(Op::Query { l: 0, r: 0 }),
        source,
    })?;
    let mut out = RunOutput::default();
    let start = Instant::now();
    for (index, &op) in trace.ops.iter().enumerate() {
        let t = Instant::now();
        let ans = engine.apply(op).map_err(|source| RunError { index, op, source })?;
        out.latencies[op.kind() as usize].push(t.elapsed().as_nanos() as u64);
        out.answers.extend(ans);
    }
    out.total = start.elapsed();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuning_defaults() {
        let c = Tuning::default().config(100, 3);
        assert_eq!(c, ModeConfig::new(100).seeded(3));
        let c = Tuning { t2: Some(0.5), ..Tuning::default() }.config(100, 0);
        assert_eq!((c.t1, c.t2, c.t3), (0.75, 0.5, 0.5));
        let c = Tuning { t3: Some(0.0), deamortize: true, ..Tuning::default() }.config(100, 0);
        assert_eq!(c.t3, 0.0);
        assert!(c.deamortize);
    }

    #[test]
    fn both_engines_answer_the_worked_trace() {
        let t = Trace::parse("# N=6 seed=0\nI 1 1\nI 2 2\nI 3 1\nI 4 3\nI 5 1\nI 6 2\nQ 1 6\nD 1\nQ 1 5\n").unwrap();
        let config = Tuning::default().config(t.capacity, t.seed);
        for which in Impl::ALL {
            let out = run_trace(&t, which, &config).unwrap();
            assert_eq!(out.answers_text(), "1 3\n1 2\n", "{which}");
            assert_eq!(out.latencies_of(OpKind::Insert).len(), 6);
            assert_eq!(out.latencies_of(OpKind::Delete).len(), 1);
            assert_eq!(out.latencies_of(OpKind::Query).len(), 2);
        }
    }

    #[test]
    fn naive_errors() {
        let mut n = Naive::new(1);
        assert!(n.query(1, 1).is_err());
        assert!(n.insert(2, 0).is_err());
        n.insert(1, 0).unwrap();
        assert!(n.insert(1, 0).is_err());
        assert!(n.delete(2).is_err());
        assert_eq!(n.delete(1), Ok(0));
        assert_eq!("mpq".parse::<Impl>(), Ok(Impl::Mpq));
        assert!("fast".parse::<Impl>().is_err());
    }
}
