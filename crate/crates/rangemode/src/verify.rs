//! Differential checking of the engine against the recount oracle.
//!
//! Frequencies must match exactly. Returned values may differ from the oracle's
//! when several values tie, so each is checked by recounting it in the range.

use std::fmt;
use std::ops::Range;

use rangemode_core::{DynamicMode, ModeConfig, ModeError};

use crate::oracle::{oracle_query, recount};
use crate::runner::{apply, Naive, Tuning};
use crate::trace::{Op, Trace};
use crate::workload::{generate_trace, Workload, WorkloadError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Frequency { expected: (u32, usize), got: (u32, usize) },
    /// The reported value occurs `actual` times, not the claimed frequency.
    Value { value: u32, claimed: usize, actual: usize },
    Engine(ModeError),
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Frequency { expected, got } => write!(
                f,
                "frequency {} (value {}) but the oracle says {} (value {})",
                got.1, got.0, expected.1, expected.0
            ),
            Mismatch::Value { value, claimed, actual } => {
                write!(f, "value {value} reported with frequency {claimed} occurs {actual} times")
            }
            Mismatch::Engine(e) => write!(f, "engine error: {e}"),
        }
    }
}

/// First point where the engine and the oracle disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    /// 0-based op index; the op sits on line `index + 2` of the trace file.
    pub index: usize,
    pub op: Op,
    pub mismatch: Mismatch,
    /// Up to five ops before the failing one.
    pub recent: Vec<Op>,
    /// The sequence just before the failing op.
    pub sequence: Vec<u32>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "op {} (trace line {}): `{}`: {}", self.index, self.index + 2, self.op, self.mismatch)?;
        let recent: Vec<String> = self.recent.iter().map(Op::to_string).collect();
        writeln!(f, "  preceding ops: {}", recent.join(" | "))?;
        write!(f, "  sequence (length {}): ", self.sequence.len())?;
        if self.sequence.len() <= 64 {
            write!(f, "{:?}", self.sequence)
        } else {
            write!(f, "{:?} ...", &self.sequence[..64])
        }
    }
}

/// Replays `trace` on the engine and the naive oracle side by side.
pub fn verify_trace(trace: &Trace, config: &ModeConfig) -> Result<usize, Divergence> {
    let mut naive = Naive::new(trace.capacity);
    let mut engine = DynamicMode::new(config.clone()).map_err(|e| Divergence {
        index: 0,
        op: trace.ops.first().copied().unwrap_or(Op::Query { l: 0, r: 0 }),
        mismatch: Mismatch::Engine(e),
        recent: Vec::new(),
        sequence: Vec::new(),
    })?;
    let mut queries = 0;
    for (index, &op) in trace.ops.iter().enumerate() {
        let fail = |mismatch: Mismatch, seq: &[u32]| Divergence {
            index,
            op,
            mismatch,
            recent: trace.ops[index.saturating_sub(5)..index].to_vec(),
            sequence: seq.to_vec(),
        };
        let got = match apply(&mut engine, op) {
            Ok(got) => got,
            Err(e) => return Err(fail(Mismatch::Engine(e), &naive.seq)),
        };
        if let (Op::Query { l, r }, Some(got)) = (op, got) {
            queries += 1;
            let expected = oracle_query(&naive.seq, l, r).expect("trace is valid");
            if got.1 != expected.1 {
                return Err(fail(Mismatch::Frequency { expected, got }, &naive.seq));
            }
            let actual = recount(&naive.seq, l, r, got.0);
            if actual != got.1 {
                return Err(fail(Mismatch::Value { value: got.0, claimed: got.1, actual }, &naive.seq));
            }
        }
        apply(&mut naive, op).expect("trace is valid");
    }
    Ok(queries)
}

/// A failed seed with everything needed to replay it.
#[derive(Clone, Debug)]
pub struct Failure {
    pub workload: Workload,
    pub config: ModeConfig,
    pub trace: Trace,
    pub divergence: Divergence,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.workload;
        let c = &self.config;
        writeln!(
            f,
            "divergence at seed {}: ops={} N={} dist={} mix={},{},{}",
            w.seed, w.ops, w.capacity, w.dist, w.mix.insert, w.mix.delete, w.mix.query
        )?;
        writeln!(f, "  config: t1={} t2={} t3={} deamortize={}", c.t1, c.t2, c.t3, c.deamortize)?;
        write!(f, "  {}", self.divergence)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub traces: usize,
    pub ops: usize,
    pub queries: usize,
    pub failure: Option<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Generates one trace per seed and verifies each, stopping at the first divergence.
pub fn verify_seeds(template: &Workload, seeds: Range<u64>, tuning: &Tuning) -> Result<VerifyReport, WorkloadError> {
    let mut report = VerifyReport::default();
    for seed in seeds {
        let workload = Workload { seed, ..*template };
        let trace = generate_trace(&workload)?;
        let config = tuning.config(trace.capacity, seed);
        report.traces += 1;
        report.ops += trace.ops.len();
        match verify_trace(&trace, &config) {
            Ok(q) => report.queries += q,
            Err(divergence) => {
                report.failure = Some(Failure { workload, config, trace, divergence });
                break;
            }
        }
    }
    Ok(report)
}

/// Parses `S0..S1` (end exclusive) or a single seed.
pub fn parse_seed_range(s: &str) -> Result<Range<u64>, String> {
    let bad = || format!("bad seed range `{s}` (expected S0..S1)");
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a < b {
                Ok(a..b)
            } else {
                Err(bad())
            }
        }
        None => {
            let a: u64 = s.parse().map_err(|_| bad())?;
            Ok(a..a + 1)
        }
    }
}
