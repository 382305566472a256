//! Per-op latency measurements written as CSV.

use std::io;

use crate::runner::{run_trace, Impl, RunError, Tuning};
use crate::trace::OpKind;
use crate::workload::{generate_trace, Workload, WorkloadError};

pub const CSV_HEADER: [&str; 12] =
    ["n_ops", "N", "t1", "t2", "t3", "impl", "op_type", "count", "mean_ns", "p50_ns", "p95_ns", "total_ms"];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub n_ops: usize,
    pub capacity: usize,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub seed: u64,
    pub implementation: Impl,
    pub op_type: OpKind,
    /// Ops of this type in one replay of the trace.
    pub count: usize,
    pub mean_ns: f64,
    pub p50_ns: u64,
    pub p95_ns: u64,
    /// Mean wall time of a whole replay.
    pub total_ms: f64,
}

impl BenchRecord {
    pub fn fields(&self) -> [String; 12] {
        [
            self.n_ops.to_string(),
            self.capacity.to_string(),
            self.t1.to_string(),
            self.t2.to_string(),
            self.t3.to_string(),
            self.implementation.to_string(),
            self.op_type.name().to_string(),
            self.count.to_string(),
            format!("{:.1}", self.mean_ns),
            self.p50_ns.to_string(),
            self.p95_ns.to_string(),
            format!("{:.3}", self.total_ms),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct BenchParams {
    pub workload: Workload,
    pub impls: Vec<Impl>,
    pub tuning: Tuning,
    /// Untimed replays before measuring.
    pub warmup: usize,
    pub repeats: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("repeats must be positive")]
    NoRepeats,
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// One record per (implementation, op type), in the order given.
pub fn bench(params: &BenchParams) -> Result<Vec<BenchRecord>, BenchError> {
    if params.repeats == 0 {
        return Err(BenchError::NoRepeats);
    }
    let trace = generate_trace(&params.workload)?;
    let config = params.tuning.config(trace.capacity, trace.seed);
    let mut records = Vec::new();
    for &which in &params.impls {
        for _ in 0..params.warmup {
            run_trace(&trace, which, &config)?;
        }
        let mut lat: [Vec<u64>; 3] = Default::default();
        let mut total_ms = 0.0;
        for _ in 0..params.repeats {
            let out = run_trace(&trace, which, &config)?;
            for kind in OpKind::ALL {
                lat[kind as usize].extend_from_slice(out.latencies_of(kind));
            }
            total_ms += out.total.as_secs_f64() * 1e3;
        }
        for kind in OpKind::ALL {
            let xs = &mut lat[kind as usize];
            xs.sort_unstable();
            let mean_ns = if xs.is_empty() { 0.0 } else { xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64 };
            records.push(BenchRecord {
                n_ops: trace.ops.len(),
                capacity: trace.capacity,
                t1: config.t1,
                t2: config.t2,
                t3: config.t3,
                seed: trace.seed,
                implementation: which,
                op_type: kind,
                count: xs.len() / params.repeats,
                mean_ns,
                p50_ns: percentile(xs, 0.5),
                p95_ns: percentile(xs, 0.95),
                total_ms: total_ms / params.repeats as f64,
            });
        }
    }
    Ok(records)
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
