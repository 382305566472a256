//! Reference oracles, trace files, workload generation, differential verification
//! and benchmarks for the `rangemode-core` engine. The `rangemode` binary exposes
//! them on the command line.

pub mod bench;
pub mod oracle;
pub mod runner;
pub mod trace;
pub mod verify;
pub mod workload;

pub use oracle::{oracle_minplus, oracle_query};
pub use runner::{run_trace, Impl, Tuning};
pub use trace::{Op, OpKind, Trace};
pub use workload::{generate_trace, OpMix, ValueDist, Workload};
