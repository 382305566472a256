use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rangemode::bench::{bench, write_csv, BenchParams};
use rangemode::runner::{run_trace, Impl, Tuning};
use rangemode::trace::Trace;
use rangemode::verify::{parse_seed_range, verify_seeds, verify_trace};
use rangemode::workload::{generate_trace, OpMix, ValueDist, Workload};
use rangemode_core::balance::balance_exponents;
use rangemode_core::mpq::omega;

#[derive(Parser)]
#[command(name = "rangemode", version, about = "Dynamic range mode: replay, verify, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace file and print one `<value> <freq>` line per query.
    Run {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long = "impl", default_value = "mpq")]
        implementation: Impl,
        /// Write answers here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Check the engine against the recount oracle on generated or given traces.
    Verify {
        #[arg(long)]
        ops: Option<usize>,
        #[arg(long)]
        maxlen: Option<usize>,
        /// Seed range `S0..S1` (end exclusive) or a single seed.
        #[arg(long, default_value = "0..1")]
        seeds: String,
        #[command(flatten)]
        gen: GenArgs,
        /// Verify this trace file instead of generating traces.
        #[arg(long, conflicts_with_all = ["ops", "maxlen"])]
        trace: Option<PathBuf>,
        /// Save the trace of the first failing seed here.
        #[arg(long)]
        save: Option<PathBuf>,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Time every op and write one CSV row per (implementation, op type).
    Bench {
        #[arg(long)]
        ops: usize,
        #[arg(long)]
        maxlen: usize,
        /// `naive`, `mpq` or `all`.
        #[arg(long = "impl", default_value = "all")]
        implementation: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Write a generated trace file.
    Gen {
        #[arg(long)]
        ops: usize,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Print the per-operation and rebuild exponents for a given t2.
    Balance {
        #[arg(long)]
        t2: f64,
        /// `linear` (default bound), `table` or `naive`.
        #[arg(long, default_value = "linear")]
        omega: String,
    },
}

#[derive(Args)]
struct TuningArgs {
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long)]
    t3: Option<f64>,
    /// Spread rebuilds over the updates that precede them.
    #[arg(long)]
    deamortize: bool,
}

impl TuningArgs {
    fn tuning(&self) -> Result<Tuning, Failure> {
        for (name, t) in [("t1", self.t1), ("t2", self.t2), ("t3", self.t3)] {
            if let Some(t) = t {
                if !(0.0..=1.0).contains(&t) {
                    return Err(usage(format!("--{name} {t} must lie in [0, 1]")));
                }
            }
        }
        Ok(Tuning { t1: self.t1, t2: self.t2, t3: self.t3, deamortize: self.deamortize })
    }
}

#[derive(Args)]
struct GenArgs {
    /// `uniform[:V]` or `zipf:THETA[:V]`.
    #[arg(long, default_value = "uniform")]
    dist: ValueDist,
    /// Insert, delete and query proportions.
    #[arg(long, default_value = "0.45,0.2,0.35")]
    mix: OpMix,
}

enum Failure {
    Usage(String),
    Diverged(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_trace(path: &PathBuf) -> Result<Trace, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Trace::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(usage),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { trace, implementation, out, tuning } => {
            let trace = read_trace(&trace)?;
            let config = tuning.tuning()?.config(trace.capacity, trace.seed);
            let result = run_trace(&trace, implementation, &config).map_err(usage)?;
            write_out(&out, &result.answers_text())
        }
        Command::Verify { ops, maxlen, seeds, gen, trace, save, tuning } => {
            let tuning = tuning.tuning()?;
            if let Some(path) = trace {
                let trace = read_trace(&path)?;
                let config = tuning.config(trace.capacity, trace.seed);
                return match verify_trace(&trace, &config) {
                    Ok(q) => {
                        println!("pass: {} ops, {q} queries", trace.ops.len());
                        Ok(())
                    }
                    Err(d) => Err(Failure::Diverged(format!("{}: {d}", path.display()))),
                };
            }
            let (Some(ops), Some(maxlen)) = (ops, maxlen) else {
                return Err(usage("verify needs --ops and --maxlen, or --trace"));
            };
            let seeds = parse_seed_range(&seeds).map_err(usage)?;
            let template = Workload::new(ops, maxlen, 0).with_dist(gen.dist).with_mix(gen.mix);
            let report = verify_seeds(&template, seeds, &tuning).map_err(usage)?;
            match report.failure {
                None => {
                    println!("pass: {} traces, {} ops, {} queries", report.traces, report.ops, report.queries);
                    Ok(())
                }
                Some(f) => {
                    if let Some(p) = &save {
                        fs::write(p, f.trace.to_string()).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    }
                    Err(Failure::Diverged(f.to_string()))
                }
            }
        }
        Command::Bench { ops, maxlen, implementation, out, seed, repeats, warmup, gen, tuning } => {
            let impls = match implementation.as_str() {
                "all" => Impl::ALL.to_vec(),
                other => vec![other.parse::<Impl>().map_err(usage)?],
            };
            let params = BenchParams {
                workload: Workload::new(ops, maxlen, seed).with_dist(gen.dist).with_mix(gen.mix),
                impls,
                tuning: tuning.tuning()?,
                warmup,
                repeats,
            };
            let records = bench(&params).map_err(usage)?;
            let file = fs::File::create(&out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
            write_csv(&records, file).map_err(usage)
        }
        Command::Gen { ops, maxlen, seed, out, gen } => {
            let w = Workload::new(ops, maxlen, seed).with_dist(gen.dist).with_mix(gen.mix);
            let trace = generate_trace(&w).map_err(usage)?;
            write_out(&out, &trace.to_string())
        }
        Command::Balance { t2, omega: which } => {
            let f: fn(f64) -> f64 = match which.as_str() {
                "linear" => omega::linear_bound,
                "table" => omega::interpolated,
                "naive" => omega::naive,
                other => return Err(usage(format!("unknown omega `{other}` (expected linear, table or naive)"))),
            };
            let (per_op, rebuild) = balance_exponents(t2, f).map_err(usage)?;
            println!("{per_op:.6} {rebuild:.6}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
