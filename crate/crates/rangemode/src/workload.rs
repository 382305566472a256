//! Seeded random traces.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::trace::{Op, OpKind, Trace};

/// Default number of distinct values.
pub const DEFAULT_VALUES: u32 = 64;

/// Distribution of inserted values over `0..values`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueDist {
    Uniform { values: u32 },
    /// Value `x` drawn with weight `1 / (x + 1)^theta`.
    Zipf { values: u32, theta: f64 },
}

impl Default for ValueDist {
    fn default() -> Self {
        ValueDist::Uniform { values: DEFAULT_VALUES }
    }
}

impl fmt::Display for ValueDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDist::Uniform { values } => write!(f, "uniform:{values}"),
            ValueDist::Zipf { values, theta } => write!(f, "zipf:{theta}:{values}"),
        }
    }
}

/// `uniform[:V]` or `zipf:THETA[:V]`.
impl FromStr for ValueDist {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorkloadError::BadDistribution(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let values = |x: Option<&&str>| match x {
            None => Ok(DEFAULT_VALUES),
            Some(v) => v.parse::<u32>().ok().filter(|&v| v > 0).ok_or_else(bad),
        };
        let dist = match parts[0] {
            "uniform" if parts.len() <= 2 => ValueDist::Uniform { values: values(parts.get(1))? },
            "zipf" if (2..=3).contains(&parts.len()) => {
                let theta: f64 = parts[1].parse().map_err(|_| bad())?;
                ValueDist::Zipf { values: values(parts.get(2))?, theta }
            }
            _ => return Err(bad()),
        };
        dist.check()?;
        Ok(dist)
    }
}

impl ValueDist {
    fn check(&self) -> Result<(), WorkloadError> {
        let ok = match *self {
            ValueDist::Uniform { values } => values > 0,
            ValueDist::Zipf { values, theta } => values > 0 && theta.is_finite() && theta >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(WorkloadError::BadDistribution(self.to_string()))
        }
    }
}

/// Proportions of inserts, deletes and queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpMix {
    pub insert: f64,
    pub delete: f64,
    pub query: f64,
}

impl Default for OpMix {
    fn default() -> Self {
        Self { insert: 0.45, delete: 0.2, query: 0.35 }
    }
}

/// `INSERT,DELETE,QUERY`, e.g. `0.45,0.2,0.35`.
impl FromStr for OpMix {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| WorkloadError::BadMix(s.to_string()))?;
        match parts[..] {
            [insert, delete, query] => Ok(OpMix { insert, delete, query }),
            _ => Err(WorkloadError::BadMix(s.to_string())),
        }
    }
}

impl OpMix {
    fn weight(&self, kind: OpKind) -> f64 {
        match kind {
            OpKind::Insert => self.insert,
            OpKind::Delete => self.delete,
            OpKind::Query => self.query,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkloadError {
    #[error("bad value distribution `{0}` (expected uniform[:V] or zipf:THETA[:V])")]
    BadDistribution(String),
    #[error("bad op mix `{0}` (expected three non-negative proportions summing to 1)")]
    BadMix(String),
    #[error("the op mix never inserts, so the sequence has no elements to delete or query")]
    NoElements,
    #[error("capacity must be positive")]
    NoCapacity,
    #[error("no op in the mix is possible at op {0} (full sequence and insert-only mix)")]
    Stuck(usize),
}

/// Parameters of [`generate_trace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Workload {
    pub ops: usize,
    pub capacity: usize,
    pub dist: ValueDist,
    pub mix: OpMix,
    pub seed: u64,
}

impl Workload {
    pub fn new(ops: usize, capacity: usize, seed: u64) -> Self {
        Self { ops, capacity, dist: ValueDist::default(), mix: OpMix::default(), seed }
    }

    pub fn with_dist(mut self, dist: ValueDist) -> Self {
        self.dist = dist;
        self
    }

    pub fn with_mix(mut self, mix: OpMix) -> Self {
        self.mix = mix;
        self
    }
}

enum Values {
    Uniform(u32),
    Zipf(Zipf<f64>),
}

impl Values {
    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            Values::Uniform(v) => rng.random_range(0..*v),
            Values::Zipf(z) => z.sample(rng) as u32 - 1,
        }
    }
}

/// A random trace that is valid against its running length. An op drawn from the
/// mix that cannot be applied (delete or query on an empty sequence, insert into a
/// full one) is drawn again.
pub fn generate_trace(w: &Workload) -> Result<Trace, WorkloadError> {
    let mix = w.mix;
    let parts = [mix.insert, mix.delete, mix.query];
    let total: f64 = parts.iter().sum();
    if parts.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(WorkloadError::BadMix(format!("{},{},{}", mix.insert, mix.delete, mix.query)));
    }
    w.dist.check()?;
    if w.capacity == 0 {
        return Err(WorkloadError::NoCapacity);
    }
    if w.ops > 0 && mix.insert == 0.0 {
        return Err(WorkloadError::NoElements);
    }
    let values = match w.dist {
        ValueDist::Uniform { values } => Values::Uniform(values),
        ValueDist::Zipf { values, theta } => {
            Values::Zipf(Zipf::new(f64::from(values), theta).map_err(|_| WorkloadError::BadDistribution(w.dist.to_string()))?)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let mut trace = Trace::new(w.capacity, w.seed);
    let mut len = 0usize;
    for x in 0..w.ops {
        let feasible = |k: OpKind| match k {
            OpKind::Insert => len < w.capacity,
            OpKind::Delete | OpKind::Query => len > 0,
        };
        if !OpKind::ALL.iter().any(|&k| feasible(k) && mix.weight(k) > 0.0) {
            return Err(WorkloadError::Stuck(x));
        }
        let kind = loop {
            let mut u: f64 = rng.random::<f64>() * total;
            let mut pick = OpKind::Query;
            for k in OpKind::ALL {
                if u < mix.weight(k) {
                    pick = k;
                    break;
                }
                u -= mix.weight(k);
            }
            if feasible(pick) && mix.weight(pick) > 0.0 {
                break pick;
            }
        };
        let op = match kind {
            OpKind::Insert => Op::Insert { pos: rng.random_range(1..=len + 1), value: values.draw(&mut rng) },
            OpKind::Delete => Op::Delete { pos: rng.random_range(1..=len) },
            OpKind::Query => {
                if rng.random_bool(0.5) {
                    let (a, b) = (rng.random_range(1..=len), rng.random_range(1..=len));
                    Op::Query { l: a.min(b), r: a.max(b) }
                } else {
                    let span = rng.random_range(1..=len.min(32));
                    let l = rng.random_range(1..=len + 1 - span);
                    Op::Query { l, r: l + span - 1 }
                }
            }
        };
        len = op.apply_len(len, w.capacity).expect("generated ops are valid");
        trace.ops.push(op);
    }
    Ok(trace)
}
