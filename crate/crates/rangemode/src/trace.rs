//! Operation traces and their text form:
//!
//! ```text
//! # N=1000 seed=7
//! I 1 42
//! Q 1 1
//! D 1
//! ```
//!
//! Positions are 1-based. Blank lines and further `#` lines are ignored.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Insert { pos: usize, value: u32 },
    Delete { pos: usize },
    Query { l: usize, r: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Insert,
    Delete,
    Query,
}

impl OpKind {
    pub const ALL: [OpKind; 3] = [OpKind::Insert, OpKind::Delete, OpKind::Query];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
            OpKind::Query => "query",
        }
    }
}

impl Op {
    pub fn kind(&self) -> OpKind {
        match self {
            Op::Insert { .. } => OpKind::Insert,
            Op::Delete { .. } => OpKind::Delete,
            Op::Query { .. } => OpKind::Query,
        }
    }

    /// Checks the op against the current length and returns the length after it.
    pub fn apply_len(&self, len: usize, capacity: usize) -> Result<usize, String> {
        match *self {
            Op::Insert { pos, .. } => {
                if len >= capacity {
                    Err(format!("insert into a full sequence (N={capacity})"))
                } else if pos == 0 || pos > len + 1 {
                    Err(format!("insert position {pos} outside 1..={}", len + 1))
                } else {
                    Ok(len + 1)
                }
            }
            Op::Delete { pos } => {
                if pos == 0 || pos > len {
                    Err(format!("delete position {pos} outside 1..={len}"))
                } else {
                    Ok(len - 1)
                }
            }
            Op::Query { l, r } => {
                if l == 0 || l > r || r > len {
                    Err(format!("query [{l}, {r}] invalid for length {len}"))
                } else {
                    Ok(len)
                }
            }
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Insert { pos, value } => write!(f, "I {pos} {value}"),
            Op::Delete { pos } => write!(f, "D {pos}"),
            Op::Query { l, r } => write!(f, "Q {l} {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub capacity: usize,
    pub seed: u64,
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("op {index}: {msg}")]
    Invalid { index: usize, msg: String },
}

impl TraceError {
    fn at(line: usize, msg: impl Into<String>) -> Self {
        TraceError::Malformed { line, msg: msg.into() }
    }
}

impl Trace {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self { capacity, seed, ops: Vec::new() }
    }

    pub fn queries(&self) -> usize {
        self.ops.iter().filter(|o| o.kind() == OpKind::Query).count()
    }

    /// Replays the running length; the error carries the 0-based op index.
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut len = 0;
        for (index, op) in self.ops.iter().enumerate() {
            len = op.apply_len(len, self.capacity).map_err(|msg| TraceError::Invalid { index, msg })?;
        }
        Ok(())
    }

    /// Parses and validates; errors name the offending line.
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate().map(|(x, s)| (x + 1, s.trim()));
        let (capacity, seed) = loop {
            match lines.next() {
                None => return Err(TraceError::at(1, "missing header `# N=<int> seed=<int>`")),
                Some((_, "")) => continue,
                Some((n, s)) => break parse_header(s).ok_or_else(|| TraceError::at(n, format!("bad header `{s}`")))?,
            }
        };
        let mut trace = Trace::new(capacity, seed);
        let mut len = 0;
        for (n, s) in lines {
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let op = parse_op(s).map_err(|m| TraceError::at(n, m))?;
            len = op.apply_len(len, capacity).map_err(|m| TraceError::at(n, m))?;
            trace.ops.push(op);
        }
        Ok(trace)
    }
}

impl FromStr for Trace {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Trace::parse(s)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# N={} seed={}", self.capacity, self.seed)?;
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

fn parse_header(s: &str) -> Option<(usize, u64)> {
    let mut words = s.strip_prefix('#')?.split_whitespace();
    let n = words.next()?.strip_prefix("N=")?.parse().ok()?;
    let seed = words.next()?.strip_prefix("seed=")?.parse().ok()?;
    words.next().is_none().then_some((n, seed))
}

fn parse_op(s: &str) -> Result<Op, String> {
    let words: Vec<&str> = s.split_whitespace().collect();
    let num = |x: usize| -> Result<usize, String> {
        words[x].parse().map_err(|_| format!("`{}` is not a position", words[x]))
    };
    let arity = |want: usize| {
        if words.len() == want + 1 {
            Ok(())
        } else {
            Err(format!("`{}` takes {want} argument(s), got {}", words[0], words.len() - 1))
        }
    };
    match words[0] {
        "I" => {
            arity(2)?;
            let value = words[2].parse().map_err(|_| format!("`{}` is not a 32-bit value", words[2]))?;
            Ok(Op::Insert { pos: num(1)?, value })
        }
        "D" => {
            arity(1)?;
            Ok(Op::Delete { pos: num(1)? })
        }
        "Q" => {
            arity(2)?;
            Ok(Op::Query { l: num(1)?, r: num(2)? })
        }
        other => Err(format!("unknown op `{other}`")),
    }
}
