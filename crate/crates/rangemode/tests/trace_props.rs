use proptest::prelude::*;
use rangemode::runner::{run_trace, Impl, Tuning};
use rangemode::{generate_trace, Op, Trace, ValueDist, Workload};

/// Valid op lists built from raw draws, mapped against the running length.
fn valid_trace() -> impl Strategy<Value = Trace> {
    (1usize..40, any::<u64>(), prop::collection::vec((0u8..3, any::<usize>(), any::<usize>(), any::<u32>()), 0..120))
        .prop_map(|(cap, seed, raw)| {
            let mut t = Trace::new(cap, seed);
            let mut len = 0usize;
            for (kind, x, y, v) in raw {
                let op = match kind {
                    0 if len < cap => Op::Insert { pos: x % (len + 1) + 1, value: v },
                    1 if len > 0 => Op::Delete { pos: x % len + 1 },
                    2 if len > 0 => {
                        let (a, b) = (x % len + 1, y % len + 1);
                        Op::Query { l: a.min(b), r: a.max(b) }
                    }
                    _ => continue,
                };
                len = op.apply_len(len, cap).unwrap();
                t.ops.push(op);
            }
            t
        })
}

proptest! {
    #[test]
    fn format_then_parse_is_identity(t in valid_trace()) {
        let text = t.to_string();
        prop_assert_eq!(Trace::parse(&text).unwrap(), t);
    }

    #[test]
    fn implementations_agree_on_frequencies(t in valid_trace(), t3 in 0.0f64..=1.0, deamortize in any::<bool>()) {
        let tuning = Tuning { t3: Some(t3), deamortize, ..Tuning::default() };
        let config = tuning.config(t.capacity, t.seed);
        let naive = run_trace(&t, Impl::Naive, &config).unwrap();
        let mpq = run_trace(&t, Impl::Mpq, &config).unwrap();
        let f = |o: &rangemode::runner::RunOutput| o.answers.iter().map(|a| a.1).collect::<Vec<_>>();
        prop_assert_eq!(f(&naive), f(&mpq));
    }

    #[test]
    fn generated_traces_are_valid(ops in 0usize..400, cap in 1usize..100, seed in any::<u64>(), theta in 0.0f64..2.0) {
        let w = Workload::new(ops, cap, seed).with_dist(ValueDist::Zipf { values: 30, theta });
        let t = generate_trace(&w).unwrap();
        prop_assert_eq!(t.ops.len(), ops);
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(Trace::parse(&t.to_string()).unwrap(), t);
    }
}
