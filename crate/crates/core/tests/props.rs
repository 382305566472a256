use proptest::prelude::*;
use rangemode_core::mpq::{BucketedMpq, MonotoneMpq, Sampling, Witnessed};
use rangemode_core::{DynamicMode, IndexSet, Matrix, ModeConfig, OrderTree};

#[derive(Clone, Debug)]
enum Step {
    Insert(usize, u32),
    Delete(usize),
    Query(usize, usize),
}

fn steps() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(
        prop_oneof![
            3 => (any::<usize>(), 0u32..6).prop_map(|(p, v)| Step::Insert(p, v)),
            1 => any::<usize>().prop_map(Step::Delete),
            2 => (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Step::Query(a, b)),
        ],
        0..150,
    )
}

fn mode(seq: &[u32]) -> usize {
    let mut best = 0;
    for &v in seq {
        best = best.max(seq.iter().filter(|&&x| x == v).count());
    }
    best
}

fn scan(a: &Matrix, b: &Matrix, i: usize, j: usize, s: &IndexSet) -> Option<i64> {
    (0..a.cols())
        .filter(|&k| !s.contains(k))
        .filter_map(|k| Some(a.get(i, k)? + b.get(k, j)?))
        .min()
}

fn valid(a: &Matrix, b: &Matrix, i: usize, j: usize, s: &IndexSet, got: Option<Witnessed>) -> bool {
    let want = scan(a, b, i, j, s);
    match got {
        None => want.is_none(),
        Some(w) => {
            Some(w.value) == want
                && !s.contains(w.witness)
                && a.get(i, w.witness).zip(b.get(w.witness, j)).map(|(x, y)| x + y) == Some(w.value)
        }
    }
}

fn matrix(rows: usize, cols: usize, lo: i64, hi: i64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::option::weighted(0.8, lo..=hi), rows * cols).prop_map(move |data| {
        let rows: Vec<Vec<Option<i64>>> = data.chunks(cols).map(<[_]>::to_vec).collect();
        Matrix::from_rows(&rows)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dynamic_mode_matches_model(
        ops in steps(),
        cap in 1usize..60,
        t3 in 0.0f64..=1.0,
        t2 in 0.05f64..0.95,
        deamortize in any::<bool>(),
    ) {
        let config = ModeConfig::new(cap).exponents(1.0 - t2 / 2.0, t2, t3).deamortized(deamortize);
        let mut m = DynamicMode::new(config).unwrap();
        let mut seq: Vec<u32> = Vec::new();
        for step in ops {
            match step {
                Step::Insert(p, v) if seq.len() < cap => {
                    let pos = p % (seq.len() + 1) + 1;
                    m.insert(pos, v).unwrap();
                    seq.insert(pos - 1, v);
                }
                Step::Delete(p) if !seq.is_empty() => {
                    let pos = p % seq.len() + 1;
                    prop_assert_eq!(m.delete(pos).unwrap(), seq.remove(pos - 1));
                }
                Step::Query(a, b) if !seq.is_empty() => {
                    let (a, b) = (a % seq.len() + 1, b % seq.len() + 1);
                    let (l, r) = (a.min(b), a.max(b));
                    let before = m.checksum();
                    let (v, f) = m.query(l, r).unwrap();
                    prop_assert_eq!(m.checksum(), before);
                    let range = &seq[l - 1..r];
                    prop_assert_eq!(f, mode(range));
                    prop_assert_eq!(range.iter().filter(|&&x| x == v).count(), f);
                }
                _ => {}
            }
            prop_assert_eq!(m.len(), seq.len());
        }
        prop_assert_eq!(m.values(), seq);
        prop_assert_eq!(m.validate_snapshot(), 0);
    }

    #[test]
    fn order_tree_matches_vec(ops in prop::collection::vec((any::<bool>(), any::<usize>(), any::<u32>()), 0..200)) {
        let mut t = OrderTree::new();
        let mut v: Vec<u32> = Vec::new();
        for (ins, p, x) in ops {
            if ins || v.is_empty() {
                let pos = p % (v.len() + 1) + 1;
                let h = t.insert(pos, x).unwrap();
                v.insert(pos - 1, x);
                prop_assert_eq!(t.rank(h).unwrap(), pos);
            } else {
                let pos = p % v.len() + 1;
                let h = t.select(pos).unwrap();
                prop_assert_eq!(t.remove(h).unwrap(), v.remove(pos - 1));
            }
            prop_assert!(t.check_invariants());
        }
        prop_assert_eq!(t.values(), v);
    }

    #[test]
    fn bucketed_matches_scan(
        (a, b, p) in (1usize..5, 1usize..10, 1usize..5).prop_flat_map(|(n, c, m)| {
            (matrix(n, c, -3, 3), matrix(c, m, -40, 40).prop_map(|b| {
                Matrix::from_fn(b.rows(), b.cols(), |k, j| Some(b.get(k, j).unwrap_or(7)))
            }), 1..=c)
        }),
        queries in prop::collection::vec((any::<usize>(), any::<usize>(), prop::collection::vec(any::<usize>(), 0..6)), 1..20),
    ) {
        let mut mpq = BucketedMpq::build(a.clone(), b.clone(), 3, p).unwrap();
        prop_assert!(mpq.self_check().is_empty());
        for (i, j, s) in queries {
            let (i, j) = (i % a.rows(), j % b.cols());
            let s: IndexSet = s.into_iter().map(|k| k % a.cols()).collect();
            let got = mpq.query(i, j, &s).unwrap();
            prop_assert!(valid(&a, &b, i, j, &s, got));
        }
    }

    #[test]
    fn monotone_matches_scan(
        (a, drops, start) in (1usize..5, 1usize..10, 1usize..10).prop_flat_map(|(n, c, m)| {
            (
                matrix(n, c, -15, 15),
                prop::collection::vec(prop::collection::vec(0i64..6, m - 1), c),
                prop::collection::vec(0i64..30, c),
            )
        }),
        delta in 1usize..4,
        seed in any::<u64>(),
        queries in prop::collection::vec((any::<usize>(), any::<usize>(), prop::collection::vec(any::<usize>(), 0..6)), 1..20),
    ) {
        let rows: Vec<Vec<i64>> = drops
            .iter()
            .zip(&start)
            .map(|(d, &s)| {
                let mut row = vec![s];
                for x in d {
                    row.push(row.last().unwrap() - x);
                }
                row
            })
            .collect();
        let b = Matrix::from_finite(&rows);
        let col = |j: usize| rows.iter().map(|r| r[j]).sum::<i64>();
        let bound = (1..b.cols()).map(|j| col(j - 1) - col(j)).max().unwrap_or(0).max(1);
        let budget = a.cols();
        let mut mpq = MonotoneMpq::build_with_width(a.clone(), b.clone(), budget, bound, delta, Sampling::Seeded(seed)).unwrap();
        for (i, j, s) in queries {
            let (i, j) = (i % a.rows(), j % b.cols());
            let s: IndexSet = s.into_iter().map(|k| k % a.cols()).take(budget - 1).collect();
            let got = mpq.query(i, j, &s).unwrap();
            prop_assert!(valid(&a, &b, i, j, &s, got));
        }
    }
}
