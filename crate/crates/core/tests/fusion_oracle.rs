use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use qeck::engine::{fuse_candidates, Candidate};

#[derive(Debug, Clone)]
struct Row {
    id: String,
    /// Lucene score in eighths.
    l8: i64,
    sq: i64,
    sa: i64,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn normalize(v: &[BigRational]) -> Vec<BigRational> {
    let min = v.iter().min().unwrap().clone();
    let max = v.iter().max().unwrap().clone();
    if min == max {
        return vec![BigRational::one(); v.len()];
    }
    v.iter().map(|x| (x - &min) / (&max - &min)).collect()
}

/// Exact fused ranking: (pair id, final score).
fn oracle(rows: &[Row], m: usize) -> Vec<(String, BigRational)> {
    let l: Vec<_> = rows.iter().map(|r| rat(r.l8, 8)).collect();
    let s: Vec<_> = rows.iter().map(|r| rat(7 * r.sq + 3 * r.sa, 10)).collect();
    let (nl, ns) = (normalize(&l), normalize(&s));
    let mut out: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.clone(), &nl[i] + &ns[i]))
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out.truncate(m);
    out
}

fn candidates(rows: &[Row], alpha: i64, beta: i64) -> Vec<Candidate> {
    rows.iter()
        .map(|r| Candidate {
            pair_id: r.id.clone(),
            lucene_score: r.l8 as f64 / 8.0,
            so_score: 0.7 * (alpha * r.sq + beta) as f64 + 0.3 * (alpha * r.sa + beta) as f64,
        })
        .collect()
}

fn rows() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec((1i64..80, -20i64..300, -10i64..100), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (l8, sq, sa))| Row {
                id: format!("{:03}", (i * 37) % 101),
                l8,
                sq,
                sa,
            })
            .collect()
    })
}

#[test]
fn three_pair_example() {
    let rows = vec![
        Row { id: "p1".into(), l8: 16, sq: 0, sa: 0 },
        Row { id: "p2".into(), l8: 32, sq: 10, sa: 10 },
        Row { id: "p3".into(), l8: 48, sq: 5, sa: 5 },
    ];
    let want = oracle(&rows, 3);
    assert_eq!(want[0], ("p2".to_string(), rat(3, 2)));
    assert_eq!(want[1], ("p3".to_string(), rat(3, 2)));
    assert_eq!(want[2], ("p1".to_string(), BigRational::zero()));
    let got = fuse_candidates(&candidates(&rows, 1, 0), 2).unwrap();
    let ids: Vec<&str> = got.iter().map(|p| p.pair_id.as_str()).collect();
    assert_eq!(ids, ["p2", "p3"]);
    assert_eq!(got[0].final_score, 1.5);
}

#[test]
fn rounding_ties_fall_back_to_pair_id() {
    // exact finals: b = 1/10 + 2/10, a = 3/10 + 0; in floating point 0.1 + 0.2 > 0.3
    let rows = vec![
        Row { id: "b".into(), l8: 2, sq: 2, sa: 2 },
        Row { id: "a".into(), l8: 4, sq: 0, sa: 0 },
        Row { id: "c".into(), l8: 11, sq: 10, sa: 10 },
        Row { id: "d".into(), l8: 1, sq: 0, sa: 0 },
    ];
    let want = oracle(&rows, 4);
    assert_eq!(want[1].1, want[2].1);
    let got = fuse_candidates(&candidates(&rows, 1, 0), 4).unwrap();
    let ids: Vec<&str> = got.iter().map(|p| p.pair_id.as_str()).collect();
    assert_eq!(ids, ["c", "a", "b", "d"]);
}

proptest! {
    #[test]
    fn matches_exact_ranking(rows in rows(), m in 1usize..50) {
        let got = fuse_candidates(&candidates(&rows, 1, 0), m).unwrap();
        let want = oracle(&rows, m);
        let got_ids: Vec<&str> = got.iter().map(|p| p.pair_id.as_str()).collect();
        let want_ids: Vec<&str> = want.iter().map(|p| p.0.as_str()).collect();
        prop_assert_eq!(got_ids, want_ids);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g.final_score - w.1.to_f64().unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_and_normalization(rows in rows()) {
        let all = fuse_candidates(&candidates(&rows, 1, 0), rows.len()).unwrap();
        prop_assert_eq!(all.len(), rows.len());
        for p in &all {
            prop_assert!((0.0..=2.0).contains(&p.final_score));
            prop_assert!((0.0..=1.0).contains(&p.norm_l) && (0.0..=1.0).contains(&p.norm_s));
            prop_assert_eq!(p.final_score, p.norm_l + p.norm_s);
        }
        prop_assert!(all.iter().any(|p| p.norm_l == 1.0));
        prop_assert!(all.iter().any(|p| p.norm_s == 1.0));
        for w in all.windows(2) {
            prop_assert!(w[0].final_score >= w[1].final_score - 1e-9);
        }
    }

    #[test]
    fn affine_vote_transform_keeps_order(rows in rows(), m in 1usize..10, alpha in 1i64..100, beta in -1000i64..1000) {
        let a = fuse_candidates(&candidates(&rows, 1, 0), m).unwrap();
        let b = fuse_candidates(&candidates(&rows, alpha, beta), m).unwrap();
        let ids = |v: &[qeck::engine::ScoredQAPair]| v.iter().map(|p| p.pair_id.clone()).collect::<Vec<_>>();
        prop_assert_eq!(ids(&a), ids(&b));
    }
}
