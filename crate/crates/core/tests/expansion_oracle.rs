use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use qeck::engine::{
    expand, select_expansion_terms, FeedbackSet, IdfBasis, QeckConfig, Query, ScoredQAPair,
};
use qeck::index::{DocumentRecord, InvertedIndex};
use qeck::text::TermBag;

fn bag(words: &[&str]) -> TermBag {
    TermBag(words.iter().map(|w| w.to_string()).collect())
}

fn index(docs: &[(String, Vec<String>)]) -> InvertedIndex {
    let mut idx = InvertedIndex::new("fp");
    for (id, terms) in docs {
        idx.add_document(DocumentRecord::new(id.clone(), TermBag(terms.clone())))
            .unwrap();
    }
    idx.commit().unwrap();
    idx
}

fn feedback(ids: &[&str]) -> FeedbackSet {
    FeedbackSet {
        entries: ids
            .iter()
            .map(|id| ScoredQAPair {
                pair_id: id.to_string(),
                lucene_score: 1.0,
                so_score: 0.0,
                norm_l: 1.0,
                norm_s: 1.0,
                final_score: 2.0,
            })
            .collect(),
    }
}

fn query(words: &[&str]) -> Query {
    Query {
        raw: words.join(" "),
        terms: bag(words),
    }
}

/// Twenty documents; d1 and d2 are the feedback documents.
/// tf in (d1, d2) and collection df:
/// alpha (4, 0) df 2; bravo (1, 1) df 2; charli (1, 0) df 1; delta (0, 9) df 5;
/// echo (2, 0) df 6 (over the 25% cutoff); "query" is the query term.
fn golden_corpus() -> InvertedIndex {
    let mut docs: Vec<(String, Vec<String>)> = Vec::new();
    let mut d1 = vec!["query", "alpha", "alpha", "alpha", "alpha", "bravo", "charli", "echo", "echo"];
    let mut d2 = vec!["query", "bravo"];
    d2.extend(std::iter::repeat_n("delta", 9));
    docs.push(("d1".into(), d1.drain(..).map(String::from).collect()));
    docs.push(("d2".into(), d2.into_iter().map(String::from).collect()));
    for i in 1..=18 {
        let mut t = vec![format!("pad{i}")];
        if i == 1 {
            t.push("alpha".into());
        }
        if i <= 4 {
            t.push("delta".into());
        }
        if i <= 5 {
            t.push("echo".into());
        }
        docs.push((format!("f{i:02}"), t));
    }
    index(&docs)
}

#[test]
fn golden_top_three() {
    let idx = golden_corpus();
    assert_eq!(idx.doc_count(), 20);
    assert_eq!(idx.document_frequency("echo").unwrap(), 6);
    let config = QeckConfig {
        n: 3,
        ..QeckConfig::default()
    };
    let terms = select_expansion_terms(&feedback(&["d1", "d2"]), &query(&["query"]), &idx, &config)
        .unwrap();
    let got: Vec<(&str, f64, u32, usize)> = terms
        .iter()
        .map(|t| (t.term.as_str(), t.weight, t.feedback_tf, t.collection_df))
        .collect();
    let want = [
        ("delta", 6.611918412977808, 9, 5),
        ("alpha", 5.794239969771763, 4, 2),
        ("bravo", 5.794239969771763, 2, 2),
    ];
    assert_eq!(got.len(), 3);
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.0, w.0);
        assert!((g.1 - w.1).abs() < 1e-12, "{} {}", g.1, w.1);
        assert_eq!((g.2, g.3), (w.2, w.3));
    }

    let all = select_expansion_terms(
        &feedback(&["d1", "d2"]),
        &query(&["query"]),
        &idx,
        &QeckConfig::default(),
    )
    .unwrap();
    let names: Vec<&str> = all.iter().map(|t| t.term.as_str()).collect();
    assert_eq!(names, ["delta", "alpha", "bravo", "charli"]);
}

#[test]
fn sqrt_tf_component() {
    // a single feedback document with tf = 4 and a term unique to it
    let docs: Vec<(String, Vec<String>)> = (0..8)
        .map(|i| {
            let terms = if i == 0 { vec!["w"; 4] } else { vec!["other"] };
            (format!("d{i}"), terms.into_iter().map(String::from).collect())
        })
        .collect();
    let idx = index(&docs);
    let terms = select_expansion_terms(&feedback(&["d0"]), &query(&[]), &idx, &QeckConfig::default())
        .unwrap();
    assert_eq!(terms.len(), 1);
    let idf = (8.0f64 / 2.0).ln() + 1.0;
    assert!((terms[0].weight / idf - 2.0).abs() < 1e-12);
}

#[test]
fn feedback_idf_basis() {
    let idx = golden_corpus();
    let config = QeckConfig {
        idf_basis: IdfBasis::Feedback,
        ..QeckConfig::default()
    };
    let terms = select_expansion_terms(&feedback(&["d1", "d2"]), &query(&["query"]), &idx, &config)
        .unwrap();
    // N = 2; df within feedback: alpha 1, bravo 2, charli 1, delta 1
    let w = |tfs: &[f64], df: f64| tfs.iter().map(|t| t.sqrt()).sum::<f64>() * ((2.0 / (df + 1.0)).ln() + 1.0);
    let want = [
        ("delta", w(&[9.0], 1.0)),
        ("alpha", w(&[4.0], 1.0)),
        ("bravo", w(&[1.0, 1.0], 2.0)),
        ("charli", w(&[1.0], 1.0)),
    ];
    let got: Vec<(&str, f64)> = terms.iter().map(|t| (t.term.as_str(), t.weight)).collect();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.0, w.0);
        assert!((g.1 - w.1).abs() < 1e-12);
    }
}

/// Independent weight computation straight from the stored term bags.
fn oracle(
    docs: &[(String, Vec<String>)],
    fb: &[usize],
    query_terms: &BTreeSet<String>,
    n: usize,
    cutoff: f64,
) -> Vec<(String, f64)> {
    let total = docs.len() as f64;
    let df = |t: &str| docs.iter().filter(|(_, ts)| ts.iter().any(|x| x == t)).count() as f64;
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for &i in fb {
        for t in docs[i].1.iter().collect::<BTreeSet<_>>() {
            if query_terms.contains(t) || df(t) / total > cutoff {
                continue;
            }
            let tf = docs[i].1.iter().filter(|x| *x == t).count() as f64;
            *weights.entry(t.clone()).or_insert(0.0) += tf.sqrt() * ((total / (df(t) + 1.0)).ln() + 1.0);
        }
    }
    let mut v: Vec<(String, f64)> = weights.into_iter().collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    v.truncate(n);
    v
}

fn corpus() -> impl Strategy<Value = Vec<(String, Vec<String>)>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"]);
    prop::collection::vec(prop::collection::vec(word, 1..12), 4..30).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, ws)| (format!("d{i:02}"), ws.into_iter().map(String::from).collect()))
            .collect()
    })
}

proptest! {
    #[test]
    fn matches_oracle_and_invariants(
        docs in corpus(),
        fb_seed in prop::collection::vec(any::<prop::sample::Index>(), 0..6),
        q in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "zz"]), 0..3),
        n in 1usize..8,
        cutoff in prop::sample::select(vec![0.1, 0.25, 0.5, 1.0]),
    ) {
        let idx = index(&docs);
        let mut fb: Vec<usize> = fb_seed.iter().map(|i| i.index(docs.len())).collect();
        fb.sort();
        fb.dedup();
        let ids: Vec<&str> = fb.iter().map(|&i| docs[i].0.as_str()).collect();
        let qy = query(&q);
        let config = QeckConfig { n, df_cutoff: cutoff, ..QeckConfig::default() };
        let got = select_expansion_terms(&feedback(&ids), &qy, &idx, &config).unwrap();

        let qset: BTreeSet<String> = q.iter().map(|s| s.to_string()).collect();
        let want = oracle(&docs, &fb, &qset, n, cutoff);
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g.weight - w.1).abs() <= 1e-9 * w.1.abs().max(1.0));
        }
        let got_names: Vec<&str> = got.iter().map(|t| t.term.as_str()).collect();
        let want_names: Vec<&str> = want.iter().map(|t| t.0.as_str()).collect();
        prop_assert_eq!(got_names, want_names);

        prop_assert!(got.len() <= n);
        for t in &got {
            prop_assert!(!qset.contains(&t.term));
            prop_assert!(t.weight > 0.0);
            prop_assert!(t.collection_df as f64 <= cutoff * docs.len() as f64);
        }
        let expanded = expand(&qy, &got);
        prop_assert_eq!(expanded.combined_terms.len(), qy.terms.len() + got.len());
    }
}
