//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use qeck::index::{DocumentRecord, InvertedIndex};
use qeck::text::TermBag;

pub type Corpus = Vec<(String, Vec<String>)>;

pub fn index(docs: &Corpus) -> InvertedIndex {
    let mut idx = InvertedIndex::new("fp");
    for (id, terms) in docs {
        idx.add_document(DocumentRecord::new(id.clone(), TermBag(terms.clone())))
            .unwrap();
    }
    idx.commit().unwrap();
    idx
}

/// Brute-force BM25 straight from the token lists: (doc id, score), best
/// first, zero scores dropped, ties by id.
pub fn bm25(docs: &Corpus, query: &[String]) -> Vec<(String, f64)> {
    let (k1, b) = (1.2, 0.75);
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n;
    let mut out = Vec::new();
    for (id, terms) in docs {
        let dl = terms.len() as f64;
        let mut score = 0.0;
        for q in query {
            let tf = terms.iter().filter(|t| *t == q).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = docs.iter().filter(|(_, ts)| ts.contains(q)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if score > 0.0 {
            out.push((id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    // runs of scores within 1e-12 of each other are ties, ordered by id
    let mut start = 0;
    while start < out.len() {
        let mut end = start + 1;
        while end < out.len() && rel_diff(out[end - 1].1, out[end].1) <= 1e-12 {
            end += 1;
        }
        out[start..end].sort_by(|a, b| a.0.cmp(&b.0));
        start = end;
    }
    out
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn normalize(v: &[BigRational]) -> Vec<BigRational> {
    let min = v.iter().min().unwrap().clone();
    let max = v.iter().max().unwrap().clone();
    if min == max {
        return vec![BigRational::one(); v.len()];
    }
    v.iter().map(|x| (x - &min) / (&max - &min)).collect()
}

/// Exact fused ranking of (id, lucene score, question votes, answer votes)
/// rows with rational Lucene scores: (id, final score), top `m`.
pub fn fusion(rows: &[(String, BigRational, i64, i64)], m: usize) -> Vec<(String, BigRational)> {
    let l: Vec<_> = rows.iter().map(|r| r.1.clone()).collect();
    let s: Vec<_> = rows.iter().map(|r| rat(7 * r.2 + 3 * r.3, 10)).collect();
    let (nl, ns) = (normalize(&l), normalize(&s));
    let mut out: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.0.clone(), &nl[i] + &ns[i]))
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out.truncate(m);
    out
}

/// Expansion weights computed from the stored term bags; `fb` indexes `docs`.
pub fn expansion(
    docs: &Corpus,
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

/// Two-sided signed-rank p-value by enumerating all 2^n sign flips.
/// Differences are compared on a 1e-9 grid.
pub fn wilcoxon_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<i64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| ((x - y) * 1e9).round() as i64)
        .filter(|d| *d != 0)
        .collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let mut rank2 = vec![0i64; n];
    for i in 0..n {
        let less = d.iter().filter(|x| x.abs() < d[i].abs()).count() as i64;
        let equal = d.iter().filter(|x| x.abs() == d[i].abs()).count() as i64;
        rank2[i] = 2 * less + equal + 1;
    }
    let total: i64 = rank2.iter().sum();
    let observed: i64 = (0..n).filter(|&i| d[i] > 0).map(|i| rank2[i]).sum();
    let dev = (2 * observed - total).abs();
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let s: i64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| rank2[i]).sum();
        if (2 * s - total).abs() >= dev {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Relative difference, with an absolute floor for values near zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
