//! Evaluation: Precision@K, NDCG@K, summary statistics and significance.
//!
//! Relevance is judged on a four-level scale (1 to 4); 3 and 4 count as
//! relevant. NDCG maps 1 and 2 to zero gain and discounts rank i >= 2 by
//! log2(i), so ranks 1 and 2 are both undiscounted.

mod io;
mod wilcoxon;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_judgments_csv, read_run, run_from_json, Judgment, Judgments, Run};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_LIMIT};

/// Lowest relevance grade that counts as relevant.
pub const RELEVANT: u8 = 3;

/// Grade assumed for retrieved but unjudged snippets.
pub const UNJUDGED: u8 = 1;

fn check_k(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::param("k must be at least 1"));
    }
    Ok(())
}

/// Fraction of the first `k` entries graded 3 or 4. Always divides by `k`.
pub fn precision_at_k(relevances: &[u8], k: usize) -> Result<f64> {
    check_k(k)?;
    let hits = relevances.iter().take(k).filter(|&&r| r >= RELEVANT).count();
    Ok(hits as f64 / k as f64)
}

/// DCG over raw gains: g1 + sum over i >= 2 of g_i / log2(i).
pub fn dcg_at_k(gains: &[f64], k: usize) -> f64 {
    gains
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| if i == 0 { *g } else { g / ((i + 1) as f64).log2() })
        .sum()
}

fn zeroed_gain(r: u8) -> f64 {
    if r >= RELEVANT {
        r as f64
    } else {
        0.0
    }
}

/// DCG of `gains` over the DCG of the same top-k gains sorted descending; 0
/// when that ideal is 0.
pub fn normalized_dcg(gains: &[f64], k: usize) -> f64 {
    let top: Vec<f64> = gains.iter().take(k).copied().collect();
    let mut ideal = top.clone();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg_at_k(&ideal, k);
    if idcg <= 0.0 {
        return 0.0;
    }
    dcg_at_k(&top, k) / idcg
}

/// NDCG@K with grades 1 and 2 mapped to zero gain.
pub fn ndcg_at_k(relevances: &[u8], k: usize) -> Result<f64> {
    check_k(k)?;
    let gains: Vec<f64> = relevances.iter().map(|&r| zeroed_gain(r)).collect();
    Ok(normalized_dcg(&gains, k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub stddev: f64,
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::param("cannot summarize an empty sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("sample contains a non-finite value"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    // sum in sorted order so the result does not depend on input order
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let stddev = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SummaryStats {
        samples: n,
        min: sorted[0],
        max: sorted[n - 1],
        median,
        mean,
        stddev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub query_id: String,
    pub precision_at_k: f64,
    pub ndcg_at_k: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvaluation {
    pub name: String,
    pub k: usize,
    pub per_query: Vec<MetricReport>,
    pub precision: SummaryStats,
    pub ndcg: SummaryStats,
}

/// Scores every query of `run` against `judgments`.
///
/// Every query of the run must have judgments; unjudged snippets count as
/// grade 1. Queries are reported in id order.
pub fn evaluate_run(name: &str, run: &Run, judgments: &Judgments, k: usize) -> Result<RunEvaluation> {
    check_k(k)?;
    if run.is_empty() {
        return Err(Error::param(format!("run `{name}` has no queries")));
    }
    let mut per_query = Vec::with_capacity(run.len());
    for (qid, ids) in run {
        if !judgments.has_query(qid) {
            return Err(Error::UnknownQuery(qid.clone()));
        }
        let grades: Vec<u8> = ids.iter().map(|id| judgments.relevance(qid, id)).collect();
        per_query.push(MetricReport {
            query_id: qid.clone(),
            precision_at_k: precision_at_k(&grades, k)?,
            ndcg_at_k: ndcg_at_k(&grades, k)?,
            k,
        });
    }
    let p: Vec<f64> = per_query.iter().map(|r| r.precision_at_k).collect();
    let g: Vec<f64> = per_query.iter().map(|r| r.ndcg_at_k).collect();
    Ok(RunEvaluation {
        name: name.to_string(),
        k,
        precision: summarize(&p)?,
        ndcg: summarize(&g)?,
        per_query,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub precision: WilcoxonResult,
    pub ndcg: WilcoxonResult,
}

/// Paired Wilcoxon tests of two evaluations over the same queries.
pub fn compare_runs(a: &RunEvaluation, b: &RunEvaluation) -> Result<Comparison> {
    let index = |e: &RunEvaluation| -> BTreeMap<String, (f64, f64)> {
        e.per_query
            .iter()
            .map(|r| (r.query_id.clone(), (r.precision_at_k, r.ndcg_at_k)))
            .collect()
    };
    let (ia, ib) = (index(a), index(b));
    if ia.keys().ne(ib.keys()) {
        return Err(Error::param(format!(
            "runs `{}` and `{}` cover different queries",
            a.name, b.name
        )));
    }
    let pa: Vec<f64> = ia.values().map(|v| v.0).collect();
    let pb: Vec<f64> = ib.values().map(|v| v.0).collect();
    let na: Vec<f64> = ia.values().map(|v| v.1).collect();
    let nb: Vec<f64> = ib.values().map(|v| v.1).collect();
    Ok(Comparison {
        first: a.name.clone(),
        second: b.name.clone(),
        precision: wilcoxon_signed_rank(&pa, &pb)?,
        ndcg: wilcoxon_signed_rank(&na, &nb)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub runs: Vec<RunEvaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// Evaluates one or two runs; two runs are also compared.
pub fn evaluate_runs(runs: &[(String, Run)], judgments: &Judgments, k: usize) -> Result<EvalReport> {
    if runs.is_empty() || runs.len() > 2 {
        return Err(Error::param(format!("expected 1 or 2 runs, got {}", runs.len())));
    }
    let evals = runs
        .iter()
        .map(|(name, run)| evaluate_run(name, run, judgments, k))
        .collect::<Result<Vec<_>>>()?;
    let comparison = match evals.as_slice() {
        [a, b] => Some(compare_runs(a, b)?),
        _ => None,
    };
    Ok(EvalReport {
        runs: evals,
        comparison,
    })
}

/// Fixed-width table: one row per metric and run with
/// Samples, Min, Max, Median, Mean and StdDev, then the p-values.
pub fn format_table(report: &EvalReport) -> String {
    let name_w = report
        .runs
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(0)
        .max(3);
    let mut out = format!(
        "{:<12}  {:<name_w$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}\n",
        "Metric", "Run", "Samples", "Min", "Max", "Median", "Mean", "StdDev"
    );
    for (label, pick) in [
        ("Precision", (|r: &RunEvaluation| &r.precision) as fn(&RunEvaluation) -> &SummaryStats),
        ("NDCG", |r: &RunEvaluation| &r.ndcg),
    ] {
        for run in &report.runs {
            let s = pick(run);
            let metric = format!("{label}@{}", run.k);
            out.push_str(&format!(
                "{metric:<12}  {:<name_w$}  {:>7}  {:>7.3}  {:>7.3}  {:>7.3}  {:>7.3}  {:>7.3}\n",
                run.name, s.samples, s.min, s.max, s.median, s.mean, s.stddev
            ));
        }
    }
    if let Some(c) = &report.comparison {
        out.push_str(&format!(
            "\nWilcoxon signed-rank ({} vs {}, two-sided)\n",
            c.first, c.second
        ));
        for (label, w) in [("Precision", &c.precision), ("NDCG", &c.ndcg)] {
            out.push_str(&format!(
                "{label:<12}  p = {:.6}  W = {}  n = {}{}\n",
                w.p_value,
                w.statistic,
                w.n_nonzero,
                if w.exact { "" } else { " (normal approximation)" }
            ));
        }
    }
    out
}
