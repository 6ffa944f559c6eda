//! Parameter sweeps: mean Precision@K and NDCG@K as one expansion setting varies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{QeckConfig, QeckEngine, QuerySpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate_run, Judgments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Number of feedback documents.
    M,
    /// Number of expansion terms.
    N,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::M => "m",
            SweepParam::N => "n",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepParam::M),
            "n" => Ok(SweepParam::N),
            _ => Err(Error::param(format!("unknown sweep parameter `{s}` (expected m or n)"))),
        }
    }
}

/// Default sweep values: 1 to 10, 15, 20.
pub fn default_values() -> Vec<usize> {
    (1..=10).chain([15, 20]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub samples: usize,
    pub mean_precision: f64,
    pub mean_ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParam,
    pub base: QeckConfig,
    pub rows: Vec<SweepRow>,
}

/// Evaluates every query once per value of `param`, other settings from `base`.
pub fn sweep(
    engine: &QeckEngine,
    queries: &[QuerySpec],
    judgments: &Judgments,
    base: &QeckConfig,
    param: SweepParam,
    values: &[usize],
) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::param("no sweep values given"));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut config = base.clone();
        match param {
            SweepParam::M => {
                config.m = value;
                config.first_pass_pool = config.first_pass_pool.max(value);
            }
            SweepParam::N => config.n = value,
        }
        let run = engine.ranked_ids(queries, &config, false)?;
        let eval = evaluate_run(&format!("{param}={value}"), &run, judgments, config.k)?;
        rows.push(SweepRow {
            value,
            samples: eval.precision.samples,
            mean_precision: eval.precision.mean,
            mean_ndcg: eval.ndcg.mean,
        });
    }
    Ok(SweepReport {
        parameter: param,
        base: base.clone(),
        rows,
    })
}

/// One line per swept value.
pub fn format_sweep_table(report: &SweepReport) -> String {
    let k = report.base.k;
    let mut out = format!(
        "{:>5}  {:>7}  {:>12}  {:>8}\n",
        report.parameter.to_string(),
        "Samples",
        format!("Precision@{k}"),
        format!("NDCG@{k}")
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{:>5}  {:>7}  {:>12.4}  {:>8.4}\n",
            r.value, r.samples, r.mean_precision, r.mean_ndcg
        ));
    }
    out
}
