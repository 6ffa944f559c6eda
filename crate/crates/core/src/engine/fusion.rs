use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scales values to [0, 1]. A constant list maps to all ones.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::param("cannot normalize an empty list"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::param(format!("cannot normalize non-finite value {v}")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(vec![1.0; values.len()]);
    }
    let span = max - min;
    Ok(values
        .iter()
        .map(|v| ((v - min) / span).clamp(0.0, 1.0))
        .collect())
}

/// A first-pass candidate before fusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub pair_id: String,
    pub lucene_score: f64,
    pub so_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredQAPair {
    pub pair_id: String,
    pub lucene_score: f64,
    pub so_score: f64,
    pub norm_l: f64,
    pub norm_s: f64,
    pub final_score: f64,
}

/// Resolution used when ordering fused scores.
const ORDER_GRID: f64 = 4_294_967_296.0; // 2^32

/// Sort key for a fused score. Sums that are equal in exact arithmetic can
/// differ in the last bits after rounding; comparing on a 2^-32 grid keeps
/// such ties tied, so they fall through to the pair-id tie-break.
pub(crate) fn order_key(final_score: f64) -> i64 {
    (final_score * ORDER_GRID).round() as i64
}

/// Min-max normalizes the Lucene and SO scores over all candidates, sums
/// them, and returns the top `m` by fused score (ties by pair id ascending).
pub fn fuse_candidates(candidates: &[Candidate], m: usize) -> Result<Vec<ScoredQAPair>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let l: Vec<f64> = candidates.iter().map(|c| c.lucene_score).collect();
    let s: Vec<f64> = candidates.iter().map(|c| c.so_score).collect();
    let norm_l = min_max_normalize(&l)?;
    let norm_s = min_max_normalize(&s)?;
    let mut fused: Vec<ScoredQAPair> = candidates
        .iter()
        .zip(norm_l.into_iter().zip(norm_s))
        .map(|(c, (nl, ns))| ScoredQAPair {
            pair_id: c.pair_id.clone(),
            lucene_score: c.lucene_score,
            so_score: c.so_score,
            norm_l: nl,
            norm_s: ns,
            final_score: nl + ns,
        })
        .collect();
    fused.sort_by(|a, b| {
        order_key(b.final_score)
            .cmp(&order_key(a.final_score))
            .then_with(|| a.pair_id.cmp(&b.pair_id))
    });
    fused.truncate(m);
    Ok(fused)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(id: &str, l: f64, s: f64) -> Candidate {
        Candidate {
            pair_id: id.into(),
            lucene_score: l,
            so_score: s,
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(min_max_normalize(&[2.0, 4.0, 6.0]).unwrap(), [0.0, 0.5, 1.0]);
        assert_eq!(min_max_normalize(&[5.0, 5.0, 5.0]).unwrap(), [1.0, 1.0, 1.0]);
        assert_eq!(min_max_normalize(&[-3.5]).unwrap(), [1.0]);
        assert!(min_max_normalize(&[]).is_err());
        assert!(min_max_normalize(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn three_candidates() {
        let c = [cand("c", 2.0, 0.0), cand("b", 4.0, 10.0), cand("a", 6.0, 5.0)];
        let all = fuse_candidates(&c, 3).unwrap();
        let got: Vec<(&str, f64)> = all.iter().map(|p| (p.pair_id.as_str(), p.final_score)).collect();
        assert_eq!(got, [("a", 1.5), ("b", 1.5), ("c", 0.0)]);
        let top2 = fuse_candidates(&c, 2).unwrap();
        assert_eq!(top2.len(), 2);
        assert_eq!(top2[0].pair_id, "a");
    }

    #[test]
    fn single_candidate() {
        let one = fuse_candidates(&[cand("x", 0.3, -4.0)], 5).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].final_score, 2.0);
    }
}
