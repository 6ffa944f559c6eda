use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of non-zero differences handled by the exact distribution.
pub const EXACT_LIMIT: usize = 25;

/// Absolute differences closer than this are treated as equal (and as zero).
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// min(W+, W-).
    pub statistic: f64,
    pub p_value: f64,
    pub n_nonzero: usize,
    pub exact: bool,
}

/// Ranks of the absolute differences, doubled so tied (average) ranks stay integral.
pub(crate) fn doubled_ranks(abs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = vec![0u64; abs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && abs[order[end]] - abs[order[start]] <= TIE_TOLERANCE {
            end += 1;
        }
        // positions start+1 ..= end share rank (start+1+end)/2; doubled: start+1+end
        let r = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Two-sided paired Wilcoxon signed-rank test of `a` against `b`.
///
/// Zero differences are dropped and tied magnitudes share their average
/// rank. Up to [`EXACT_LIMIT`] non-zero differences the p-value is the exact
/// proportion of the 2^n sign assignments whose rank sum lies at least as
/// far from its mean as the observed one; above that a normal approximation
/// with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::param("paired samples are empty"));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| d.abs() > TIE_TOLERANCE)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n_nonzero: 0,
            exact: true,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&abs);
    let total2: u64 = ranks.iter().sum();
    let plus2: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let statistic = plus2.min(total2 - plus2) as f64 / 2.0;

    if n <= EXACT_LIMIT {
        let p = exact_p(&ranks, plus2);
        return Ok(WilcoxonResult {
            statistic,
            p_value: p,
            n_nonzero: n,
            exact: true,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let w = plus2 as f64 / 2.0;
    let dev = ((w - mean).abs() - 0.5).max(0.0);
    let p = if var > 0.0 {
        erfc(dev / var.sqrt() / std::f64::consts::SQRT_2)
    } else {
        1.0
    };
    Ok(WilcoxonResult {
        statistic,
        p_value: p.clamp(0.0, 1.0),
        n_nonzero: n,
        exact: false,
    })
}

/// Exact two-sided p-value by counting sign assignments (dynamic programming
/// over doubled rank sums).
fn exact_p(ranks: &[u64], plus2: u64) -> f64 {
    let total2: u64 = ranks.iter().sum();
    let mut counts = vec![0u64; total2 as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let observed = (2 * plus2 as i64 - total2 as i64).abs();
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (2 * s as i64 - total2 as i64).abs() >= observed)
        .map(|(_, c)| c)
        .sum();
    let p = extreme as f64 / 2f64.powi(ranks.len() as i32);
    p.min(1.0)
}

/// Complementary error function (Chebyshev fit, relative error below 1.2e-7).
pub(crate) fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.5, 0.9];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.n_nonzero, 0);
    }

    #[test]
    fn constant_shift_is_extreme() {
        let b: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 0.5).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.p_value, 2.0 / 1024.0);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
        assert!(wilcoxon_signed_rank(&[], &[]).is_err());
    }

    #[test]
    fn average_ranks() {
        assert_eq!(doubled_ranks(&[0.3, 0.1, 0.3, 0.2]), [7, 2, 7, 4]);
    }

    #[test]
    fn erfc_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-7);
        assert!((erfc(1.0) - 0.157_299_207).abs() < 1e-7);
        assert!((erfc(-1.0) - 1.842_700_793).abs() < 1e-7);
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let b = vec![0.0; 30];
        let a: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!r.exact);
        // W- = 3+6+...+30 = 165, mean 232.5, var 2363.75
        assert_eq!(r.statistic, 165.0);
        let z = (232.5f64 - 165.0 - 0.5) / 2363.75f64.sqrt();
        assert!((r.p_value - erfc(z / std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!(r.p_value > 0.1 && r.p_value < 0.2);
    }
}
