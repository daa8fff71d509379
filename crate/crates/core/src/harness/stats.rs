//! Descriptive statistics and the Kruskal-Wallis H test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Min, max and median of a pooled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub slice: String,
    pub metric: String,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub n: usize,
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

pub fn describe(slice: &str, metric: &str, values: &[f64]) -> Option<StatReport> {
    let median = median(values)?;
    Some(StatReport {
        slice: slice.to_string(),
        metric: metric.to_string(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        median,
        n: values.len(),
    })
}

/// Kruskal-Wallis outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub h: f64,
    pub p: f64,
    pub df: usize,
}

/// Midranks (1-based) of `values`, with the tie-correction sum `sum(t^3 - t)`.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Rank-based H statistic with tie correction; p from the chi-square
/// distribution with `groups - 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalWallis> {
    if groups.len() < 2 {
        return Err(Error::Contract("Kruskal-Wallis needs at least two groups".into()));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::Contract("Kruskal-Wallis groups must be non-empty".into()));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    if pooled.iter().any(|v| v.is_nan()) {
        return Err(Error::Contract("Kruskal-Wallis samples must not contain NaN".into()));
    }
    let n = pooled.len() as f64;
    let df = groups.len() - 1;
    let (ranks, ties) = midranks(&pooled);
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        // every observation identical
        return Ok(KruskalWallis { h: 0.0, p: 1.0, df });
    }
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let rank_sum: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += rank_sum * rank_sum / g.len() as f64;
        offset += g.len();
    }
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Contract(e.to_string()))?;
    Ok(KruskalWallis { h, p: chi.sf(h), df })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn descriptive_examples() {
        let r = describe("s", "m", &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!((r.min, r.max, r.median, r.n), (1.0, 3.0, 2.0, 3));
        let r = describe("s", "m", &[4.0]).unwrap();
        assert_eq!((r.min, r.max, r.median), (4.0, 4.0, 4.0));
        assert!(describe("s", "m", &[]).is_none());
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), Some(2.5));
    }

    #[test]
    fn identical_groups() {
        let kw = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_abs_diff_eq!(kw.h, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kw.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn separated_groups() {
        // rank sums 6 and 15: H = 12/42 * (36/3 + 225/3) - 21 = 27/7
        let kw = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_abs_diff_eq!(kw.h, 27.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kw.p, 0.0495, epsilon = 1e-3);
        assert_eq!(kw.df, 1);
    }

    #[test]
    fn all_equal_is_not_an_error() {
        let kw = kruskal_wallis(&[vec![2.0, 2.0], vec![2.0]]).unwrap();
        assert_eq!((kw.h, kw.p), (0.0, 1.0));
    }

    #[test]
    fn tie_correction_applies() {
        // midranks 1.5, 1.5, 3 | 4.5, 4.5, 6: rank sums 6 and 15
        let kw = kruskal_wallis(&[vec![1.0, 1.0, 2.0], vec![3.0, 3.0, 4.0]]).unwrap();
        let raw = 12.0 / 42.0 * (36.0 / 3.0 + 225.0 / 3.0) - 21.0;
        let c = 1.0 - (6.0 + 6.0) / (216.0 - 6.0);
        assert_abs_diff_eq!(kw.h, raw / c, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(kruskal_wallis(&[vec![1.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![]]).is_err());
    }
}
