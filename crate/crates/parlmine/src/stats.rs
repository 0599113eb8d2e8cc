//! The two hypothesis tests used for cross-parliament comparison:
//! Pearson correlation with significance against Student's t, and the
//! Mann-Whitney U test with midranks, tie-corrected variance, and
//! continuity correction. Both are two-sided.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

use crate::metrics::YearlySeries;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    /// True exactly when `p_value` < 0.05.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MannWhitneyResult {
    /// U statistic of the first sample.
    pub u_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("both samples must be nonempty")]
    EmptySample,
    #[error("year ranges overlap in only {found} point(s), need at least 3")]
    InsufficientOverlap { found: usize },
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Sample Pearson coefficient with a two-sided p-value from Student's t
/// with n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::DegenerateInput("need at least 3 observations"));
    }
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::DegenerateInput("constant series"));
    }

    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);

    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    let p_value = if denom <= 0.0 {
        // |r| = 1: the t statistic diverges
        f64::MIN_POSITIVE
    } else {
        let t = r * (df / denom).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        // symmetric distribution: evaluate in the lower tail for accuracy
        (2.0 * dist.cdf(-t.abs())).clamp(f64::MIN_POSITIVE, 1.0)
    };

    Ok(CorrelationResult {
        r,
        p_value,
        n,
        significant: p_value < SIGNIFICANCE_LEVEL,
    })
}

/// Midranks of the concatenation of both samples, plus the tie
/// correction term sum(t^3 - t) over tie groups.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let n = a.len() + b.len();
    let mut order: Vec<usize> = (0..n).collect();
    let value = |i: usize| if i < a.len() { a[i] } else { b[i - a.len()] };
    order.sort_by(|&i, &j| value(i).total_cmp(&value(j)));

    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && value(order[end]) == value(order[start]) {
            end += 1;
        }
        let tied = (end - start) as f64;
        // ranks are 1-based; tied values share the average rank
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        tie_term += tied * tied * tied - tied;
        start = end;
    }
    (ranks, tie_term)
}

/// Two-sided Mann-Whitney U test via the normal approximation with
/// tie-corrected variance and continuity correction. The reported U is
/// the first sample's.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitneyResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n1 = a.len();
    let n2 = b.len();
    let n = n1 + n2;

    let (ranks, tie_term) = midranks(a, b);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;

    let mean = (n1 * n2) as f64 / 2.0;
    let variance =
        (n1 * n2) as f64 / 12.0 * ((n + 1) as f64 - tie_term / (n as f64 * (n - 1) as f64));

    let p_value = if variance <= 0.0 {
        // every observation tied
        1.0
    } else {
        let diff = u - mean;
        // continuity correction pulls the statistic half a unit toward
        // the mean; signum would mis-handle diff == 0
        let corrected = if diff > 0.0 {
            diff - 0.5
        } else if diff < 0.0 {
            diff + 0.5
        } else {
            0.0
        };
        let z = corrected / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (2.0 * normal.cdf(-z.abs())).min(1.0)
    };

    Ok(MannWhitneyResult {
        u_statistic: u,
        p_value,
        n1,
        n2,
    })
}

/// Pairs two yearly series on their common years (ascending) and
/// correlates the paired values.
pub fn correlate_series(
    s1: &YearlySeries,
    s2: &YearlySeries,
) -> Result<CorrelationResult, StatsError> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (year, v1) in &s1.points {
        if let Some(v2) = s2.points.get(year) {
            x.push(*v1);
            y.push(*v2);
        }
    }
    if x.len() < 3 {
        return Err(StatsError::InsufficientOverlap { found: x.len() });
    }
    pearson(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn series(points: &[(i32, f64)]) -> YearlySeries {
        YearlySeries {
            metric_name: "test".into(),
            points: points.iter().copied().collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn pearson_perfect_affine_is_one() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let result = pearson(&x, &y).unwrap();
        assert!((result.r - 1.0).abs() < 1e-12);
        assert!(result.significant);
    }

    #[test]
    fn pearson_negation_flips_sign() {
        let x = [1.0, 2.0, 4.0, 8.0, 9.0];
        let y = [3.0, 1.0, 4.0, 1.0, 5.0];
        let pos = pearson(&x, &y).unwrap();
        let neg_y: Vec<f64> = y.iter().map(|v| -v).collect();
        let neg = pearson(&x, &neg_y).unwrap();
        assert!((pos.r + neg.r).abs() < 1e-12);
        assert!((pos.p_value - neg.p_value).abs() < 1e-12);
    }

    #[test]
    fn pearson_is_symmetric_in_its_arguments() {
        let x = [1.0, 2.0, 4.0, 8.0, 9.0];
        let y = [3.0, 1.0, 4.0, 1.0, 5.0];
        let xy = pearson(&x, &y).unwrap();
        let yx = pearson(&y, &x).unwrap();
        assert_eq!(xy.r, yx.r);
        assert_eq!(xy.p_value, yx.p_value);
    }

    // Expected values computed independently with scipy.stats.pearsonr.
    #[test]
    fn pearson_matches_reference_values() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let result = pearson(&x, &y).unwrap();
        assert!((result.r - 0.8).abs() < 1e-12);
        assert!((result.p_value - 0.10408803866182799).abs() < 1e-10);
        assert!(!result.significant);

        let x2 = [10.0, 12.5, 11.0, 14.0, 9.5, 13.0, 15.5];
        let y2 = [200.0, 180.0, 190.0, 140.0, 210.0, 160.0, 120.0];
        let result2 = pearson(&x2, &y2).unwrap();
        assert!((result2.r - (-0.983112052951151)).abs() < 1e-12);
        assert!((result2.p_value - 7.054325755112048e-05).abs() < 1e-12);
        assert!(result2.significant);
    }

    #[test]
    fn pearson_reference_fifteen_points() {
        let x: Vec<f64> = (2006..=2020).map(f64::from).collect();
        let y = [
            3.1, 2.9, 3.4, 3.3, 3.8, 3.6, 3.5, 4.0, 3.9, 4.2, 4.1, 4.5, 4.4, 4.8, 4.6,
        ];
        let result = pearson(&x, &y).unwrap();
        assert!((result.r - 0.9582376062325695).abs() < 1e-12);
        assert!((result.p_value - 1.926792826331608e-08).abs() < 1e-14);
    }

    #[test]
    fn pearson_rejects_bad_input() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::LengthMismatch { left: 2, right: 3 })
        );
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::DegenerateInput(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::DegenerateInput(_))
        ));
    }

    #[test]
    fn mann_whitney_identical_samples() {
        let a = [1.0, 2.0, 3.0];
        let result = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(result.u_statistic, 4.5);
        assert!(result.p_value >= 0.9);
    }

    #[test]
    fn mann_whitney_complete_separation_gives_zero_u() {
        let result = mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(result.u_statistic, 0.0);
    }

    // Expected values computed independently with scipy.stats.mannwhitneyu
    // (two-sided, asymptotic, continuity correction).
    #[test]
    fn mann_whitney_matches_reference_values() {
        let result =
            mann_whitney_u(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]).unwrap();
        assert_eq!(result.u_statistic, 0.0);
        assert!((result.p_value - 0.012185780355344813).abs() < 1e-9);

        let ties = mann_whitney_u(
            &[1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 10.0],
            &[2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0, 5.0],
        )
        .unwrap();
        assert_eq!(ties.u_statistic, 15.0);
        assert!((ties.p_value - 0.13739265649150958).abs() < 1e-9);

        let mixed = mann_whitney_u(
            &[12.0, 7.0, 22.0, 13.0, 11.0, 16.0, 9.0, 14.0],
            &[8.0, 15.0, 6.0, 10.0, 5.0, 11.0],
        )
        .unwrap();
        assert_eq!(mixed.u_statistic, 36.5);
        assert!((mixed.p_value - 0.12092599556198418).abs() < 1e-9);
    }

    #[test]
    fn mann_whitney_u_sums_to_product() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let b = [2.0, 6.0, 5.0, 3.0];
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        assert_eq!(ab.u_statistic + ba.u_statistic, (a.len() * b.len()) as f64);
        assert!((ab.p_value - ba.p_value).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_all_tied_has_p_one() {
        let result = mann_whitney_u(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(result.p_value, 1.0);
    }

    #[test]
    fn mann_whitney_rejects_empty_sample() {
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(StatsError::EmptySample));
        assert_eq!(mann_whitney_u(&[1.0], &[]), Err(StatsError::EmptySample));
    }

    #[test]
    fn correlate_series_pairs_on_year_intersection() {
        let s1 = series(&[(2000, 1.0), (2001, 2.0), (2002, 3.0), (2003, 4.0)]);
        let s2 = series(&[(2001, 4.0), (2002, 6.0), (2003, 8.0), (2004, 1.0)]);
        let result = correlate_series(&s1, &s2).unwrap();
        assert_eq!(result.n, 3);
        assert!((result.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlate_series_identical_input_is_perfect() {
        let s = series(&[(2000, 1.0), (2001, 5.0), (2002, 3.0)]);
        let result = correlate_series(&s, &s).unwrap();
        assert!((result.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlate_series_rejects_disjoint_years() {
        let s1 = series(&[(2000, 1.0), (2001, 2.0), (2002, 3.0)]);
        let s2 = series(&[(2010, 1.0), (2011, 2.0), (2012, 3.0)]);
        assert_eq!(
            correlate_series(&s1, &s2),
            Err(StatsError::InsufficientOverlap { found: 0 })
        );
    }
}
