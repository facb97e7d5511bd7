use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;

/// Penalty rate for under-generation.
pub const K1: f64 = 5.0;
/// Penalty rate for over-generation.
pub const K2: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    EqualTo,
    AtMost,
    AtLeast,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::EqualTo => "equal_to",
            ConstraintKind::AtMost => "at_most",
            ConstraintKind::AtLeast => "at_least",
        }
    }
}

/// Aggregate metrics for one experiment; fields that do not apply are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ld: f64,
    pub ls: f64,
    pub mre: f64,
    pub jensen_gap: f64,
}

/// Signed relative deviation; positive means over-generation.
pub fn length_deviation(observed: usize, target: usize) -> Result<f64> {
    if target < 1 {
        return Err(Error::InvalidArgument("length target must be at least 1".into()));
    }
    Ok((observed as f64 - target as f64) / target as f64)
}

/// Piecewise exponential score in `[0, 100]`.
pub fn length_score(ld: f64, kind: ConstraintKind) -> f64 {
    let under = ld < 0.0 && matches!(kind, ConstraintKind::EqualTo | ConstraintKind::AtLeast);
    let over = ld > 0.0 && matches!(kind, ConstraintKind::EqualTo | ConstraintKind::AtMost);
    if under {
        100.0 * (K1 * ld).exp()
    } else if over {
        100.0 * (-K2 * ld).exp()
    } else {
        100.0
    }
}

/// Horizon whose return equals the mean return of `lengths`:
/// `ln(1 - mean(1 - gamma^L)) / ln gamma`.
pub fn ground_truth_horizon(lengths: &[usize], spec: &DiscountSpec) -> Result<f64> {
    if lengths.is_empty() {
        return Err(Error::EmptyDataset("no lengths".into()));
    }
    if lengths.contains(&0) {
        return Err(Error::InvalidArgument("lengths must be at least 1".into()));
    }
    // Factor out gamma^min(L): constant inputs then give exactly min(L), and
    // long lengths cannot underflow.
    let l_min = *lengths.iter().min().expect("non-empty");
    let mean_pow = lengths
        .iter()
        .map(|&l| ((l - l_min) as f64 * spec.ln_gamma()).exp())
        .sum::<f64>()
        / lengths.len() as f64;
    Ok(l_min as f64 + mean_pow.ln() / spec.ln_gamma() + 0.0)
}

/// Mean relative error of predicted horizons.
pub fn mre(predicted: &[f64], ground_truth: &[f64]) -> Result<f64> {
    if predicted.len() != ground_truth.len() || predicted.is_empty() {
        return Err(Error::InvalidArgument("mre needs aligned non-empty lists".into()));
    }
    let mut total = 0.0;
    for (p, g) in predicted.iter().zip(ground_truth) {
        if !(*g > 0.0) {
            return Err(Error::InvalidArgument(format!("ground truth must be positive, got {g}")));
        }
        total += (p - g).abs() / g;
    }
    Ok(total / predicted.len() as f64)
}

/// `mean(L) - ground_truth_horizon(L)`, non-negative by Jensen's inequality.
pub fn jensen_gap(lengths: &[usize], spec: &DiscountSpec) -> Result<f64> {
    let l_gt = ground_truth_horizon(lengths, spec)?;
    let mean = lengths.iter().map(|&l| l as f64).sum::<f64>() / lengths.len() as f64;
    Ok(mean - l_gt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_examples() {
        assert_eq!(length_deviation(512, 512).unwrap(), 0.0);
        assert_eq!(length_deviation(768, 512).unwrap(), 0.5);
        assert_eq!(length_deviation(256, 512).unwrap(), -0.5);
        assert!(length_deviation(1, 0).is_err());
    }

    #[test]
    fn score_branches() {
        for k in [ConstraintKind::EqualTo, ConstraintKind::AtMost, ConstraintKind::AtLeast] {
            assert_eq!(length_score(0.0, k), 100.0);
        }
        assert!((length_score(-0.2, ConstraintKind::EqualTo) - 36.788).abs() < 1e-3);
        assert_eq!(length_score(-0.3, ConstraintKind::AtMost), 100.0);
        assert_eq!(length_score(0.3, ConstraintKind::AtLeast), 100.0);
        assert!((length_score(0.5, ConstraintKind::AtMost) - 100.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!(length_score(-40.0, ConstraintKind::EqualTo) >= 0.0);
    }

    #[test]
    fn horizon_examples() {
        let s = DiscountSpec::new(0.5).unwrap();
        let l = ground_truth_horizon(&[1, 3], &s).unwrap();
        assert!((l - 0.3125f64.ln() / 0.5f64.ln()).abs() < 1e-12);
        assert!((l - 1.678).abs() < 1e-3);
        assert!((ground_truth_horizon(&[7], &s).unwrap() - 7.0).abs() < 1e-12);
        assert!((jensen_gap(&[1, 3], &s).unwrap() - 0.322).abs() < 1e-3);
        assert!(ground_truth_horizon(&[], &s).is_err());
    }

    #[test]
    fn mre_examples() {
        assert_eq!(mre(&[5.0, 6.0], &[5.0, 6.0]).unwrap(), 0.0);
        assert!((mre(&[90.0], &[100.0]).unwrap() - 0.1).abs() < 1e-15);
        assert!((mre(&[110.0, 80.0], &[100.0, 100.0]).unwrap() - 0.15).abs() < 1e-15);
        assert!(mre(&[1.0], &[0.0]).is_err());
    }
}
