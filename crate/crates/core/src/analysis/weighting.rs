use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;

/// Population minimisers of the two loss averagings at a state whose
/// completions have the given `(length, probability)` distribution:
/// `(E[G], E[G / L] / E[1 / L])`.
pub fn weighting_bias_demo(distribution: &[(usize, f64)], spec: &DiscountSpec) -> Result<(f64, f64)> {
    if distribution.is_empty() {
        return Err(Error::InvalidArgument("empty length distribution".into()));
    }
    let total: f64 = distribution.iter().map(|d| d.1).sum();
    if distribution.iter().any(|&(l, p)| l < 1 || !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "lengths must be >= 1 and probabilities must be non-negative and sum to 1".into(),
        ));
    }
    let mut token = 0.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(l, p) in distribution {
        let g = spec.return_target(l as u64);
        token += p * g;
        num += p * g / l as f64;
        den += p / l as f64;
    }
    Ok((token, num / den))
}
