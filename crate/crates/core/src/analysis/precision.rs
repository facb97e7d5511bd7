use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;
use crate::value::sigmoid;

/// Effective precision levels of bfloat16, fp16 and fp32 mantissas.
pub const DEFAULT_K_VALUES: [f64; 3] = [128.0, 1024.0, 8_388_608.0];

/// `ln(1 + e^z)` without overflow or cancellation.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Local relative length resolution `-sigma(z)|z| / (k ln sigma(-z))`,
/// with `ln sigma(-z) = -softplus(z)`.
pub fn precision_proxy(z: f64, k: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    sigmoid(z) * z.abs() / (k * softplus(z))
}

/// Logit whose sigmoid is the horizon cost `1 - gamma^l`:
/// `ln((1 - gamma^l) / gamma^l)`.
pub fn logit_for_horizon(spec: &DiscountSpec, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {l}")));
    }
    let a = l * spec.ln_gamma();
    Ok((-a.exp_m1()).ln() - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPoint {
    pub l: f64,
    pub z: f64,
    pub f: f64,
}

/// Resolution proxy along a horizon grid at one precision level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCurve {
    pub k: f64,
    pub points: Vec<PrecisionPoint>,
}

pub fn precision_curve(spec: &DiscountSpec, k_values: &[f64], horizons: &[f64]) -> Result<Vec<PrecisionCurve>> {
    if k_values.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::InvalidArgument("precision levels must be positive".into()));
    }
    let zs = horizons
        .iter()
        .map(|&l| logit_for_horizon(spec, l).map(|z| (l, z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(k_values
        .iter()
        .map(|&k| PrecisionCurve {
            k,
            points: zs
                .iter()
                .map(|&(l, z)| PrecisionPoint {
                    l,
                    z,
                    f: precision_proxy(z, k),
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proxy_examples() {
        assert_eq!(precision_proxy(0.0, 128.0), 0.0);
        let f = precision_proxy(30.0, 128.0) * 128.0;
        assert!((f - 1.0).abs() <= 0.01);
        let want = sigmoid(2.0) * 2.0 / (1024.0 * (1.0 + 2f64.exp()).ln());
        assert!((precision_proxy(2.0, 1024.0) - want).abs() < 1e-18);
        assert!((precision_proxy(2.0, 1024.0) - 8.09e-4).abs() < 1e-6);
    }

    #[test]
    fn logit_examples() {
        let s = DiscountSpec::new(0.5).unwrap();
        assert!(logit_for_horizon(&s, 1.0).unwrap().abs() < 1e-15);
        assert!((logit_for_horizon(&s, 3.0).unwrap() - 7f64.ln()).abs() < 1e-14);
        assert!(logit_for_horizon(&s, 0.0).is_err());
        let s = DiscountSpec::new(0.997).unwrap();
        let l = 0.5f64.ln() / 0.997f64.ln();
        assert!(logit_for_horizon(&s, l).unwrap().abs() < 1e-12);
    }

    #[test]
    fn curves_scale_with_precision() {
        let s = DiscountSpec::new(0.997).unwrap();
        let curves = precision_curve(&s, &DEFAULT_K_VALUES, &[1.0, 10.0, 100.0, 10_000.0]).unwrap();
        for w in curves.windows(2) {
            for (a, b) in w[0].points.iter().zip(&w[1].points) {
                assert!(a.f >= b.f);
            }
        }
        for c in &curves {
            assert!((c.points[3].f * c.k - 1.0).abs() <= 0.01);
        }
    }
}
