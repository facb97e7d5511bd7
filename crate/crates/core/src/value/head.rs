use rand::Rng;

use crate::error::{Error, Result};
use crate::world::rng_for;

/// Hidden width used when none is configured.
pub const DEFAULT_HIDDEN: usize = 64;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

#[inline]
fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s + x * s * (1.0 - s)
}

/// Largest representable value strictly below zero that the head reports
/// near `z -> -inf`, and the matching bound near -1.
const UPPER: f64 = -f64::MIN_POSITIVE;
const LOWER: f64 = -(1.0 - f64::EPSILON / 2.0);

/// Two-layer MLP value head: `z = w2 . silu(W1 f + b1) + b2`, `V = -sigmoid(z)`.
///
/// Parameters live in one flat buffer laid out as `[W1 (row-major, hidden x
/// input) | b1 | w2 | b2]`, which is also the layout of [`Gradients`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHead {
    input_dim: usize,
    hidden: usize,
    params: Vec<f64>,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Forward {
    pub pre: Vec<f64>,
    pub act: Vec<f64>,
    pub z: f64,
}

impl ValueHead {
    /// Uniform initialisation in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Self {
        assert!(input_dim > 0 && hidden > 0, "dimensions must be positive");
        let mut rng = rng_for(seed);
        let n = Self::param_count(input_dim, hidden);
        let mut params = vec![0.0; n];
        let a1 = 1.0 / (input_dim as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        let w1_end = hidden * input_dim;
        let b1_end = w1_end + hidden;
        for (i, p) in params.iter_mut().enumerate() {
            let a = if i < b1_end { a1 } else { a2 };
            *p = rng.gen_range(-a..=a);
        }
        Self {
            input_dim,
            hidden,
            params,
        }
    }

    /// Builds a head from an explicit parameter buffer.
    pub fn from_params(input_dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(input_dim, hidden);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self {
            input_dim,
            hidden,
            params,
        })
    }

    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        hidden * input_dim + 2 * hidden + 1
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[..self.hidden * self.input_dim]
    }

    pub fn b1(&self) -> &[f64] {
        let start = self.hidden * self.input_dim;
        &self.params[start..start + self.hidden]
    }

    pub fn w2(&self) -> &[f64] {
        let start = self.hidden * self.input_dim + self.hidden;
        &self.params[start..start + self.hidden]
    }

    pub fn b2(&self) -> f64 {
        *self.params.last().expect("non-empty parameters")
    }

    pub fn set_b2(&mut self, b2: f64) {
        *self.params.last_mut().expect("non-empty parameters") = b2;
    }

    fn check_dim(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: features.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn forward(&self, features: &[f64]) -> Forward {
        let (w1, b1, w2) = (self.w1(), self.b1(), self.w2());
        let mut pre = Vec::with_capacity(self.hidden);
        let mut act = Vec::with_capacity(self.hidden);
        let mut z = self.b2();
        for j in 0..self.hidden {
            let row = &w1[j * self.input_dim..(j + 1) * self.input_dim];
            let a = b1[j]
                + row
                    .iter()
                    .zip(features)
                    .filter(|(_, &f)| f != 0.0)
                    .map(|(w, f)| w * f)
                    .sum::<f64>();
            let h = silu(a);
            z += w2[j] * h;
            pre.push(a);
            act.push(h);
        }
        Forward { pre, act, z }
    }

    /// The pre-sigmoid logit `z`.
    pub fn logit(&self, features: &[f64]) -> Result<f64> {
        self.check_dim(features)?;
        Ok(self.forward(features).z)
    }

    /// The predicted value, strictly inside `(-1, 0)`.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        self.check_dim(features)?;
        Ok(value_from_logit(self.forward(features).z))
    }

    /// Adds `dloss_dv * dV/dtheta` for one input into `grad`.
    pub(crate) fn accumulate(&self, features: &[f64], fwd: &Forward, dloss_dv: f64, grad: &mut [f64]) {
        let s = sigmoid(fwd.z);
        let dz = dloss_dv * -(s * (1.0 - s));
        let d = self.input_dim;
        let h = self.hidden;
        let w2 = self.w2();
        let (gw1, rest) = grad.split_at_mut(h * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        gb2[0] += dz;
        for j in 0..h {
            gw2[j] += dz * fwd.act[j];
            let da = dz * w2[j] * silu_grad(fwd.pre[j]);
            gb1[j] += da;
            if da != 0.0 {
                let row = &mut gw1[j * d..(j + 1) * d];
                for (g, &f) in row.iter_mut().zip(features) {
                    if f != 0.0 {
                        *g += da * f;
                    }
                }
            }
        }
    }
}

/// `-sigmoid(z)`, saturating at the nearest representable values inside
/// `(-1, 0)`.
#[inline]
pub fn value_from_logit(z: f64) -> f64 {
    (-sigmoid(z)).clamp(LOWER, UPPER)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logit_gives_minus_half() {
        let mut head = ValueHead::init(3, 4, 1);
        head.params_mut().iter_mut().for_each(|p| *p = 0.0);
        assert_eq!(head.predict(&[1.0, 0.0, 0.0]).unwrap(), -0.5);
    }

    #[test]
    fn saturates_without_reaching_bounds() {
        let mut head = ValueHead::init(2, 3, 1);
        head.set_b2(1e6);
        let v = head.predict(&[0.3, -0.2]).unwrap();
        assert!(v > -1.0 && v < -0.999_999);
        head.set_b2(-1e6);
        let v = head.predict(&[0.3, -0.2]).unwrap();
        assert!(v < 0.0 && v > -1e-300);
    }

    #[test]
    fn dimension_mismatch() {
        let head = ValueHead::init(2, 3, 1);
        assert!(matches!(
            head.predict(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = ValueHead::init(16, 8, 7);
        let b = ValueHead::init(16, 8, 7);
        assert_eq!(a, b);
        let bound = 1.0 / 4.0;
        assert!(a.w1().iter().chain(a.b1()).all(|w| w.abs() <= bound));
        assert_ne!(a, ValueHead::init(16, 8, 8));
    }

    #[test]
    fn from_params_checks_length() {
        assert!(ValueHead::from_params(2, 2, vec![0.0; 3]).is_err());
        assert!(ValueHead::from_params(2, 2, vec![0.0; 9]).is_ok());
    }
}
