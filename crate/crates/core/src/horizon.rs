//! Discounted-return targets for the remaining generation horizon.
//!
//! Every emitted token (the EOS emission included) carries the reward
//! `-(1 - gamma)`; the absorbing state reached after EOS carries none. The
//! return from a state with `n` emissions still to come is therefore
//! `-(1 - gamma^n)`, a bounded and strictly monotone transform of `n` that can
//! be inverted back into a length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discount factor together with the per-step reward it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DiscountSpec {
    gamma: f64,
    ln_gamma: f64,
}

impl DiscountSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(Self {
            gamma,
            ln_gamma: gamma.ln(),
        })
    }

    /// Picks gamma so that a horizon of `l99` tokens maps to a return of
    /// exactly -0.99, i.e. `1 - gamma^l99 = 0.99`.
    pub fn from_l99(l99: u64) -> Result<Self> {
        if l99 < 1 {
            return Err(Error::InvalidArgument(
                "l99 must be at least 1".to_string(),
            ));
        }
        Self::new((0.01f64.ln() / l99 as f64).exp())
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn ln_gamma(&self) -> f64 {
        self.ln_gamma
    }

    /// Reward for one decoding step: `-(1 - gamma)` for an emission, zero at
    /// the absorbing state.
    #[inline]
    pub fn per_step_reward(&self, terminal: bool) -> f64 {
        if terminal {
            0.0
        } else {
            -(1.0 - self.gamma)
        }
    }

    /// `-(1 - gamma^remaining)`, computed as `expm1(remaining * ln gamma)`.
    #[inline]
    pub fn return_target(&self, remaining: u64) -> f64 {
        self.return_for_horizon(remaining as f64)
    }

    /// Real-valued version of [`return_target`](Self::return_target).
    #[inline]
    pub fn return_for_horizon(&self, horizon: f64) -> f64 {
        // `+ 0.0` turns the -0.0 produced at horizon 0 into 0.
        (horizon * self.ln_gamma).exp_m1() + 0.0
    }

    /// Inverts a return back into a (real) remaining length,
    /// `ln(1 + g) / ln(gamma)`.
    pub fn invert_to_length(&self, g: f64) -> Result<f64> {
        if !(g > -1.0 && g <= 0.0) {
            return Err(Error::ReturnOutOfRange(g));
        }
        // ln_1p(-0.0) is -0.0; normalise so callers never see a negative zero.
        Ok((g.ln_1p() / self.ln_gamma).max(0.0))
    }

    /// Returns `G_t` for every step of a completed trajectory.
    pub fn schedule_for_trajectory(&self, traj: &Trajectory) -> Result<ReturnSchedule> {
        self.schedule_for_length(traj.length)
    }

    pub fn schedule_for_length(&self, length: usize) -> Result<ReturnSchedule> {
        if length < 1 {
            return Err(Error::InvalidArgument(
                "trajectory length must be at least 1".to_string(),
            ));
        }
        let values = (0..=length)
            .map(|t| self.return_target((length - t) as u64))
            .collect();
        Ok(ReturnSchedule { values })
    }
}

impl TryFrom<f64> for DiscountSpec {
    type Error = Error;

    fn try_from(gamma: f64) -> Result<Self> {
        Self::new(gamma)
    }
}

impl From<DiscountSpec> for f64 {
    fn from(spec: DiscountSpec) -> f64 {
        spec.gamma
    }
}

/// Returns `G_0 .. G_L` of one completed trajectory; `G_L = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSchedule {
    values: Vec<f64>,
}

impl ReturnSchedule {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Targets for the non-terminal states `s_0 .. s_{L-1}`.
    pub fn targets(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }

    pub fn length(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest `|G_t - (r_t + gamma * G_{t+1})|` over the schedule.
    pub fn max_bellman_residual(&self, spec: &DiscountSpec) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[0] - (spec.per_step_reward(false) + spec.gamma() * w[1])).abs())
            .fold(0.0, f64::max)
    }
}

/// One sampled completion.
///
/// `states[t]` is the decoding state after `t` emitted tokens and `tokens[t]`
/// is the token emitted from `states[t]`. For a completed trajectory the last
/// token is EOS, `states[length]` is absorbing, and
/// `tokens.len() == length`, `states.len() == length + 1`. A truncated
/// trajectory hit the length cap before emitting EOS; its `length` is the
/// number of tokens it did emit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub prompt_id: String,
    pub seed: u64,
    pub tokens: Vec<u32>,
    pub states: Vec<usize>,
    pub length: usize,
    pub truncated: bool,
}

impl Trajectory {
    /// The state reached at the end of the trajectory.
    pub fn final_state(&self) -> usize {
        *self.states.last().expect("trajectory has at least one state")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(g: f64) -> DiscountSpec {
        DiscountSpec::new(g).unwrap()
    }

    #[test]
    fn rejects_gamma_outside_open_interval() {
        for g in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(DiscountSpec::new(g).is_err(), "{g}");
        }
    }

    #[test]
    fn per_step_reward_values() {
        assert!((spec(0.9).per_step_reward(false) + 0.1).abs() < 1e-15);
        assert_eq!(spec(0.3).per_step_reward(true), 0.0);
        assert!((spec(0.997).per_step_reward(false) + 0.003).abs() < 1e-15);
    }

    #[test]
    fn return_target_small_cases() {
        let s = spec(0.5);
        assert_eq!(s.return_target(0), 0.0);
        // Direct discounted sum of per-step rewards.
        let direct = |n: u32| -> f64 { (0..n).map(|i| 0.5f64.powi(i as i32) * -0.5).sum() };
        assert!((s.return_target(1) - direct(1)).abs() < 1e-15);
        assert!((s.return_target(2) - direct(2)).abs() < 1e-15);
        assert!((s.return_target(2) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn schedule_examples() {
        let s = spec(0.5);
        let sched = s.schedule_for_length(3).unwrap();
        assert_eq!(sched.values(), &[-0.875, -0.75, -0.5, 0.0]);
        assert_eq!(s.schedule_for_length(1).unwrap().values(), &[-0.5, 0.0]);
        assert!(s.schedule_for_length(0).is_err());
        assert!(sched.max_bellman_residual(&s) == 0.0);
    }

    #[test]
    fn inversion_examples() {
        let s = spec(0.5);
        assert!((s.invert_to_length(-0.96875).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(s.invert_to_length(0.0).unwrap(), 0.0);
        let l = spec(0.997).invert_to_length(-0.5).unwrap();
        assert!((l - 0.5f64.ln() / 0.997f64.ln()).abs() < 1e-9);
        assert!((l - 230.70).abs() < 0.01);
        assert!(s.invert_to_length(-1.0).is_err());
        assert!(s.invert_to_length(0.1).is_err());
    }

    #[test]
    fn gamma_selection() {
        assert!((DiscountSpec::from_l99(1).unwrap().gamma() - 0.01).abs() < 1e-15);
        assert!((DiscountSpec::from_l99(2).unwrap().gamma() - 0.1).abs() < 1e-15);
        let s = DiscountSpec::from_l99(1000).unwrap();
        // Bisection on 1 - g^1000 = 0.99 as an independent route.
        let (mut lo, mut hi) = (0.9f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - mid.powi(1000) < 0.99 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((s.gamma() - lo).abs() < 1e-12);
        assert!((s.gamma() - 0.995405).abs() < 1e-6);
        assert!((1.0 - s.gamma().powi(1000) - 0.99).abs() <= 1e-12);
        assert!(DiscountSpec::from_l99(0).is_err());
    }

    #[test]
    fn round_trip_up_to_ten_thousand() {
        for g in [0.9998, 0.9995] {
            let s = spec(g);
            for n in 0..=10_000u64 {
                let l = s.invert_to_length(s.return_target(n)).unwrap();
                let err = if n == 0 { l } else { (l - n as f64).abs() / n as f64 };
                assert!(err <= 1e-9, "gamma={g} n={n} l={l}");
            }
        }
    }
}
