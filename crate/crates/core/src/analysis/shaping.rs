use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;

/// `F_t = gamma * phi[t+1] - phi[t]` for every consecutive pair.
pub fn shaping_rewards(potentials: &[f64], spec: &DiscountSpec) -> Vec<f64> {
    potentials
        .windows(2)
        .map(|w| spec.gamma() * w[1] - w[0])
        .collect()
}

/// Potentials read from a frozen value snapshot and the shaping rewards
/// they induce, scaled by `beta_shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapingTrace {
    pub potentials: Vec<f64>,
    pub rewards: Vec<f64>,
    pub beta_shape: f64,
}

impl ShapingTrace {
    /// `potentials` must end at an absorbing state (potential 0).
    pub fn new(potentials: Vec<f64>, spec: &DiscountSpec, beta_shape: f64) -> Result<Self> {
        if !(beta_shape >= 0.0) {
            return Err(Error::InvalidArgument("shaping strength must be non-negative".into()));
        }
        if potentials.last() != Some(&0.0) {
            return Err(Error::InvalidArgument("the terminal potential must be 0".into()));
        }
        let rewards = shaping_rewards(&potentials, spec)
            .into_iter()
            .map(|f| beta_shape * f)
            .collect();
        Ok(Self {
            potentials,
            rewards,
            beta_shape,
        })
    }
}

/// Telescoping identity for potential-based shaping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Telescoping {
    /// `sum_t gamma^t F_t`.
    pub lhs: f64,
    /// `-phi[0] + gamma^(T+1) phi[T+1]`.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates both sides of the telescoping identity over `potentials`
/// `phi[0] ..= phi[T+1]`. Fewer than two potentials give an empty sum.
pub fn telescoping_check(potentials: &[f64], spec: &DiscountSpec) -> Telescoping {
    if potentials.len() < 2 {
        return Telescoping {
            lhs: 0.0,
            rhs: 0.0,
            residual: 0.0,
        };
    }
    let g = spec.gamma();
    let mut lhs = 0.0;
    let mut disc = 1.0;
    for f in shaping_rewards(potentials, spec) {
        lhs += disc * f;
        disc *= g;
    }
    let rhs = -potentials[0] + disc * potentials[potentials.len() - 1];
    Telescoping {
        lhs,
        rhs,
        residual: lhs - rhs,
    }
}

/// `a_task + coefficient * a_len`.
pub fn combined_advantage(a_task: f64, a_len: f64, coefficient: f64) -> f64 {
    a_task + coefficient * a_len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_examples() {
        let s = DiscountSpec::new(0.5).unwrap();
        assert_eq!(shaping_rewards(&[0.0; 4], &s), vec![0.0; 3]);
        assert_eq!(shaping_rewards(&[-0.5, 0.0], &s), vec![0.5]);
        let sched = s.schedule_for_length(6).unwrap();
        for f in shaping_rewards(sched.values(), &s) {
            assert!((f - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn telescoping_boundaries() {
        let s = DiscountSpec::new(0.9).unwrap();
        let t = telescoping_check(&[-0.3, -0.7, -0.2, 0.0], &s);
        assert!((t.rhs + (-0.3)).abs() < 1e-15);
        assert!(t.residual.abs() < 1e-15);
        assert_eq!(telescoping_check(&[0.0; 5], &s).lhs, 0.0);
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(combined_advantage(0.3, 5.0, 0.0), 0.3);
        assert_eq!(combined_advantage(1.0, -0.5, 2.0), 0.0);
        assert_eq!(combined_advantage(1.0, -0.5, -2.0), 2.0);
    }

    #[test]
    fn trace_requires_terminal_zero() {
        let s = DiscountSpec::new(0.5).unwrap();
        assert!(ShapingTrace::new(vec![-0.5, -0.1], &s, 1.0).is_err());
        let t = ShapingTrace::new(vec![-0.5, 0.0], &s, 2.0).unwrap();
        assert_eq!(t.rewards, vec![1.0]);
    }
}
