use crate::error::{Error, Result};
use crate::horizon::DiscountSpec;

/// GAE(lambda) regression targets for one trajectory.
///
/// `values` holds `V(s_0) .. V(s_L)`; the last entry is treated as zero
/// whatever it contains. Returns targets for `t = 0 .. L-1`, i.e.
/// `V(s_t) + sum_i (gamma lambda)^i delta_{t+i}`, evaluated through the
/// equivalent lambda-return recursion
/// `target_t = r_t + gamma ((1 - lambda) V(s_{t+1}) + lambda target_{t+1})`
/// with `target_L = 0`. At `lambda = 1` this is the Monte Carlo return and at
/// `lambda = 0` the one-step TD target `r_t + gamma V(s_{t+1})`.
pub fn gae_targets(values: &[f64], spec: &DiscountSpec, lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "gae lambda must lie in [0, 1], got {lambda}"
        )));
    }
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "need values for at least s_0 and the terminal state".into(),
        ));
    }
    let len = values.len() - 1;
    let r = spec.per_step_reward(false);
    let g = spec.gamma();
    let mut targets = vec![0.0; len];
    let mut next_target = 0.0;
    for t in (0..len).rev() {
        let next_value = if t + 1 == len { 0.0 } else { values[t + 1] };
        let boot = if lambda == 1.0 {
            next_target
        } else if lambda == 0.0 {
            next_value
        } else {
            (1.0 - lambda) * next_value + lambda * next_target
        };
        let target = r + g * boot;
        targets[t] = target;
        next_target = target;
    }
    Ok(targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force `V_t + sum_i (gamma lambda)^i delta_{t+i}`.
    fn double_sum(values: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
        let len = values.len() - 1;
        let mut v = values.to_vec();
        v[len] = 0.0;
        let r = -(1.0 - gamma);
        let delta: Vec<f64> = (0..len).map(|t| r + gamma * v[t + 1] - v[t]).collect();
        (0..len)
            .map(|t| {
                v[t] + (t..len)
                    .map(|k| (gamma * lambda).powi((k - t) as i32) * delta[k])
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn half_lambda_matches_brute_force() {
        let spec = DiscountSpec::new(0.5).unwrap();
        let values = [-0.6, -0.4, 0.0];
        let got = gae_targets(&values, &spec, 0.5).unwrap();
        let want = double_sum(&values, 0.5, 0.5);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((got[0] + 0.725).abs() < 1e-15);
        assert!((got[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn lambda_one_is_monte_carlo() {
        let spec = DiscountSpec::new(0.5).unwrap();
        let got = gae_targets(&[-0.1, -0.9, -0.3, 0.0], &spec, 1.0).unwrap();
        let sched = spec.schedule_for_length(3).unwrap();
        for (a, b) in got.iter().zip(sched.targets()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn lambda_zero_is_one_step_td() {
        let spec = DiscountSpec::new(0.8).unwrap();
        let values = [-0.7, -0.45, -0.2, 0.0];
        let got = gae_targets(&values, &spec, 0.0).unwrap();
        for t in 0..3 {
            let next = if t == 2 { 0.0 } else { values[t + 1] };
            assert_eq!(got[t], spec.per_step_reward(false) + 0.8 * next);
        }
    }

    #[test]
    fn rejects_bad_lambda() {
        let spec = DiscountSpec::new(0.8).unwrap();
        assert!(gae_targets(&[-0.5, 0.0], &spec, 1.5).is_err());
        assert!(gae_targets(&[-0.5, 0.0], &spec, -0.1).is_err());
    }

    #[test]
    fn general_lambda_matches_brute_force() {
        let spec = DiscountSpec::new(0.9).unwrap();
        let values = [-0.8, -0.3, -0.65, -0.2, -0.05, 0.0];
        for lambda in [0.0, 0.3, 0.7, 0.95, 1.0] {
            let got = gae_targets(&values, &spec, lambda).unwrap();
            let want = double_sum(&values, 0.9, lambda);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-14, "lambda {lambda}");
            }
        }
    }
}
