use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::{decode_many, ControlRule, Truncation};
use crate::error::{Error, Result};
use crate::horizon::{DiscountSpec, Trajectory};
use crate::value::StateValue;
use crate::world::{sample_rollout, MarkovGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierMethod {
    Tilt,
    HardBudget,
}

impl FrontierMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontierMethod::Tilt => "tilt",
            FrontierMethod::HardBudget => "hard_budget",
        }
    }
}

/// One point of the pass-rate versus length trade-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub method: FrontierMethod,
    /// Tilt strength (0 for budget points).
    pub beta: f64,
    pub budget: Option<usize>,
    pub pass_rate: f64,
    pub avg_truncated_length: f64,
}

/// Sweep settings. `max_len` caps every decode; budgets above it are
/// non-binding.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierConfig {
    pub betas: Vec<f64>,
    pub budgets: Vec<usize>,
    pub rollouts_per_prompt: usize,
    pub seed: u64,
    pub max_len: usize,
    pub truncation: Truncation,
}

fn passed(gen: &MarkovGenerator, t: &Trajectory) -> bool {
    !t.truncated && gen.is_success(t.final_state())
}

/// Tilted decoding at each beta against a hard token budget on the base
/// policy.
///
/// Budget points reuse one set of base rollouts (seed `seed + i`,
/// prompt-major), each cut at `B`: a completion passes iff it finishes
/// within `B` tokens in a success state, and contributes `min(L, B)` to the
/// average length. Pass rate is therefore non-decreasing in `B`. Tilt
/// points use the same seeds. Points come back sorted by method, then beta
/// (descending) or budget (ascending).
pub fn frontier_sweep<S: StateValue + Sync>(
    gen: &MarkovGenerator,
    scorer: &S,
    spec: &DiscountSpec,
    prompts: &[String],
    config: &FrontierConfig,
) -> Result<Vec<FrontierPoint>> {
    if config.rollouts_per_prompt < 1 || prompts.is_empty() {
        return Err(Error::InvalidArgument("frontier needs at least one prompt and rollout".into()));
    }
    let mut betas = config.betas.clone();
    betas.sort_by(|a, b| b.total_cmp(a));
    betas.dedup();
    let mut budgets = config.budgets.clone();
    budgets.sort_unstable();
    budgets.dedup();
    if budgets.contains(&0) {
        return Err(Error::InvalidArgument("budgets must be at least 1".into()));
    }

    let mut points = Vec::with_capacity(betas.len() + budgets.len());
    for &beta in &betas {
        let runs = decode_many(
            gen,
            scorer,
            ControlRule::Tilt { beta },
            spec,
            &config.truncation,
            prompts,
            config.rollouts_per_prompt,
            config.seed,
            config.max_len,
        )?;
        let n = runs.len() as f64;
        points.push(FrontierPoint {
            method: FrontierMethod::Tilt,
            beta,
            budget: None,
            pass_rate: runs.iter().filter(|r| passed(gen, &r.trajectory)).count() as f64 / n,
            avg_truncated_length: runs.iter().map(|r| r.trajectory.length as f64).sum::<f64>() / n,
        });
    }

    if !budgets.is_empty() {
        let jobs: Vec<(&str, u64)> = prompts
            .iter()
            .flat_map(|p| std::iter::repeat(p.as_str()).take(config.rollouts_per_prompt))
            .enumerate()
            .map(|(i, p)| (p, config.seed.wrapping_add(i as u64)))
            .collect();
        let base: Vec<Trajectory> = jobs
            .par_iter()
            .map(|&(p, s)| sample_rollout(gen, p, s, config.max_len))
            .collect::<Result<_>>()?;
        let n = base.len() as f64;
        for &b in &budgets {
            let pass = base.iter().filter(|t| passed(gen, t) && t.length <= b).count();
            let len: f64 = base.iter().map(|t| t.length.min(b) as f64).sum();
            points.push(FrontierPoint {
                method: FrontierMethod::HardBudget,
                beta: 0.0,
                budget: Some(b),
                pass_rate: pass as f64 / n,
                avg_truncated_length: len / n,
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::world::exact_value;

    #[test]
    fn budget_pass_rate_is_monotone_and_saturates() {
        let g = fixtures::two_path();
        let spec = DiscountSpec::new(0.95).unwrap();
        let oracle = exact_value(&g, &spec).unwrap();
        let cfg = FrontierConfig {
            betas: vec![0.0],
            budgets: vec![400, 5, 20, 10, 40],
            rollouts_per_prompt: 500,
            seed: 7,
            max_len: 400,
            truncation: Truncation::none(),
        };
        let pts = frontier_sweep(&g, &oracle, &spec, &["q".to_string()], &cfg).unwrap();
        let budget: Vec<&FrontierPoint> = pts.iter().filter(|p| p.method == FrontierMethod::HardBudget).collect();
        assert_eq!(budget.len(), 5);
        for w in budget.windows(2) {
            assert!(w[0].budget < w[1].budget);
            assert!(w[0].pass_rate <= w[1].pass_rate);
        }
        // beta = 0 tilt and a non-binding budget see the same completions.
        let tilt0 = pts[0];
        let full = budget.last().unwrap();
        assert_eq!(tilt0.method, FrontierMethod::Tilt);
        assert!((tilt0.pass_rate - full.pass_rate).abs() < 0.08);
    }
}
