use rayon::prelude::*;

use super::generator::MarkovGenerator;
use super::rollout::sample_rollout;
use crate::error::{Error, Result};
use crate::horizon::{DiscountSpec, ReturnSchedule, Trajectory};

/// Completed rollouts paired with their return schedules.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub pairs: Vec<(Trajectory, ReturnSchedule)>,
    /// Rollouts that hit the length cap; kept for reporting only.
    pub truncated: Vec<Trajectory>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.pairs.iter().map(|(t, _)| t)
    }

    /// Pairs every completed trajectory with its schedule, dropping truncated
    /// ones.
    pub fn from_trajectories(
        trajectories: impl IntoIterator<Item = Trajectory>,
        spec: &DiscountSpec,
    ) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut truncated = Vec::new();
        for t in trajectories {
            if t.truncated {
                truncated.push(t);
            } else {
                let sched = spec.schedule_for_trajectory(&t)?;
                pairs.push((t, sched));
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "all {} rollouts were truncated",
                truncated.len()
            )));
        }
        Ok(Self { pairs, truncated })
    }
}

/// Samples every rollout for `prompts` in a fixed order.
///
/// Rollout `i` (counting across prompts, prompt-major) uses seed `seed + i`,
/// so the result does not depend on how many threads run the sampling.
pub fn sample_rollouts(
    gen: &MarkovGenerator,
    prompts: &[String],
    rollouts_per_prompt: usize,
    seed: u64,
    max_len: usize,
) -> Result<Vec<Trajectory>> {
    if rollouts_per_prompt < 1 {
        return Err(Error::InvalidArgument(
            "rollouts_per_prompt must be at least 1".into(),
        ));
    }
    for p in prompts {
        gen.start_state(p)?;
    }
    let total = prompts.len() * rollouts_per_prompt;
    (0..total)
        .into_par_iter()
        .map(|i| {
            let prompt = &prompts[i / rollouts_per_prompt];
            sample_rollout(gen, prompt, seed.wrapping_add(i as u64), max_len)
        })
        .collect()
}

/// Samples rollouts and turns every completed one into a training pair.
pub fn build_dataset(
    gen: &MarkovGenerator,
    spec: &DiscountSpec,
    prompts: &[String],
    rollouts_per_prompt: usize,
    seed: u64,
    max_len: usize,
) -> Result<Dataset> {
    let trajs = sample_rollouts(gen, prompts, rollouts_per_prompt, seed, max_len)?;
    Dataset::from_trajectories(trajs, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::world::exact_value;

    fn prompts(g: &MarkovGenerator) -> Vec<String> {
        g.prompts().keys().cloned().collect()
    }

    #[test]
    fn deterministic_chain_gives_identical_schedules() {
        let g = fixtures::deterministic_chain(4);
        let spec = DiscountSpec::new(0.8).unwrap();
        let d = build_dataset(&g, &spec, &prompts(&g), 5, 0, 100).unwrap();
        assert_eq!(d.len(), 5);
        let first = d.pairs[0].1.clone();
        assert!(d.pairs.iter().all(|(_, s)| *s == first));
    }

    #[test]
    fn cardinality_bound_and_determinism() {
        let g = fixtures::ten_state();
        let spec = DiscountSpec::new(0.9).unwrap();
        let p = prompts(&g);
        assert_eq!(p.len(), 2);
        let a = build_dataset(&g, &spec, &p, 4, 9, 3).unwrap_or_else(|_| Dataset {
            pairs: vec![],
            truncated: vec![],
        });
        assert!(a.len() + a.truncated.len() <= 8);
        let x = build_dataset(&g, &spec, &p, 4, 9, 1000).unwrap();
        let y = build_dataset(&g, &spec, &p, 4, 9, 1000).unwrap();
        assert_eq!(x.len(), 8);
        assert_eq!(
            x.trajectories().collect::<Vec<_>>(),
            y.trajectories().collect::<Vec<_>>()
        );
    }

    #[test]
    fn all_truncated_is_an_error() {
        let g = fixtures::deterministic_chain(10);
        let spec = DiscountSpec::new(0.8).unwrap();
        assert!(matches!(
            build_dataset(&g, &spec, &prompts(&g), 3, 0, 5),
            Err(Error::EmptyDataset(_))
        ));
        assert!(build_dataset(&g, &spec, &prompts(&g), 0, 0, 5).is_err());
    }

    #[test]
    fn monte_carlo_return_matches_oracle() {
        let g = fixtures::ten_state();
        let spec = DiscountSpec::new(0.9).unwrap();
        let oracle = exact_value(&g, &spec).unwrap();
        let prompt = "a".to_string();
        let start = g.start_state(&prompt).unwrap();
        let n = 100_000;
        let d = build_dataset(&g, &spec, &[prompt], n, 1234, 100_000).unwrap();
        assert_eq!(d.len(), n);
        let g0: Vec<f64> = d.pairs.iter().map(|(_, s)| s.values()[0]).collect();
        let mean = g0.iter().sum::<f64>() / n as f64;
        let var = g0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - oracle.value[start]).abs() <= 3.0 * se,
            "mc {mean} oracle {} se {se}",
            oracle.value[start]
        );
    }
}
