use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ground_truth_horizon, mre};
use crate::error::Result;
use crate::horizon::DiscountSpec;
use crate::value::StateValue;
use crate::world::{sample_rollout, MarkovGenerator};

/// Completions sampled per prompt to estimate the ground-truth horizon.
pub const GROUND_TRUTH_SAMPLES: usize = 64;

/// Remaining length predicted at the prompt boundary, before any token is
/// emitted.
pub fn predict_boundary_length(
    scorer: &impl StateValue,
    gen: &MarkovGenerator,
    prompt_id: &str,
    spec: &DiscountSpec,
) -> Result<f64> {
    let start = gen.start_state(prompt_id)?;
    spec.invert_to_length(scorer.state_value(start, 0)?)
}

/// Boundary prediction against the sampled ground truth for one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPrediction {
    pub prompt_id: String,
    pub predicted: f64,
    pub ground_truth: f64,
    pub mean_length: f64,
}

/// Predicts every prompt's length and compares it with the return-consistent
/// horizon of `samples` base-policy completions (seed `seed + i`,
/// prompt-major). Truncated completions are skipped. Returns the rows and
/// their mean relative error.
pub fn evaluate_boundary_predictions<S: StateValue + Sync>(
    scorer: &S,
    gen: &MarkovGenerator,
    prompts: &[String],
    spec: &DiscountSpec,
    samples: usize,
    seed: u64,
    max_len: usize,
) -> Result<(Vec<BoundaryPrediction>, f64)> {
    let rows = prompts
        .par_iter()
        .enumerate()
        .map(|(pi, p)| {
            let base = seed.wrapping_add((pi * samples) as u64);
            let lengths = (0..samples)
                .map(|i| sample_rollout(gen, p, base.wrapping_add(i as u64), max_len))
                .filter_map(|r| r.map(|t| (!t.truncated).then_some(t.length)).transpose())
                .collect::<Result<Vec<usize>>>()?;
            Ok(BoundaryPrediction {
                prompt_id: p.clone(),
                predicted: predict_boundary_length(scorer, gen, p, spec)?,
                ground_truth: ground_truth_horizon(&lengths, spec)?,
                mean_length: lengths.iter().sum::<usize>() as f64 / lengths.len() as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (pred, gt): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.predicted, r.ground_truth)).unzip();
    let err = mre(&pred, &gt)?;
    Ok((rows, err))
}
