use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generator::MarkovGenerator;
use crate::error::{Error, Result};
use crate::horizon::Trajectory;

/// Seeded RNG used for every sampling path in the crate.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws an index from `weights` (non-negative, not necessarily normalised)
/// by inverse CDF over the given order. Falls back to the last positive entry
/// when rounding leaves the uniform draw above the cumulative total.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Samples one completion from the base policy.
///
/// At most `max_len` tokens are emitted. If EOS has not been emitted by then
/// the trajectory is returned with `truncated = true`.
pub fn sample_rollout(
    gen: &MarkovGenerator,
    prompt_id: &str,
    seed: u64,
    max_len: usize,
) -> Result<Trajectory> {
    if max_len < 1 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    let start = gen.start_state(prompt_id)?;
    let mut rng = rng_for(seed);
    let mut state = start;
    let mut states = vec![start];
    let mut tokens = Vec::new();
    while !gen.is_terminal(state) && tokens.len() < max_len {
        let row = gen.next_distribution(state)?;
        let tok = sample_index(&mut rng, row) as u32;
        state = gen.successor(state, tok).expect("validated transition");
        tokens.push(tok);
        states.push(state);
    }
    Ok(Trajectory {
        prompt_id: prompt_id.to_string(),
        seed,
        length: tokens.len(),
        truncated: !gen.is_terminal(state),
        tokens,
        states,
    })
}
