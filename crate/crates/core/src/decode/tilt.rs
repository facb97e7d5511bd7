use super::candidates::CandidateSet;
use crate::error::{Error, Result};

/// Gibbs reweighting `p'(x) ∝ p(x) exp(beta * score(x))`, computed in log
/// space with a max shift. Entries with zero base mass stay at zero.
pub fn tilt(base: &[f64], scores: &[f64], beta: f64) -> Result<Vec<f64>> {
    if base.len() != scores.len() || base.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "tilt needs matching non-empty inputs, got {} probabilities and {} scores",
            base.len(),
            scores.len()
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    if beta == 0.0 {
        let total: f64 = base.iter().sum();
        return Ok(base.iter().map(|p| p / total).collect());
    }
    let logits: Vec<f64> = base
        .iter()
        .zip(scores)
        .map(|(&p, &s)| if p > 0.0 { p.ln() + beta * s } else { f64::NEG_INFINITY })
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument("base distribution has no mass".into()));
    }
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// `p'(x) ∝ p(x) exp(beta * v̂(x))` over a candidate set.
pub fn tilt_distribution(candidates: &CandidateSet, beta: f64) -> Result<Vec<f64>> {
    if beta > 0.0 {
        return Err(Error::InvalidArgument(format!("beta must be <= 0, got {beta}")));
    }
    tilt(&candidates.base_probs(), &candidates.values(), beta)
}

/// `E_q[score] - KL(q || p) / beta` for `beta < 0`, with `0 ln 0 = 0`.
pub fn kl_objective_scores(q: &[f64], base: &[f64], scores: &[f64], beta: f64) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(Error::InvalidArgument(format!("the objective needs beta < 0, got {beta}")));
    }
    if q.len() != base.len() || q.len() != scores.len() {
        return Err(Error::InvalidArgument("q, p and scores must have equal length".into()));
    }
    let mut expect = 0.0;
    let mut kl = 0.0;
    for (i, ((&qi, &pi), &s)) in q.iter().zip(base).zip(scores).enumerate() {
        if qi <= 0.0 {
            continue;
        }
        if pi <= 0.0 {
            return Err(Error::SupportMismatch {
                token: i as u32,
                mass: qi,
            });
        }
        expect += qi * s;
        kl += qi * (qi / pi).ln();
    }
    Ok(expect - kl / beta)
}

/// The tilting objective over a candidate set's values; `q` is indexed like
/// the candidate entries.
pub fn kl_objective(q: &[f64], candidates: &CandidateSet, beta: f64) -> Result<f64> {
    kl_objective_scores(q, &candidates.base_probs(), &candidates.values(), beta).map_err(|e| match e {
        Error::SupportMismatch { token, mass } => Error::SupportMismatch {
            token: candidates.entries()[token as usize].token,
            mass,
        },
        e => e,
    })
}
