use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::{DiscountSpec, Trajectory};
use crate::value::StateValue;
use crate::world::MarkovGenerator;

/// Default exceedance threshold for length-token counting.
pub const DEFAULT_TD_THRESHOLD: f64 = 0.01;

/// One-step TD residual `r + gamma * v_cur - v_prev` of a transition.
pub fn td_residual(v_prev: f64, v_cur: f64, spec: &DiscountSpec) -> f64 {
    spec.per_step_reward(false) + spec.gamma() * v_cur - v_prev
}

/// Emitted tokens with the predicted value of every visited state;
/// `values.len() == tokens.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuedTrace {
    pub tokens: Vec<u32>,
    pub values: Vec<f64>,
}

impl ValuedTrace {
    /// Scores every state of `traj`; absorbing states are worth 0.
    pub fn from_trajectory(gen: &MarkovGenerator, traj: &Trajectory, scorer: &impl StateValue) -> Result<Self> {
        let values = traj
            .states
            .iter()
            .enumerate()
            .map(|(t, &s)| if gen.is_terminal(s) { Ok(0.0) } else { scorer.state_value(s, t) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tokens: traj.tokens.clone(),
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdRecord {
    pub step: usize,
    pub token: u32,
    pub residual: f64,
}

/// Residual of every transition in `trace`, attributed to the token emitted.
pub fn td_records(trace: &ValuedTrace, spec: &DiscountSpec) -> Result<Vec<TdRecord>> {
    if trace.values.len() != trace.tokens.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} tokens need {} values, got {}",
            trace.tokens.len(),
            trace.tokens.len() + 1,
            trace.values.len()
        )));
    }
    Ok(trace
        .tokens
        .iter()
        .enumerate()
        .map(|(step, &token)| TdRecord {
            step,
            token,
            residual: td_residual(trace.values[step], trace.values[step + 1], spec),
        })
        .collect())
}

/// Per-token counts of residuals above `threshold` and below `-threshold`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthTokenStats {
    pub threshold: f64,
    /// token -> (positive count, negative count)
    pub counts: BTreeMap<u32, (u64, u64)>,
}

impl LengthTokenStats {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            counts: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, rec: &TdRecord) {
        if rec.residual > self.threshold {
            self.counts.entry(rec.token).or_default().0 += 1;
        } else if rec.residual < -self.threshold {
            self.counts.entry(rec.token).or_default().1 += 1;
        }
    }

    /// Adds another tally with the same threshold.
    pub fn merge(&mut self, other: &Self) {
        for (tok, (p, n)) in &other.counts {
            let slot = self.counts.entry(*tok).or_default();
            slot.0 += p;
            slot.1 += n;
        }
    }

    pub fn total_exceedances(&self) -> u64 {
        self.counts.values().map(|(p, n)| p + n).sum()
    }
}

pub fn length_token_stats(traces: &[ValuedTrace], spec: &DiscountSpec, threshold: f64) -> Result<LengthTokenStats> {
    let mut stats = LengthTokenStats::new(threshold);
    for trace in traces {
        for rec in td_records(trace, spec)? {
            stats.record(&rec);
        }
    }
    Ok(stats)
}
