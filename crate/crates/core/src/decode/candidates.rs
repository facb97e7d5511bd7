use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::StateValue;
use crate::world::MarkovGenerator;

/// Vocabulary truncation applied before scoring. Each stage is disabled by
/// its sentinel: `top_k = 0`, `top_p = 1`, `min_p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub top_k: usize,
    pub top_p: f64,
    pub min_p: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self::none()
    }
}

impl Truncation {
    /// Keeps the full support.
    pub const fn none() -> Self {
        Self {
            top_k: 0,
            top_p: 1.0,
            min_p: 0.0,
        }
    }

    /// Settings used for hard length constraints: top-k 15, top-p 0.999.
    pub const fn length_control() -> Self {
        Self {
            top_k: 15,
            top_p: 0.999,
            min_p: 0.0,
        }
    }

    /// Settings used for tilted sampling: min-p 0.01.
    pub const fn tilting() -> Self {
        Self {
            top_k: 0,
            top_p: 1.0,
            min_p: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::InvalidArgument(format!("top_p must lie in (0, 1], got {}", self.top_p)));
        }
        if !(0.0..=1.0).contains(&self.min_p) {
            return Err(Error::InvalidArgument(format!("min_p must lie in [0, 1], got {}", self.min_p)));
        }
        Ok(())
    }

    /// Truncates `(token, prob)` pairs: zero-probability tokens are dropped,
    /// the rest sorted by probability (then token id), and top-k, top-p and
    /// min-p applied in that order with renormalisation after each stage.
    pub fn apply(&self, dist: impl IntoIterator<Item = (u32, f64)>) -> Vec<(u32, f64)> {
        let mut kept: Vec<(u32, f64)> = dist.into_iter().filter(|(_, p)| *p > 0.0).collect();
        kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        renormalise(&mut kept);

        if self.top_k > 0 && kept.len() > self.top_k {
            kept.truncate(self.top_k);
            renormalise(&mut kept);
        }
        if self.top_p < 1.0 {
            let mut acc = 0.0;
            let mut n = kept.len();
            for (i, (_, p)) in kept.iter().enumerate() {
                acc += p;
                if acc >= self.top_p - 1e-12 {
                    n = i + 1;
                    break;
                }
            }
            kept.truncate(n);
            renormalise(&mut kept);
        }
        if self.min_p > 0.0 {
            if let Some(&(_, p_max)) = kept.first() {
                let floor = self.min_p * p_max;
                kept.retain(|(_, p)| *p >= floor);
                renormalise(&mut kept);
            }
        }
        kept
    }
}

fn renormalise(entries: &mut [(u32, f64)]) {
    let total: f64 = entries.iter().map(|e| e.1).sum();
    if total > 0.0 {
        for e in entries.iter_mut() {
            e.1 /= total;
        }
    }
}

/// One scored candidate token.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub token: u32,
    pub base_prob: f64,
    /// Predicted value of the successor state (0 when it is terminal).
    pub value: f64,
    pub successor: usize,
}

/// Truncated, renormalised and scored next-token candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    entries: Vec<Candidate>,
}

impl CandidateSet {
    /// Builds a set from raw entries, renormalising the base probabilities.
    pub fn new(mut entries: Vec<Candidate>) -> Result<Self> {
        let total: f64 = entries.iter().map(|c| c.base_prob).sum();
        if entries.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidArgument("candidate set needs positive total mass".into()));
        }
        if entries.iter().any(|c| !(c.base_prob >= 0.0)) {
            return Err(Error::InvalidArgument("negative base probability".into()));
        }
        for c in &mut entries {
            c.base_prob /= total;
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn base_probs(&self) -> Vec<f64> {
        self.entries.iter().map(|c| c.base_prob).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|c| c.value).collect()
    }

    /// A copy without `token`, renormalised. `None` if nothing would remain.
    pub fn without(&self, token: u32) -> Option<Self> {
        let rest: Vec<Candidate> = self.entries.iter().filter(|c| c.token != token).copied().collect();
        Self::new(rest).ok()
    }
}

/// Truncates the next-token distribution at `state` and scores every
/// surviving token by the value of the state it leads to. `step` is the
/// number of tokens emitted so far; successors are scored at `step + 1`.
pub fn build_candidates(
    gen: &MarkovGenerator,
    scorer: &impl StateValue,
    state: usize,
    step: usize,
    truncation: &Truncation,
) -> Result<CandidateSet> {
    truncation.validate()?;
    let row = gen.next_distribution(state)?;
    let kept = truncation.apply(row.iter().enumerate().map(|(t, &p)| (t as u32, p)));
    if kept.is_empty() {
        return Err(Error::EmptyCandidates { state });
    }
    let entries = kept
        .into_iter()
        .map(|(token, base_prob)| {
            let successor = gen.successor(state, token).expect("validated transition");
            let value = if gen.is_terminal(successor) {
                0.0
            } else {
                scorer.state_value(successor, step + 1)?
            };
            Ok(Candidate {
                token,
                base_prob,
                value,
                successor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CandidateSet::new(entries)
}
