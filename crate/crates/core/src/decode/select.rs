use super::candidates::{Candidate, CandidateSet};
use crate::horizon::DiscountSpec;

/// Desired successor value when `step` tokens have been emitted and the
/// whole completion should be `total_target` tokens long. Clamps to 0 once
/// the target is reached.
pub fn target_value_schedule(spec: &DiscountSpec, total_target: usize, step: usize) -> f64 {
    let remaining = total_target.saturating_sub(step + 1);
    spec.return_target(remaining as u64)
}

/// Picks the candidate minimising `key`; ties go to the higher base
/// probability, then the lower token id.
fn pick_min(candidates: &CandidateSet, key: impl Fn(&Candidate) -> f64) -> u32 {
    candidates
        .entries()
        .iter()
        .min_by(|a, b| {
            key(a)
                .total_cmp(&key(b))
                .then_with(|| b.base_prob.total_cmp(&a.base_prob))
                .then_with(|| a.token.cmp(&b.token))
        })
        .map(|c| c.token)
        .expect("candidate sets are never empty")
}

/// Token whose predicted value is closest to `v_star`.
pub fn select_equal_to(candidates: &CandidateSet, v_star: f64) -> u32 {
    pick_min(candidates, |c| (c.value - v_star).abs())
}

/// Token with the most negative value (longest expected continuation).
pub fn select_at_least(candidates: &CandidateSet) -> u32 {
    pick_min(candidates, |c| c.value)
}

/// Token with the value closest to zero (earliest expected termination).
pub fn select_at_most(candidates: &CandidateSet) -> u32 {
    pick_min(candidates, |c| -c.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(entries: &[(u32, f64, f64)]) -> CandidateSet {
        CandidateSet::new(
            entries
                .iter()
                .map(|&(token, base_prob, value)| Candidate {
                    token,
                    base_prob,
                    value,
                    successor: 0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn equal_to_examples() {
        let c = set(&[(1, 0.5, -0.4), (2, 0.5, -0.6)]);
        assert_eq!(select_equal_to(&c, -0.45), 1);
        assert_eq!(select_equal_to(&c, -0.6), 2);
        let c = set(&[(1, 0.3, -0.4), (2, 0.7, -0.6)]);
        assert_eq!(select_equal_to(&c, -0.5), 2);
    }

    #[test]
    fn at_least_and_at_most() {
        let c = set(&[(3, 0.5, -0.2), (4, 0.5, -0.9)]);
        assert_eq!(select_at_least(&c), 4);
        assert_eq!(select_at_most(&c), 3);
        let c = set(&[(3, 0.2, -0.5), (4, 0.8, -0.5)]);
        assert_eq!(select_at_least(&c), 4);
        assert_eq!(select_at_most(&c), 4);
        let c = set(&[(9, 1.0, -0.5)]);
        assert_eq!(select_at_least(&c), 9);
        assert_eq!(select_at_most(&c), 9);
    }

    #[test]
    fn permutation_invariant() {
        let a = set(&[(1, 0.25, -0.3), (2, 0.25, -0.3), (3, 0.5, -0.7)]);
        let b = set(&[(3, 0.5, -0.7), (2, 0.25, -0.3), (1, 0.25, -0.3)]);
        assert_eq!(select_at_most(&a), select_at_most(&b));
        assert_eq!(select_at_most(&a), 1);
        assert_eq!(select_equal_to(&a, -0.5), select_equal_to(&b, -0.5));
    }

    #[test]
    fn schedule_examples() {
        let s = DiscountSpec::new(0.5).unwrap();
        assert_eq!(target_value_schedule(&s, 3, 0), -0.75);
        assert_eq!(target_value_schedule(&s, 3, 2), 0.0);
        assert_eq!(target_value_schedule(&s, 3, 7), 0.0);
    }
}
