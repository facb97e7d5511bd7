//! Small generators used by the examples, tests and shipped `.world` files.
//!
//! Token 0 is EOS in every fixture.

use crate::world::{GeneratorSpec, MarkovGenerator};

/// Sparse emission row helper: `(token, probability)` pairs.
fn row(vocab: usize, entries: &[(u32, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; vocab];
    for &(tok, p) in entries {
        r[tok as usize] = p;
    }
    r
}

/// A chain that emits exactly `n` tokens (the last one EOS) from prompt `p`.
///
/// Panics if `n == 0`.
pub fn deterministic_chain(n: usize) -> MarkovGenerator {
    assert!(n >= 1, "chain needs at least one emission");
    let mut spec = GeneratorSpec {
        num_states: n + 1,
        vocab_size: 2,
        eos: 0,
        terminals: vec![n],
        success: vec![n],
        prompts: vec![("p".into(), 0)],
        ..Default::default()
    };
    for s in 0..n {
        if s + 1 == n {
            spec.emission.push((s, row(2, &[(0, 1.0)])));
            spec.transition.push((s, 0, n));
        } else {
            spec.emission.push((s, row(2, &[(1, 1.0)])));
            spec.transition.push((s, 1, s + 1));
        }
    }
    MarkovGenerator::new(spec).expect("valid chain")
}

/// One state that emits EOS with probability `p_eos` and otherwise loops.
pub fn geometric(p_eos: f64) -> MarkovGenerator {
    MarkovGenerator::new(GeneratorSpec {
        num_states: 2,
        vocab_size: 2,
        eos: 0,
        emission: vec![(0, row(2, &[(0, p_eos), (1, 1.0 - p_eos)]))],
        transition: vec![(0, 0, 1), (0, 1, 0)],
        terminals: vec![1],
        success: vec![1],
        prompts: vec![("p".into(), 0)],
    })
    .expect("valid geometric generator")
}

/// From prompt `p`, with equal probability either EOS immediately (length 1)
/// or a detour that ends after three emissions in total.
///
/// States: 0 start, 1 and 2 the detour, 3 terminal.
pub fn one_or_three() -> MarkovGenerator {
    MarkovGenerator::new(GeneratorSpec {
        num_states: 4,
        vocab_size: 2,
        eos: 0,
        emission: vec![
            (0, row(2, &[(0, 0.5), (1, 0.5)])),
            (1, row(2, &[(1, 1.0)])),
            (2, row(2, &[(0, 1.0)])),
        ],
        transition: vec![(0, 0, 3), (0, 1, 1), (1, 1, 2), (2, 0, 3)],
        terminals: vec![3],
        success: vec![3],
        prompts: vec![("p".into(), 0)],
    })
    .expect("valid generator")
}

/// Ten states (eight emitting, a success and a failure terminal), five
/// tokens, two prompts `a` (state 0) and `b` (state 1).
pub fn ten_state() -> MarkovGenerator {
    let v = 5;
    let table: [(usize, &[(u32, f64, usize)]); 8] = [
        (0, &[(1, 0.5, 2), (2, 0.3, 3), (3, 0.2, 4)]),
        (1, &[(0, 0.2, 8), (1, 0.4, 3), (2, 0.4, 5)]),
        (2, &[(0, 0.2, 8), (1, 0.6, 2), (2, 0.2, 6)]),
        (3, &[(0, 0.2, 9), (1, 0.5, 4), (3, 0.3, 7)]),
        (4, &[(0, 0.2, 8), (2, 0.5, 5), (4, 0.3, 2)]),
        (5, &[(0, 0.3, 9), (1, 0.3, 6), (3, 0.4, 7)]),
        (6, &[(0, 0.3, 8), (2, 0.4, 7), (4, 0.3, 3)]),
        (7, &[(0, 0.7, 8), (1, 0.3, 6)]),
    ];
    let mut spec = GeneratorSpec {
        num_states: 10,
        vocab_size: v,
        eos: 0,
        terminals: vec![8, 9],
        success: vec![8],
        prompts: vec![("a".into(), 0), ("b".into(), 1)],
        ..Default::default()
    };
    for (s, edges) in table {
        let entries: Vec<(u32, f64)> = edges.iter().map(|&(t, p, _)| (t, p)).collect();
        spec.emission.push((s, row(v, &entries)));
        for &(t, _, n) in edges {
            spec.transition.push((s, t, n));
        }
    }
    MarkovGenerator::new(spec).expect("valid ten-state generator")
}

/// A reasoning world with a short and a long route to an answer.
///
/// From the start (prompt `q`) token 1 enters a short reasoning loop
/// (probability 0.2) and token 2 a long one (0.8). Each loop repeats token 3
/// until token 4 moves on to an answer state, which emits a right (5) or
/// wrong (6) answer token before EOS. Right answers end in the success
/// terminal 7, wrong ones in the failure terminal 8.
pub fn two_path() -> MarkovGenerator {
    let v = 7;
    let table: [(usize, &[(u32, f64, usize)]); 7] = [
        (0, &[(1, 0.2, 1), (2, 0.8, 3)]),
        (1, &[(3, 0.6, 1), (4, 0.4, 2)]),
        (2, &[(5, 0.9, 5), (6, 0.1, 6)]),
        (3, &[(3, 0.95, 3), (4, 0.05, 4)]),
        (4, &[(5, 0.9, 5), (6, 0.1, 6)]),
        (5, &[(0, 1.0, 7)]),
        (6, &[(0, 1.0, 8)]),
    ];
    let mut spec = GeneratorSpec {
        num_states: 9,
        vocab_size: v,
        eos: 0,
        terminals: vec![7, 8],
        success: vec![7],
        prompts: vec![("q".into(), 0)],
        ..Default::default()
    };
    for (s, edges) in table {
        let entries: Vec<(u32, f64)> = edges.iter().map(|&(t, p, _)| (t, p)).collect();
        spec.emission.push((s, row(v, &entries)));
        for &(t, _, n) in edges {
            spec.transition.push((s, t, n));
        }
    }
    MarkovGenerator::new(spec).expect("valid two-path generator")
}

/// Number of verbosity levels in [`ladder`].
pub const LADDER_LEVELS: usize = 40;
/// Level the `p` prompt of [`ladder`] starts at.
pub const LADDER_START: usize = 20;

/// A ladder of verbosity levels.
///
/// Level `k` emits EOS with probability `max(0.95 * 0.85^k, 0.002)`; the rest
/// of the mass moves down one (token 1) or three (token 2) levels, stays
/// (token 3), moves up one (token 4) or three (token 5) levels, or drops ten
/// levels (token 6), clamped to the ladder. Higher levels have longer expected continuations, so the value
/// of the successor state tells a controller how much length each token buys.
pub fn ladder() -> MarkovGenerator {
    let k = LADDER_LEVELS;
    let v = 7;
    let terminal = k;
    let mut spec = GeneratorSpec {
        num_states: k + 1,
        vocab_size: v,
        eos: 0,
        terminals: vec![terminal],
        success: vec![terminal],
        prompts: vec![("p".into(), LADDER_START)],
        ..Default::default()
    };
    let moves: [(u32, f64, isize); 6] = [
        (1, 0.22, -1),
        (2, 0.1, -3),
        (3, 0.28, 0),
        (4, 0.25, 1),
        (5, 0.1, 3),
        (6, 0.05, -10),
    ];
    for level in 0..k {
        let q = (0.95 * 0.85f64.powi(level as i32)).max(0.002);
        let mut entries = vec![(0u32, q)];
        spec.transition.push((level, 0, terminal));
        for &(tok, share, delta) in &moves {
            entries.push((tok, share * (1.0 - q)));
            let next = (level as isize + delta).clamp(0, k as isize - 1) as usize;
            spec.transition.push((level, tok, next));
        }
        let mut r = row(v, &entries);
        // Keep the row sum at exactly one after the share products round.
        let drift: f64 = 1.0 - r.iter().sum::<f64>();
        r[3] += drift;
        spec.emission.push((level, r));
    }
    MarkovGenerator::new(spec).expect("valid ladder generator")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        for g in [
            deterministic_chain(1),
            deterministic_chain(7),
            geometric(0.5),
            one_or_three(),
            ten_state(),
            two_path(),
            ladder(),
        ] {
            assert!(g.num_states() > 0);
            assert!(!g.prompts().is_empty());
        }
    }
}
