use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};

/// Tolerance on the sum of each emission row.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A finite-state absorbing generator: each non-terminal state emits a token
/// from a fixed distribution and moves to the successor chosen by that token.
///
/// Invariants checked by [`MarkovGenerator::new`]:
/// - every emission row is non-negative and sums to one;
/// - every token with positive probability has a successor;
/// - EOS leads to a terminal state and every other token to a non-terminal one;
/// - terminal states emit nothing;
/// - a terminal state is reachable from every non-terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGenerator {
    num_states: usize,
    vocab_size: usize,
    eos: u32,
    emission: Vec<Vec<f64>>,
    transition: Vec<Vec<Option<usize>>>,
    terminal: Vec<bool>,
    success: Vec<bool>,
    prompts: BTreeMap<String, usize>,
}

/// Unvalidated parts of a [`MarkovGenerator`].
#[derive(Debug, Clone, Default)]
pub struct GeneratorSpec {
    pub num_states: usize,
    pub vocab_size: usize,
    pub eos: u32,
    /// `(state, row)`; rows for terminal states must be absent.
    pub emission: Vec<(usize, Vec<f64>)>,
    /// `(state, token, successor)`.
    pub transition: Vec<(usize, u32, usize)>,
    pub terminals: Vec<usize>,
    pub success: Vec<usize>,
    pub prompts: Vec<(String, usize)>,
}

impl MarkovGenerator {
    pub fn new(spec: GeneratorSpec) -> Result<Self> {
        let GeneratorSpec {
            num_states,
            vocab_size,
            eos,
            emission,
            transition,
            terminals,
            success,
            prompts,
        } = spec;
        let invalid = |msg: String| Err(Error::InvalidGenerator(msg));
        if num_states == 0 {
            return invalid("at least one state is required".into());
        }
        if vocab_size == 0 || eos as usize >= vocab_size {
            return invalid(format!("eos id {eos} is outside vocabulary of size {vocab_size}"));
        }

        let mut terminal = vec![false; num_states];
        for s in terminals {
            check_state(s, num_states)?;
            terminal[s] = true;
        }
        let mut success_flags = vec![false; num_states];
        for s in success {
            check_state(s, num_states)?;
            if !terminal[s] {
                return invalid(format!("success state {s} is not terminal"));
            }
            success_flags[s] = true;
        }

        let mut rows: Vec<Option<Vec<f64>>> = vec![None; num_states];
        for (s, row) in emission {
            check_state(s, num_states)?;
            if terminal[s] {
                return invalid(format!("terminal state {s} has an emission row"));
            }
            if rows[s].is_some() {
                return invalid(format!("state {s} has more than one emission row"));
            }
            if row.len() != vocab_size {
                return invalid(format!(
                    "emission row of state {s} has {} entries, expected {vocab_size}",
                    row.len()
                ));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return invalid(format!("emission row of state {s} has a negative or non-finite entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return invalid(format!("emission row of state {s} sums to {sum}"));
            }
            rows[s] = Some(row);
        }

        let mut next = vec![vec![None; vocab_size]; num_states];
        for (s, tok, succ) in transition {
            check_state(s, num_states)?;
            check_state(succ, num_states)?;
            if tok as usize >= vocab_size {
                return invalid(format!("transition from state {s} uses token {tok} outside the vocabulary"));
            }
            if next[s][tok as usize].replace(succ).is_some() {
                return invalid(format!("duplicate transition for state {s}, token {tok}"));
            }
        }

        let mut emission_rows = Vec::with_capacity(num_states);
        for (s, row) in rows.into_iter().enumerate() {
            match row {
                None if terminal[s] => {
                    if next[s].iter().any(Option::is_some) {
                        return invalid(format!("terminal state {s} has outgoing transitions"));
                    }
                    emission_rows.push(Vec::new());
                }
                None => return invalid(format!("non-terminal state {s} has no emission row")),
                Some(row) => {
                    for (tok, &p) in row.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let Some(succ) = next[s][tok] else {
                            return invalid(format!(
                                "state {s} emits token {tok} with probability {p} but has no transition for it"
                            ));
                        };
                        let is_eos = tok as u32 == eos;
                        if is_eos && !terminal[succ] {
                            return invalid(format!("EOS from state {s} leads to non-terminal state {succ}"));
                        }
                        if !is_eos && terminal[succ] {
                            return invalid(format!(
                                "token {tok} from state {s} leads to terminal state {succ}; only EOS may terminate"
                            ));
                        }
                    }
                    emission_rows.push(row);
                }
            }
        }

        let mut prompt_map = BTreeMap::new();
        for (id, s) in prompts {
            check_state(s, num_states)?;
            if terminal[s] {
                return invalid(format!("prompt `{id}` starts in terminal state {s}"));
            }
            if prompt_map.insert(id.clone(), s).is_some() {
                return invalid(format!("duplicate prompt id `{id}`"));
            }
        }

        let gen = Self {
            num_states,
            vocab_size,
            eos,
            emission: emission_rows,
            transition: next,
            terminal,
            success: success_flags,
            prompts: prompt_map,
        };
        gen.check_absorbing()?;
        Ok(gen)
    }

    /// Backward reachability from the terminal set over positive-probability
    /// edges.
    fn check_absorbing(&self) -> Result<()> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.num_states];
        for s in self.non_terminal_states() {
            for (_, _, succ) in self.edges(s) {
                preds[succ].push(s);
            }
        }
        let mut reaches = self.terminal.clone();
        let mut queue: VecDeque<usize> = (0..self.num_states).filter(|&s| self.terminal[s]).collect();
        if queue.is_empty() {
            return Err(Error::NonAbsorbing("no terminal states".into()));
        }
        while let Some(s) = queue.pop_front() {
            for &p in &preds[s] {
                if !reaches[p] {
                    reaches[p] = true;
                    queue.push_back(p);
                }
            }
        }
        match reaches.iter().position(|r| !r) {
            Some(s) => Err(Error::NonAbsorbing(format!(
                "no terminal state is reachable from state {s}"
            ))),
            None => Ok(()),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn eos(&self) -> u32 {
        self.eos
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    pub fn is_success(&self, state: usize) -> bool {
        self.success[state]
    }

    pub fn prompts(&self) -> &BTreeMap<String, usize> {
        &self.prompts
    }

    pub fn start_state(&self, prompt_id: &str) -> Result<usize> {
        self.prompts
            .get(prompt_id)
            .copied()
            .ok_or_else(|| Error::UnknownPrompt(prompt_id.to_string()))
    }

    pub fn non_terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states).filter(|&s| !self.terminal[s])
    }

    /// The base next-token distribution at a non-terminal state.
    pub fn next_distribution(&self, state: usize) -> Result<&[f64]> {
        check_state(state, self.num_states)?;
        if self.terminal[state] {
            return Err(Error::TerminalState(state));
        }
        Ok(&self.emission[state])
    }

    /// Successor of `state` after emitting `token`, if the pair is defined.
    pub fn successor(&self, state: usize, token: u32) -> Option<usize> {
        self.transition
            .get(state)
            .and_then(|row| row.get(token as usize))
            .copied()
            .flatten()
    }

    /// `(token, probability, successor)` for every positive-probability
    /// emission of a non-terminal state, in token order.
    pub fn edges(&self, state: usize) -> impl Iterator<Item = (u32, f64, usize)> + '_ {
        self.emission[state]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(tok, &p)| {
                let succ = self.transition[state][tok].expect("validated transition");
                (tok as u32, p, succ)
            })
    }

    /// All defined transitions, in `(state, token)` order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, u32, usize)> + '_ {
        self.transition.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(tok, succ)| succ.map(|n| (s, tok as u32, n)))
        })
    }
}

fn check_state(s: usize, n: usize) -> Result<()> {
    if s >= n {
        return Err(Error::InvalidGenerator(format!(
            "state {s} is out of range (num_states = {n})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> GeneratorSpec {
        GeneratorSpec {
            num_states: 2,
            vocab_size: 2,
            eos: 0,
            emission: vec![(0, vec![1.0, 0.0])],
            transition: vec![(0, 0, 1)],
            terminals: vec![1],
            success: vec![1],
            prompts: vec![("p".into(), 0)],
        }
    }

    #[test]
    fn accepts_minimal_generator() {
        let g = MarkovGenerator::new(two_state()).unwrap();
        assert_eq!(g.next_distribution(0).unwrap(), &[1.0, 0.0]);
        assert!(matches!(g.next_distribution(1), Err(Error::TerminalState(1))));
        assert_eq!(g.start_state("p").unwrap(), 0);
        assert!(g.start_state("q").is_err());
    }

    #[test]
    fn rejects_bad_row_sum() {
        let mut spec = two_state();
        spec.emission = vec![(0, vec![0.9, 0.0])];
        assert!(MarkovGenerator::new(spec).is_err());
    }

    #[test]
    fn rejects_eos_to_non_terminal() {
        let mut spec = two_state();
        spec.num_states = 3;
        spec.emission = vec![(0, vec![1.0, 0.0]), (2, vec![1.0, 0.0])];
        spec.transition = vec![(0, 0, 2), (2, 0, 1)];
        assert!(MarkovGenerator::new(spec).is_err());
    }

    #[test]
    fn rejects_non_absorbing_loop() {
        let spec = GeneratorSpec {
            num_states: 3,
            vocab_size: 2,
            eos: 0,
            emission: vec![(0, vec![0.0, 1.0]), (1, vec![1.0, 0.0])],
            transition: vec![(0, 1, 0), (1, 0, 2)],
            terminals: vec![2],
            success: vec![],
            prompts: vec![("p".into(), 0)],
        };
        assert!(matches!(MarkovGenerator::new(spec), Err(Error::NonAbsorbing(_))));
    }

    #[test]
    fn rejects_terminal_with_emission() {
        let mut spec = two_state();
        spec.emission.push((1, vec![1.0, 0.0]));
        assert!(MarkovGenerator::new(spec).is_err());
    }
}
