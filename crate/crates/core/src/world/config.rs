//! Text format for generator definitions.
//!
//! ```text
//! # comment
//! [states]
//! count = 4
//! vocab = 3
//! eos = 0
//!
//! [emission]
//! 0 = 0.5 0.5 0        # dense: one probability per token id
//! 1 = 0:0.25 2:0.75    # sparse: token:probability, others zero
//!
//! [transition]
//! 0 0 = 3              # state token = successor
//! 0 1 = 1
//! 1 0 = 3
//! 1 2 = 2
//!
//! [terminals]
//! 3
//!
//! [success]
//! 3
//!
//! [prompts]
//! hello = 0
//! ```
//!
//! Lists in `[terminals]` and `[success]` may be spread over several lines.

use std::fmt::{self, Write as _};
use std::path::Path;

use super::generator::{GeneratorSpec, MarkovGenerator, ROW_SUM_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    States,
    Emission,
    Transition,
    Terminals,
    Success,
    Prompts,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "states" => Section::States,
            "emission" => Section::Emission,
            "transition" => Section::Transition,
            "terminals" => Section::Terminals,
            "success" => Section::Success,
            "prompts" => Section::Prompts,
            _ => return None,
        })
    }
}

struct Parser<'a> {
    origin: &'a str,
    line: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            path: self.origin.to_string(),
            line: self.line,
            message: message.into(),
        })
    }

    fn int(&self, s: &str, what: &str) -> Result<usize> {
        match s.trim().parse::<usize>() {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("expected {what} as a non-negative integer, found `{}`", s.trim())),
        }
    }

    fn prob(&self, s: &str) -> Result<f64> {
        match s.trim().parse::<f64>() {
            Ok(p) if p.is_finite() && p >= 0.0 => Ok(p),
            _ => self.err(format!("expected a probability, found `{}`", s.trim())),
        }
    }
}

/// Parses a generator definition. `origin` is used in error messages.
pub fn parse_generator(text: &str, origin: &str) -> Result<MarkovGenerator> {
    let mut p = Parser { origin, line: 0 };
    let mut section: Option<Section> = None;
    let mut count: Option<usize> = None;
    let mut vocab: Option<usize> = None;
    let mut eos: Option<usize> = None;
    let mut spec = GeneratorSpec::default();
    let mut seen_rows = std::collections::BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return p.err("unterminated section header");
            };
            let Some(sec) = Section::parse(name.trim()) else {
                return p.err(format!("unknown section [{}]", name.trim()));
            };
            if sec != Section::States && (count.is_none() || vocab.is_none() || eos.is_none()) {
                return p.err("[states] with count, vocab and eos must come first");
            }
            section = Some(sec);
            continue;
        }
        let Some(sec) = section else {
            return p.err("entry outside of any section");
        };
        match sec {
            Section::States => {
                let Some((key, value)) = line.split_once('=') else {
                    return p.err("expected `key = value`");
                };
                let v = p.int(value, key.trim())?;
                match key.trim() {
                    "count" => count = Some(v),
                    "vocab" => vocab = Some(v),
                    "eos" => eos = Some(v),
                    other => return p.err(format!("unknown key `{other}` in [states]")),
                }
            }
            Section::Emission => {
                let (n, v) = (count.unwrap(), vocab.unwrap());
                let Some((state, row)) = line.split_once('=') else {
                    return p.err("expected `state = probabilities`");
                };
                let state = p.int(state, "state")?;
                if state >= n {
                    return p.err(format!("state {state} is out of range (count = {n})"));
                }
                if !seen_rows.insert(state) {
                    return p.err(format!("duplicate emission row for state {state}"));
                }
                let fields: Vec<&str> = row.split_whitespace().collect();
                let mut probs = vec![0.0; v];
                if fields.iter().any(|f| f.contains(':')) {
                    for f in fields {
                        let Some((tok, prob)) = f.split_once(':') else {
                            return p.err(format!("mixed dense and sparse entries near `{f}`"));
                        };
                        let tok = p.int(tok, "token")?;
                        if tok >= v {
                            return p.err(format!("token {tok} is out of range (vocab = {v})"));
                        }
                        if probs[tok] != 0.0 {
                            return p.err(format!("token {tok} listed twice"));
                        }
                        probs[tok] = p.prob(prob)?;
                    }
                } else {
                    if fields.len() != v {
                        return p.err(format!("expected {v} probabilities, found {}", fields.len()));
                    }
                    for (slot, f) in probs.iter_mut().zip(fields) {
                        *slot = p.prob(f)?;
                    }
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return p.err(format!("probabilities sum to {sum}, expected 1"));
                }
                spec.emission.push((state, probs));
            }
            Section::Transition => {
                let (n, v) = (count.unwrap(), vocab.unwrap());
                let Some((lhs, succ)) = line.split_once('=') else {
                    return p.err("expected `state token = successor`");
                };
                let parts: Vec<&str> = lhs.split_whitespace().collect();
                if parts.len() != 2 {
                    return p.err("expected `state token = successor`");
                }
                let state = p.int(parts[0], "state")?;
                let tok = p.int(parts[1], "token")?;
                let succ = p.int(succ, "successor")?;
                if state >= n || succ >= n {
                    return p.err(format!("state out of range (count = {n})"));
                }
                if tok >= v {
                    return p.err(format!("token {tok} is out of range (vocab = {v})"));
                }
                spec.transition.push((state, tok as u32, succ));
            }
            Section::Terminals | Section::Success => {
                for f in line.split_whitespace() {
                    let s = p.int(f, "state")?;
                    if s >= count.unwrap() {
                        return p.err(format!("state {s} is out of range"));
                    }
                    if sec == Section::Terminals {
                        spec.terminals.push(s);
                    } else {
                        spec.success.push(s);
                    }
                }
            }
            Section::Prompts => {
                let Some((id, state)) = line.split_once('=') else {
                    return p.err("expected `prompt_id = state`");
                };
                let id = id.trim();
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return p.err("prompt id must be a single non-empty word");
                }
                let state = p.int(state, "state")?;
                spec.prompts.push((id.to_string(), state));
            }
        }
    }

    let (Some(n), Some(v), Some(e)) = (count, vocab, eos) else {
        p.line = text.lines().count().max(1);
        return p.err("missing [states] section with count, vocab and eos");
    };
    spec.num_states = n;
    spec.vocab_size = v;
    spec.eos = u32::try_from(e).map_err(|_| Error::InvalidGenerator("eos id too large".into()))?;
    MarkovGenerator::new(spec).map_err(|e| match e {
        Error::InvalidGenerator(m) => Error::InvalidGenerator(format!("{origin}: {m}")),
        Error::NonAbsorbing(m) => Error::NonAbsorbing(format!("{origin}: {m}")),
        other => other,
    })
}

pub fn load_generator(path: &Path) -> Result<MarkovGenerator> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_generator(&text, &path.display().to_string())
}

impl fmt::Display for MarkovGenerator {
    /// Writes the generator in the text format accepted by
    /// [`parse_generator`]. Probabilities use the shortest representation
    /// that parses back to the same `f64`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[states]")?;
        writeln!(f, "count = {}", self.num_states())?;
        writeln!(f, "vocab = {}", self.vocab_size())?;
        writeln!(f, "eos = {}", self.eos())?;
        writeln!(f, "\n[emission]")?;
        for s in self.non_terminal_states() {
            let mut row = String::new();
            for (tok, p) in self.next_distribution(s).expect("non-terminal").iter().enumerate() {
                if *p > 0.0 {
                    let _ = write!(row, " {tok}:{p}");
                }
            }
            writeln!(f, "{s} ={row}")?;
        }
        writeln!(f, "\n[transition]")?;
        for (s, tok, succ) in self.transitions() {
            writeln!(f, "{s} {tok} = {succ}")?;
        }
        let list = |pred: &dyn Fn(usize) -> bool| {
            (0..self.num_states())
                .filter(|&s| pred(s))
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "\n[terminals]\n{}", list(&|s| self.is_terminal(s)))?;
        writeln!(f, "\n[success]\n{}", list(&|s| self.is_success(s)))?;
        writeln!(f, "\n[prompts]")?;
        for (id, s) in self.prompts() {
            writeln!(f, "{id} = {s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# tiny world
[states]
count = 4
vocab = 3
eos = 0

[emission]
0 = 0.5 0.5 0
1 = 0:0.25 2:0.75

[transition]
0 0 = 3
0 1 = 1
1 0 = 3
1 2 = 2
2 0 = 3

[emission]
2 = 1 0 0

[terminals]
3
[success]
3
[prompts]
hello = 0
";

    #[test]
    fn parses_sample_and_round_trips() {
        let g = parse_generator(SAMPLE, "sample").unwrap();
        assert_eq!(g.num_states(), 4);
        assert_eq!(g.next_distribution(1).unwrap(), &[0.25, 0.0, 0.75]);
        assert_eq!(g.successor(1, 2), Some(2));
        let again = parse_generator(&g.to_string(), "again").unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = SAMPLE.replace("1 = 0:0.25 2:0.75", "1 = 0:0.25 2:0.70");
        match parse_generator(&bad, "w.world") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 9);
                assert_eq!(path, "w.world");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = SAMPLE.replace("0 1 = 1", "0 7 = 1");
        assert!(matches!(parse_generator(&bad, "w"), Err(Error::Parse { line: 13, .. })));
    }

    #[test]
    fn rejects_unknown_section() {
        let bad = SAMPLE.replace("[success]", "[winners]");
        assert!(matches!(parse_generator(&bad, "w"), Err(Error::Parse { .. })));
    }
}
