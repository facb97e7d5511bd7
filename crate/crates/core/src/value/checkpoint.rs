//! Text checkpoints for [`ValueHead`].
//!
//! Parameters are written as C99 hexadecimal floats (`0x1.8p-1`), which
//! round-trip every finite `f64` bit for bit.
//!
//! ```text
//! # <optional header comments>
//! lenvm-value-head v1
//! input_dim 10
//! hidden 64
//! features one_hot 10            # or: features one_hot_position 10 <hex scale>
//! w1                              # `hidden` rows of `input_dim` values
//! ...
//! b1
//! ...
//! w2
//! ...
//! b2
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::features::FeatureMap;
use super::head::ValueHead;
use crate::error::{Error, Result};

const MAGIC: &str = "lenvm-value-head v1";

/// Formats a finite `f64` as a hexadecimal float literal.
pub fn format_hex_f64(x: f64) -> String {
    assert!(x.is_finite(), "cannot encode non-finite value {x}");
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Parses the output of [`format_hex_f64`] (and any hex float whose
/// significand fits in 52 fractional bits).
pub fn parse_hex_f64(s: &str) -> Option<f64> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let rest = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X"))?;
    let (sig, exp) = rest.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, frac) = sig.split_once('.').unwrap_or((sig, ""));
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let lead = match lead {
        "0" => 0u64,
        "1" => 1u64,
        _ => return None,
    };
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let bits = match lead {
        0 if frac_bits == 0 => 0,
        0 if exp == -1022 => frac_bits,
        1 if (-1022..=1023).contains(&exp) => (((exp + 1023) as u64) << 52) | frac_bits,
        _ => return None,
    };
    let v = f64::from_bits(bits);
    Some(if neg { -v } else { v })
}

/// Serialises a head and its feature map. `header` lines are emitted as `#`
/// comments before the body.
pub fn write_checkpoint(head: &ValueHead, features: &FeatureMap, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "input_dim {}", head.input_dim());
    let _ = writeln!(out, "hidden {}", head.hidden());
    match features.position_scale() {
        None => {
            let _ = writeln!(out, "features one_hot {}", features.num_states());
        }
        Some(scale) => {
            let _ = writeln!(
                out,
                "features one_hot_position {} {}",
                features.num_states(),
                format_hex_f64(scale)
            );
        }
    }
    let row = |vals: &[f64]| vals.iter().map(|v| format_hex_f64(*v)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "w1");
    for r in head.w1().chunks(head.input_dim()) {
        let _ = writeln!(out, "{}", row(r));
    }
    let _ = writeln!(out, "b1\n{}", row(head.b1()));
    let _ = writeln!(out, "w2\n{}", row(head.w2()));
    let _ = writeln!(out, "b2\n{}", format_hex_f64(head.b2()));
    out
}

/// Parses a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint(text: &str, origin: &str) -> Result<(ValueHead, FeatureMap)> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(text.lines().count(), format!("unexpected end of file, expected {what}")))
    };

    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(err(n, format!("expected `{MAGIC}`")));
    }
    let field = |key: &str, (n, l): (usize, &str)| -> Result<(usize, Vec<String>)> {
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(n, format!("expected `{key}`")));
        }
        Ok((n, parts.map(str::to_string).collect()))
    };
    let int = |n: usize, s: Option<&String>| -> Result<usize> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| err(n, "expected a non-negative integer".into()))
    };
    let (n, v) = field("input_dim", next("input_dim")?)?;
    let input_dim = int(n, v.first())?;
    let (n, v) = field("hidden", next("hidden")?)?;
    let hidden = int(n, v.first())?;
    let (n, v) = field("features", next("features")?)?;
    let features = match v.first().map(String::as_str) {
        Some("one_hot") => FeatureMap::one_hot(int(n, v.get(1))?),
        Some("one_hot_position") => {
            let states = int(n, v.get(1))?;
            let scale = v
                .get(2)
                .and_then(|s| parse_hex_f64(s))
                .filter(|s| *s > 0.0)
                .ok_or_else(|| err(n, "expected a positive hex-float position scale".into()))?;
            FeatureMap::with_position(states, scale)
        }
        _ => return Err(err(n, "unknown feature map".into())),
    };
    if features.dimension() != input_dim {
        return Err(err(n, format!("feature dimension {} != input_dim {input_dim}", features.dimension())));
    }

    let mut params = Vec::with_capacity(ValueHead::param_count(input_dim, hidden));
    for (key, rows, cols) in [("w1", hidden, input_dim), ("b1", 1, hidden), ("w2", 1, hidden), ("b2", 1, 1)] {
        let (n, rest) = field(key, next(key)?)?;
        if !rest.is_empty() {
            return Err(err(n, format!("unexpected tokens after `{key}`")));
        }
        for _ in 0..rows {
            let (n, l) = next(key)?;
            let vals: Vec<&str> = l.split_whitespace().collect();
            if vals.len() != cols {
                return Err(err(n, format!("expected {cols} values in `{key}`, found {}", vals.len())));
            }
            for v in vals {
                let x = parse_hex_f64(v).ok_or_else(|| err(n, format!("invalid hex float `{v}`")))?;
                params.push(x);
            }
        }
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing content after b2".into()));
    }
    Ok((ValueHead::from_params(input_dim, hidden, params)?, features))
}

pub fn save_checkpoint(path: &Path, head: &ValueHead, features: &FeatureMap, header: &[String]) -> Result<()> {
    std::fs::write(path, write_checkpoint(head, features, header)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(ValueHead, FeatureMap)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_encodings() {
        assert_eq!(format_hex_f64(1.0), "0x1p+0");
        assert_eq!(format_hex_f64(0.75), "0x1.8p-1");
        assert_eq!(format_hex_f64(-0.1), "-0x1.999999999999ap-4");
        assert_eq!(format_hex_f64(0.0), "0x0p+0");
        assert_eq!(format_hex_f64(-0.0), "-0x0p+0");
        assert_eq!(parse_hex_f64("0x1.8p-1"), Some(0.75));
        assert_eq!(parse_hex_f64("0x2p0"), None);
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back = parse_hex_f64(&format_hex_f64(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let head = ValueHead::init(5, 7, 11);
        let fm = FeatureMap::with_position(4, 37.5);
        let text = write_checkpoint(&head, &fm, &["seed=3".to_string()]);
        let (back, fm2) = read_checkpoint(&text, "mem").unwrap();
        assert_eq!(back, head);
        assert_eq!(fm2, fm);
        let fm = FeatureMap::one_hot(5);
        let (back, fm2) = read_checkpoint(&write_checkpoint(&head, &fm, &[]), "mem").unwrap();
        assert_eq!(back, head);
        assert_eq!(fm2, fm);
    }

    #[test]
    fn bad_checkpoint_reports_line() {
        let head = ValueHead::init(2, 2, 1);
        let text = write_checkpoint(&head, &FeatureMap::one_hot(2), &[]).replace("b1\n", "b1\nnot-a-float 0x1p+0\n");
        match read_checkpoint(&text, "ck") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
