//! Text format for moment sequences.
//!
//! ```text
//! # comment lines start with '#'
//! version 1
//! n 2
//! d 1
//! mode paired
//! 0,0 | 0,0 | 1.0 | 0.0
//! 0,0 | 1,0 | 0.5 | -0.25
//! ...
//! ```
//!
//! Paired records are `alpha | beta | re | im`, Hankel records are
//! `alpha | re | im`. Multi-indices are comma-separated exponents. Floats are
//! written in shortest round-trip form, so write/read is bit-faithful.

use num_complex::Complex64;

use super::{MomentError, MomentSequence, MultiIndex, SequenceMode};

pub const FORMAT_VERSION: u32 = 1;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_sequence(seq: &MomentSequence) -> String {
    let mut out = String::new();
    out.push_str(&format!("version {FORMAT_VERSION}\n"));
    out.push_str(&format!("n {}\n", seq.n()));
    out.push_str(&format!("d {}\n", seq.d()));
    out.push_str(&format!("mode {}\n", seq.mode().as_str()));
    match seq.mode() {
        SequenceMode::Paired => {
            for ((a, b), v) in seq.pairs() {
                out.push_str(&format!("{a} | {b} | {} | {}\n", fmt_f64(v.re), fmt_f64(v.im)));
            }
        }
        SequenceMode::Hankel => {
            for (a, v) in seq.singles() {
                out.push_str(&format!("{a} | {} | {}\n", fmt_f64(v.re), fmt_f64(v.im)));
            }
        }
    }
    out
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> MomentError {
    MomentError::Parse {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_float(line: usize, s: &str) -> Result<f64, MomentError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| parse_err(line, format!("bad number '{}': {e}", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{}'", s.trim())));
    }
    Ok(v)
}

pub(crate) fn parse_index(line: usize, s: &str, n: usize) -> Result<MultiIndex, MomentError> {
    let a: MultiIndex = s.parse().map_err(|e: String| parse_err(line, e))?;
    if a.n() != n {
        return Err(parse_err(line, format!("multi-index {a} has {} entries, expected {n}", a.n())));
    }
    Ok(a)
}

/// Meaningful lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_sequence(text: &str) -> Result<MomentSequence, MomentError> {
    let mut version = None;
    let mut n = None;
    let mut d = None;
    let mut mode = None;
    let mut seq: Option<MomentSequence> = None;

    for (ln, line) in content_lines(text) {
        if seq.is_none() && !line.contains('|') {
            let (key, val) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(ln, format!("expected 'key value', got '{line}'")))?;
            let val = val.trim();
            match key {
                "version" => {
                    let v: u32 = val.parse().map_err(|_| parse_err(ln, "bad version"))?;
                    if v != FORMAT_VERSION {
                        return Err(parse_err(ln, format!("unsupported version {v}")));
                    }
                    version = Some(v);
                }
                "n" => n = Some(val.parse::<usize>().map_err(|_| parse_err(ln, "bad n"))?),
                "d" => d = Some(val.parse::<u32>().map_err(|_| parse_err(ln, "bad d"))?),
                "mode" => {
                    mode = Some(match val {
                        "paired" => SequenceMode::Paired,
                        "hankel" => SequenceMode::Hankel,
                        other => return Err(parse_err(ln, format!("unknown mode '{other}'"))),
                    })
                }
                other => return Err(parse_err(ln, format!("unknown header field '{other}'"))),
            }
            continue;
        }
        if seq.is_none() {
            if version.is_none() {
                return Err(parse_err(ln, "missing 'version' header"));
            }
            let (n, d, mode) = match (n, d, mode) {
                (Some(n), Some(d), Some(m)) if n >= 1 => (n, d, m),
                _ => return Err(parse_err(ln, "header must define n >= 1, d and mode")),
            };
            seq = Some(MomentSequence::new(n, d, mode));
        }
        let s = seq.as_mut().expect("initialized above");
        let fields: Vec<&str> = line.split('|').collect();
        match s.mode() {
            SequenceMode::Paired => {
                if fields.len() != 4 {
                    return Err(parse_err(ln, "paired record needs 'alpha | beta | re | im'"));
                }
                let a = parse_index(ln, fields[0], s.n())?;
                let b = parse_index(ln, fields[1], s.n())?;
                let v = Complex64::new(parse_float(ln, fields[2])?, parse_float(ln, fields[3])?);
                s.insert_pair(a, b, v);
            }
            SequenceMode::Hankel => {
                if fields.len() != 3 {
                    return Err(parse_err(ln, "hankel record needs 'alpha | re | im'"));
                }
                let a = parse_index(ln, fields[0], s.n())?;
                let v = Complex64::new(parse_float(ln, fields[1])?, parse_float(ln, fields[2])?);
                s.insert_single(a, v);
            }
        }
    }
    let seq = match seq {
        Some(s) => s,
        None => match (version, n, d, mode) {
            (Some(_), Some(n), Some(d), Some(m)) if n >= 1 => MomentSequence::new(n, d, m),
            _ => return Err(parse_err(0, "incomplete header")),
        },
    };
    seq.check_coverage()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn round_trip_is_exact() {
        let atoms = [vec![c(0.1, -1.0 / 3.0), c(2.5e-17, 7.0)], vec![c(-0.0, 1.0), c(1e300, -1e-300)]];
        for mode in [SequenceMode::Paired, SequenceMode::Hankel] {
            let seq = MomentSequence::from_atoms(mode, 1, &atoms[..1], &[c(0.3, 0.0)]);
            let text = write_sequence(&seq);
            assert_eq!(parse_sequence(&text).unwrap(), seq);
        }
        let mut seq = MomentSequence::new(2, 0, SequenceMode::Hankel);
        seq.insert_single(MultiIndex::zero(2), atoms[1][1]);
        assert_eq!(parse_sequence(&write_sequence(&seq)).unwrap(), seq);
    }

    #[test]
    fn missing_record_is_an_error() {
        let text = "version 1\nn 1\nd 1\nmode paired\n0 | 0 | 1 | 0\n0 | 1 | 0 | 0\n1 | 0 | 0 | 0\n";
        assert!(matches!(parse_sequence(text), Err(MomentError::MissingMoment { .. })));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "version 1\nn 1\nd 0\nmode paired\n0 | 0 | x | 0\n";
        match parse_sequence(text) {
            Err(MomentError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
