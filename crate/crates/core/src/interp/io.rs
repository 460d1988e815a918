//! Text format for exponential-sum models.
//!
//! ```text
//! version 1
//! n 2
//! 0.0 | 0.25 | -0.1 | 0.4 | 0.05 | -0.8
//! ```
//!
//! Each record is `w_re | w_im | f1_re | f1_im | ...`.

use num_complex::Complex64;

use super::{ExpSumModel, ExpTerm, InterpError};
use crate::moment::io::{content_lines, fmt_f64, parse_err, parse_float};

pub fn write_model(m: &ExpSumModel) -> String {
    let mut out = format!("version 1\nn {}\n", m.n);
    for t in &m.terms {
        let mut fields = vec![fmt_f64(t.weight.re), fmt_f64(t.weight.im)];
        for f in &t.frequency {
            fields.push(fmt_f64(f.re));
            fields.push(fmt_f64(f.im));
        }
        out.push_str(&fields.join(" | "));
        out.push('\n');
    }
    out
}

pub fn parse_model(text: &str) -> Result<ExpSumModel, InterpError> {
    let mut version = false;
    let mut n: Option<usize> = None;
    let mut terms = Vec::new();
    for (ln, line) in content_lines(text) {
        if !line.contains('|') {
            let (key, val) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(ln, format!("expected 'key value', got '{line}'")))?;
            match (key, val.trim()) {
                ("version", "1") => version = true,
                ("version", v) => return Err(parse_err(ln, format!("unsupported version {v}")).into()),
                ("n", v) => n = Some(v.parse().map_err(|_| parse_err(ln, "bad n"))?),
                (k, _) => return Err(parse_err(ln, format!("unknown header field '{k}'")).into()),
            }
            continue;
        }
        let n = n.ok_or_else(|| parse_err(ln, "record before 'n'"))?;
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 2 + 2 * n {
            return Err(parse_err(ln, format!("expected {} fields, got {}", 2 + 2 * n, fields.len())).into());
        }
        let vals = fields
            .iter()
            .map(|f| parse_float(ln, f))
            .collect::<Result<Vec<f64>, _>>()?;
        terms.push(ExpTerm {
            weight: Complex64::new(vals[0], vals[1]),
            frequency: vals[2..].chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
        });
    }
    if !version {
        return Err(parse_err(0, "missing 'version' header").into());
    }
    let n = n.ok_or_else(|| parse_err(0, "missing 'n'"))?;
    ExpSumModel::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = crate::interp::tests::example7();
        assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
    }

    #[test]
    fn wrong_field_count() {
        let text = "version 1\nn 2\n1 | 0 | 0 | 0\n";
        assert!(parse_model(text).is_err());
    }
}
