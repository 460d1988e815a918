//! Text format for atomic measures.
//!
//! ```text
//! version 1
//! mode conjugate_transpose
//! n 2
//! 0.5 | 0.0 | -1.3934 | -0.1396 | 1.0193 | 0.0
//! ```
//!
//! Each record is `weight_re | weight_im | z1_re | z1_im | ...`.

use num_complex::Complex64;

use super::{AtomicMeasure, Mode};
use crate::moment::io::{content_lines, fmt_f64, parse_err, parse_float};
use crate::moment::MomentError;

pub fn write_measure(m: &AtomicMeasure) -> String {
    let mut out = format!("version 1\nmode {}\nn {}\n", m.mode.as_str(), m.n());
    for (a, w) in m.atoms.iter().zip(&m.weights) {
        let mut fields = vec![fmt_f64(w.re), fmt_f64(w.im)];
        for z in a {
            fields.push(fmt_f64(z.re));
            fields.push(fmt_f64(z.im));
        }
        out.push_str(&fields.join(" | "));
        out.push('\n');
    }
    out
}

pub fn parse_measure(text: &str) -> Result<AtomicMeasure, MomentError> {
    let mut version = false;
    let mut mode = None;
    let mut n: Option<usize> = None;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in content_lines(text) {
        if !line.contains('|') {
            let (key, val) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(ln, format!("expected 'key value', got '{line}'")))?;
            match (key, val.trim()) {
                ("version", "1") => version = true,
                ("version", v) => return Err(parse_err(ln, format!("unsupported version {v}"))),
                ("mode", "conjugate_transpose") => mode = Some(Mode::ConjugateTranspose),
                ("mode", "transpose") => mode = Some(Mode::Transpose),
                ("n", v) => {
                    n = Some(v.parse().map_err(|_| parse_err(ln, "bad n"))?);
                }
                (k, _) => return Err(parse_err(ln, format!("unknown header field '{k}'"))),
            }
            continue;
        }
        let n = n.ok_or_else(|| parse_err(ln, "record before 'n'"))?;
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 2 + 2 * n {
            return Err(parse_err(ln, format!("expected {} fields, got {}", 2 + 2 * n, fields.len())));
        }
        let vals = fields
            .iter()
            .map(|f| parse_float(ln, f))
            .collect::<Result<Vec<f64>, _>>()?;
        weights.push(Complex64::new(vals[0], vals[1]));
        atoms.push(vals[2..].chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    if !version {
        return Err(parse_err(0, "missing 'version' header"));
    }
    let mode = mode.ok_or_else(|| parse_err(0, "missing 'mode'"))?;
    Ok(AtomicMeasure {
        mode,
        atoms,
        weights,
    })
}
