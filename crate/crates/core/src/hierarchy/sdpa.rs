//! Sparse SDPA text format.
//!
//! The SDPA problem is `min c^T x` subject to `Σ_i x_i F_i − F_0 ⪰ 0`, so a
//! block `C + Σ y_i A_i` is written with `F_0 = −C` and `F_i = A_i`.
//! Equality rows become one diagonal block holding both `a·y − b` and
//! `b − a·y`. The objective constant is kept in a `"` comment line.

use super::{AffineBlock, BlockOrigin, HierarchyError, LinearEquality, RelaxationMap, SdpProblem};
use crate::linalg::{c, CMatrix};
use crate::moment::io::fmt_f64;
use crate::moment::MomentSequence;

const CONSTANT_TAG: &str = "objective_constant";

/// Writes a real problem in sparse SDPA format.
pub fn export_sdpa(s: &SdpProblem) -> Result<String, HierarchyError> {
    if !s.is_real() {
        return Err(HierarchyError::Format("realify the problem before exporting".into()));
    }
    let mut sizes: Vec<i64> = s
        .blocks
        .iter()
        .map(|b| match b.origin {
            BlockOrigin::Equalities => -(b.size() as i64),
            _ => b.size() as i64,
        })
        .collect();
    if !s.equalities.is_empty() {
        sizes.push(-2 * s.equalities.len() as i64);
    }
    let mut out = String::new();
    out.push_str(&format!("\"{CONSTANT_TAG} {}\n", fmt_f64(s.objective_constant)));
    out.push_str(&format!("{}\n{}\n", s.num_vars, sizes.len()));
    out.push_str(&sizes.iter().map(i64::to_string).collect::<Vec<_>>().join(" "));
    out.push('\n');
    out.push_str(&s.objective.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "));
    out.push('\n');

    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (bi, b) in s.blocks.iter().enumerate() {
        push_upper(&mut entries, 0, bi + 1, &b.constant, -1.0);
        for (v, a) in &b.coeffs {
            push_upper(&mut entries, v + 1, bi + 1, a, 1.0);
        }
    }
    if !s.equalities.is_empty() {
        let blk = s.blocks.len() + 1;
        let m = s.equalities.len();
        for (r, eq) in s.equalities.iter().enumerate() {
            let (p, q) = (r + 1, m + r + 1);
            // a·y − b ≥ 0 and b − a·y ≥ 0; F_0 holds +b and −b
            if eq.rhs != 0.0 {
                entries.push((0, blk, p, p, eq.rhs));
                entries.push((0, blk, q, q, -eq.rhs));
            }
            for (v, a) in &eq.coeffs {
                entries.push((v + 1, blk, p, p, *a));
                entries.push((v + 1, blk, q, q, -a));
            }
        }
    }
    entries.sort_by_key(|a| (a.0, a.1, a.2, a.3));
    for (mat, blk, i, j, v) in entries {
        out.push_str(&format!("{mat} {blk} {i} {j} {}\n", fmt_f64(v)));
    }
    Ok(out)
}

fn push_upper(out: &mut Vec<(usize, usize, usize, usize, f64)>, mat: usize, blk: usize, m: &CMatrix, sign: f64) {
    for i in 0..m.rows() {
        for j in i..m.cols() {
            let v = m[(i, j)].re;
            if v != 0.0 {
                out.push((mat, blk, i + 1, j + 1, sign * v));
            }
        }
    }
}

/// Reads a sparse SDPA problem. Diagonal blocks (negative sizes) are stored
/// as dense diagonal matrices tagged `BlockOrigin::Equalities`.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem, HierarchyError> {
    let mut constant = 0.0;
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('"') {
            if let Some(v) = rest.trim().strip_prefix(CONSTANT_TAG) {
                constant = v
                    .trim()
                    .parse()
                    .map_err(|_| fmt_err(ln + 1, "bad objective constant"))?;
            }
            continue;
        }
        if line.starts_with('*') || line.is_empty() {
            continue;
        }
        let cleaned = line.replace([',', '{', '}', '(', ')'], " ");
        for t in cleaned.split_whitespace() {
            tokens.push((ln + 1, t.to_string()));
        }
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| fmt_err(0, &format!("missing {what}")));
    let (ln, t) = next("m")?;
    let m: usize = t.parse().map_err(|_| fmt_err(ln, "bad m"))?;
    let (ln, t) = next("nblocks")?;
    let nb: usize = t.parse().map_err(|_| fmt_err(ln, "bad nblocks"))?;
    let mut sizes = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, t) = next("block size")?;
        let v: i64 = t.parse().map_err(|_| fmt_err(ln, "bad block size"))?;
        if v == 0 {
            return Err(fmt_err(ln, "zero block size"));
        }
        sizes.push(v);
    }
    let mut objective = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, t) = next("objective coefficient")?;
        objective.push(t.parse::<f64>().map_err(|_| fmt_err(ln, "bad objective coefficient"))?);
    }
    let mut mats: Vec<Vec<CMatrix>> = sizes
        .iter()
        .map(|s| {
            let k = s.unsigned_abs() as usize;
            vec![CMatrix::zeros(k, k); m + 1]
        })
        .collect();
    let rest: Vec<(usize, String)> = it.collect();
    if !rest.len().is_multiple_of(5) {
        let ln = rest.last().map_or(0, |t| t.0);
        return Err(fmt_err(ln, "entry lines need 5 fields"));
    }
    for chunk in rest.chunks(5) {
        let ln = chunk[0].0;
        let num = |k: usize| -> Result<usize, HierarchyError> {
            chunk[k].1.parse().map_err(|_| fmt_err(ln, "bad entry index"))
        };
        let (mat, blk, i, j) = (num(0)?, num(1)?, num(2)?, num(3)?);
        let v: f64 = chunk[4].1.parse().map_err(|_| fmt_err(ln, "bad entry value"))?;
        if mat > m || blk == 0 || blk > nb {
            return Err(fmt_err(ln, "entry references an unknown matrix or block"));
        }
        let size = sizes[blk - 1];
        let k = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > k || j > k || (size < 0 && i != j) {
            return Err(fmt_err(ln, "entry outside its block"));
        }
        let sign = if mat == 0 { -1.0 } else { 1.0 };
        let target = &mut mats[blk - 1][mat];
        target[(i - 1, j - 1)] = c(sign * v, 0.0);
        target[(j - 1, i - 1)] = c(sign * v, 0.0);
    }
    let blocks = mats
        .into_iter()
        .zip(&sizes)
        .map(|(mut ms, size)| {
            let constant = std::mem::replace(&mut ms[0], CMatrix::zeros(0, 0));
            let coeffs = ms
                .into_iter()
                .enumerate()
                .skip(1)
                .filter(|(_, a)| a.max_abs() > 0.0)
                .map(|(i, a)| (i - 1, a))
                .collect();
            AffineBlock {
                origin: if *size < 0 {
                    BlockOrigin::Equalities
                } else {
                    BlockOrigin::Imported
                },
                constant,
                coeffs,
            }
        })
        .collect();
    Ok(SdpProblem {
        num_vars: m,
        objective,
        objective_constant: constant,
        blocks,
        equalities: Vec::<LinearEquality>::new(),
    })
}

fn fmt_err(line: usize, msg: &str) -> HierarchyError {
    HierarchyError::Format(if line == 0 {
        msg.to_string()
    } else {
        format!("line {line}: {msg}")
    })
}

/// Parses a whitespace-separated solution vector and maps it back to moments.
pub fn import_solution(text: &str, map: &RelaxationMap) -> Result<MomentSequence, HierarchyError> {
    let y: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| HierarchyError::Format(format!("bad number '{t}'"))))
        .collect::<Result<_, _>>()?;
    map.to_sequence(&y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SdpProblem {
        // min x s.t. [[x, 1], [1, x]] ⪰ 0
        SdpProblem {
            num_vars: 1,
            objective: vec![1.0],
            objective_constant: 0.0,
            blocks: vec![AffineBlock {
                origin: BlockOrigin::Moment,
                constant: CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
                coeffs: vec![(0, CMatrix::identity(2))],
            }],
            equalities: vec![],
        }
    }

    #[test]
    fn toy_golden_file() {
        let want = "\"objective_constant 0.0\n1\n1\n2\n1.0\n0 1 1 2 -1.0\n1 1 1 1 1.0\n1 1 2 2 1.0\n";
        assert_eq!(export_sdpa(&toy()).unwrap(), want);
    }

    #[test]
    fn export_parse_export_is_stable() {
        let mut p = toy();
        p.equalities.push(LinearEquality {
            coeffs: vec![(0, 2.0)],
            rhs: 3.0,
        });
        let a = export_sdpa(&p).unwrap();
        let q = parse_sdpa(&a).unwrap();
        assert_eq!(q.block_sizes(), vec![2, 2]);
        assert_eq!(export_sdpa(&q).unwrap(), a);
    }

    #[test]
    fn malformed_entry_is_rejected() {
        let text = "1\n1\n2\n1.0\n0 1 3 3 1.0\n";
        assert!(matches!(parse_sdpa(text), Err(HierarchyError::Format(_))));
    }
}
