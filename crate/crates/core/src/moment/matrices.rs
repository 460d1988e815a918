use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use super::{enumerate_indices, MomentError, MomentSequence, MultiIndex, Polynomial, SequenceMode};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Moment,
    Localizing,
    Hankel,
    HypoBlock,
}

/// Dense matrix with multi-index row and column labels.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: CMatrix,
    pub row_labels: Vec<MultiIndex>,
    pub col_labels: Vec<MultiIndex>,
    pub kind: MatrixKind,
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

/// `M_d(y)`: entry `(α, β)` is `y_{α,β}` (paired) or `y_{α+β}` (Hankel).
pub fn moment_matrix(seq: &MomentSequence, d: u32) -> Result<MomentMatrix, MomentError> {
    let idx = enumerate_indices(seq.n(), d);
    let matrix = fill(&idx, &idx, |a, b| seq.get(a, b))?;
    let kind = match seq.mode() {
        SequenceMode::Paired => MatrixKind::Moment,
        SequenceMode::Hankel => MatrixKind::Hankel,
    };
    Ok(MomentMatrix {
        matrix,
        row_labels: idx.clone(),
        col_labels: idx,
        kind,
    })
}

/// `H_d(y) = (y_{α+β})`, a complex symmetric matrix.
pub fn hankel_matrix(seq: &MomentSequence, d: u32) -> Result<MomentMatrix, MomentError> {
    if seq.mode() != SequenceMode::Hankel {
        return Err(MomentError::ModeMismatch("hankel_matrix needs hankel-mode data".into()));
    }
    moment_matrix(seq, d)
}

/// `M_{d-k}(g y)`: entry `(α, β)` is `Σ g_{γ,δ} y_{α+γ, β+δ}`, with `k` the
/// half-degree of `g`.
pub fn localizing_matrix(
    seq: &MomentSequence,
    g: &Polynomial,
    d: u32,
) -> Result<MomentMatrix, MomentError> {
    if seq.mode() != SequenceMode::Paired {
        return Err(MomentError::ModeMismatch("localizing matrices need paired data".into()));
    }
    let k = g.half_degree();
    if d < k {
        return Err(MomentError::OrderTooSmall { d, k });
    }
    let idx = enumerate_indices(seq.n(), d - k);
    let terms: Vec<(&(MultiIndex, MultiIndex), &Complex64)> = g.terms().collect();
    let matrix = fill(&idx, &idx, |a, b| {
        let mut s = Complex64::new(0.0, 0.0);
        for ((gm, dl), v) in &terms {
            s += **v * seq.get(&a.add(gm), &b.add(dl))?;
        }
        Ok(s)
    })?;
    Ok(MomentMatrix {
        matrix,
        row_labels: idx.clone(),
        col_labels: idx,
        kind: MatrixKind::Localizing,
    })
}

/// Data-level hyponormality block at truncation `d` and gap `dk`.
///
/// `vars` holds one (univariate form) or two zero-based variable indices.
/// With shifts `s_0 = 0, s_1 = e_i, s_2 = e_j`, block `(a, b)` is the matrix
/// `(y_{α+s_b, β+s_a})` over `|α|, |β| <= d - dk`, i.e. block `(1, 2)` is
/// `M(conj(z_i) y)` and block `(2, 3)` is `M(conj(z_j) z_i y)`.
pub fn hyponormality_block(
    seq: &MomentSequence,
    d: u32,
    dk: u32,
    vars: &[usize],
) -> Result<MomentMatrix, MomentError> {
    if seq.mode() != SequenceMode::Paired {
        return Err(MomentError::ModeMismatch("hyponormality blocks need paired data".into()));
    }
    if d < dk || d == 0 {
        return Err(MomentError::OrderTooSmall { d, k: dk.max(1) });
    }
    let n = seq.n();
    if vars.is_empty() || vars.len() > 2 || vars.iter().any(|&v| v >= n) {
        return Err(MomentError::Shape(format!("invalid variable selection {vars:?} for n = {n}")));
    }
    let idx = enumerate_indices(n, d - dk);
    let mut shifts = vec![MultiIndex::zero(n)];
    shifts.extend(vars.iter().map(|&v| MultiIndex::unit(n, v)));
    let mut grid = Vec::with_capacity(shifts.len());
    for sa in &shifts {
        let mut row = Vec::with_capacity(shifts.len());
        for sb in &shifts {
            row.push(fill(&idx, &idx, |a, b| seq.get(&a.add(sb), &b.add(sa)))?);
        }
        grid.push(row);
    }
    let mut labels = Vec::new();
    for _ in &shifts {
        labels.extend(idx.iter().cloned());
    }
    Ok(MomentMatrix {
        matrix: CMatrix::block(&grid),
        row_labels: labels.clone(),
        col_labels: labels,
        kind: MatrixKind::HypoBlock,
    })
}

fn fill(
    rows: &[MultiIndex],
    cols: &[MultiIndex],
    mut f: impl FnMut(&MultiIndex, &MultiIndex) -> Result<Complex64, MomentError>,
) -> Result<CMatrix, MomentError> {
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for a in rows {
        for b in cols {
            data.push(f(a, b)?);
        }
    }
    CMatrix::from_vec(rows.len(), cols.len(), data).map_err(MomentError::Linalg)
}

/// Structure flags of a moment or Hankel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Structure {
    pub hermitian: bool,
    pub hankel: bool,
    pub toeplitz: bool,
}

/// Default absolute tolerance for structure classification.
pub const DEFAULT_STRUCTURE_TOL: f64 = 1e-9;

/// Classifies `m` as Hermitian, Hankel (entries depend on `α+β` only) and/or
/// Toeplitz (entries depend on `α−β` only), each to absolute tolerance `tol`.
pub fn classify_structure(m: &MomentMatrix, tol: f64) -> Structure {
    let a = &m.matrix;
    let hermitian = a.is_square() && {
        let mut ok = true;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                ok &= (a[(i, j)] - a[(j, i)].conj()).norm() <= tol;
            }
        }
        ok
    };
    let mut by_sum: HashMap<MultiIndex, Complex64> = HashMap::new();
    let mut by_diff: HashMap<Vec<i64>, Complex64> = HashMap::new();
    let mut hankel = true;
    let mut toeplitz = true;
    for (i, ra) in m.row_labels.iter().enumerate() {
        for (j, cb) in m.col_labels.iter().enumerate() {
            let v = a[(i, j)];
            let s = by_sum.entry(ra.add(cb)).or_insert(v);
            hankel &= (*s - v).norm() <= tol;
            let t = by_diff.entry(ra.diff(cb)).or_insert(v);
            toeplitz &= (*t - v).norm() <= tol;
        }
    }
    Structure {
        hermitian,
        hankel,
        toeplitz,
    }
}
