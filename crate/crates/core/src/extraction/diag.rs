use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExtractionError, Mode, ShiftFamily};
use crate::linalg::{c, eig_general, hermitian_eig, CMatrix};

/// Redraws allowed before giving up on a random combination.
pub const MAX_ATTEMPTS: usize = 20;

/// Transpose-mode eigenvectors with `|p^T p| < ISOTROPY_TOL` (unit `p`) are
/// rejected.
pub const ISOTROPY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// Columns are the common eigenvectors, normalized so `P^• P ≈ I`.
    pub p: CMatrix,
    /// `coords[k][j]` is entry `j` of the diagonal of `P^• T_k P`.
    pub coords: Vec<Vec<Complex64>>,
    /// Combination coefficients that were accepted.
    pub t: Vec<f64>,
    pub attempts: usize,
    /// `max_k ||offdiag(P^• T_k P)|| / max(1, ||T_k||)`.
    pub offdiag: f64,
}

/// Diagonalizes `Σ t_k T_k` for random `t ∈ [-1, 1]^n` drawn from a ChaCha8
/// stream seeded with `seed`, redrawing on clustered eigenvalues or isotropic
/// eigenvectors.
pub fn simultaneous_diagonalize(
    family: &ShiftFamily,
    seed: u64,
    separation: f64,
) -> Result<Diagonalization, ExtractionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = family.shifts.len();
    let mut last = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        match diagonalize_combination(family, &t, separation) {
            Ok(mut d) => {
                d.attempts = attempt;
                return Ok(d);
            }
            Err(e @ ExtractionError::DegenerateCombination { .. })
            | Err(e @ ExtractionError::IsotropicEigenvector { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(match last {
        Some(ExtractionError::IsotropicEigenvector { .. }) => ExtractionError::IsotropicEigenvector {
            attempts: MAX_ATTEMPTS,
        },
        _ => ExtractionError::DegenerateCombination {
            attempts: MAX_ATTEMPTS,
        },
    })
}

/// One diagonalization attempt with fixed coefficients `t`.
pub fn diagonalize_combination(
    family: &ShiftFamily,
    t: &[f64],
    separation: f64,
) -> Result<Diagonalization, ExtractionError> {
    let r = family.rank();
    let mut comb = CMatrix::zeros(r, r);
    for (tk, s) in family.shifts.iter().zip(t) {
        comb = &comb + &tk.scale(c(*s, 0.0));
    }
    let p = match family.mode {
        Mode::ConjugateTranspose => normal_eigenvectors(&comb, separation)?,
        Mode::Transpose => symmetric_eigenvectors(&comb, separation)?,
    };
    let pa = family.mode.adjoint(&p);
    let mut coords = Vec::with_capacity(family.shifts.len());
    let mut offdiag = 0.0_f64;
    for tk in &family.shifts {
        let dmat = &(&pa * tk) * &p;
        coords.push(dmat.diagonal());
        offdiag = offdiag.max(dmat.max_offdiag() / tk.norm_fro().max(1.0));
    }
    Ok(Diagonalization {
        p,
        coords,
        t: t.to_vec(),
        attempts: 1,
        offdiag,
    })
}

fn check_separation(values: &[Complex64], separation: f64) -> Result<(), ExtractionError> {
    let mut spread = 0.0_f64;
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let dist = (values[i] - values[j]).norm();
            spread = spread.max(dist);
            gap = gap.min(dist);
        }
    }
    if values.len() > 1 && (gap.is_nan() || gap <= separation * spread) {
        return Err(ExtractionError::DegenerateCombination { attempts: 1 });
    }
    Ok(())
}

/// Unitary eigenvectors of a normal matrix: diagonalize the Hermitian part,
/// then the skew part inside each cluster of Hermitian eigenvalues.
fn normal_eigenvectors(a: &CMatrix, separation: f64) -> Result<CMatrix, ExtractionError> {
    let r = a.rows();
    let h = a.hermitian_part();
    let k = (a - &a.adjoint()).scale(c(0.0, -0.5));
    let eh = hermitian_eig(&h, 1e-6)?;
    let lam = &eh.eigenvalues;
    let spread = lam.last().copied().unwrap_or(0.0) - lam.first().copied().unwrap_or(0.0);
    let cut = separation * spread.max(a.norm_fro() * f64::EPSILON.sqrt());
    let mut p = eh.vectors.clone();
    let mut start = 0;
    while start < r {
        let mut end = start + 1;
        while end < r && lam[end] - lam[end - 1] <= cut {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = (start..end).collect();
            let v = eh.vectors.select_cols(&cols);
            let kk = (&(&v.adjoint() * &k) * &v).hermitian_part();
            let ek = hermitian_eig(&kk, 1e-6)?;
            let w = &v * &ek.vectors;
            for (o, j) in cols.iter().enumerate() {
                p.set_col(*j, &w.col(o));
            }
        }
        start = end;
    }
    let values: Vec<Complex64> = (0..r)
        .map(|j| {
            let col = p.col(j);
            crate::linalg::dot_c(&col, &a.mul_vec(&col))
        })
        .collect();
    check_separation(&values, separation)?;
    Ok(p)
}

/// Eigenvectors of a complex symmetric diagonalizable matrix, normalized so
/// that `p^T p = 1`.
fn symmetric_eigenvectors(a: &CMatrix, separation: f64) -> Result<CMatrix, ExtractionError> {
    let ge = eig_general(a)?;
    check_separation(&ge.values, separation)?;
    let mut p = ge.vectors.clone();
    for j in 0..a.rows() {
        let col = ge.vectors.col(j);
        let s = crate::linalg::dot_t(&col, &col);
        if s.norm() < ISOTROPY_TOL {
            return Err(ExtractionError::IsotropicEigenvector { attempts: 1 });
        }
        let f = s.sqrt();
        let scaled: Vec<Complex64> = col.iter().map(|z| z / f).collect();
        p.set_col(j, &scaled);
    }
    Ok(p)
}
