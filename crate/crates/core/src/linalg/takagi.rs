use num_complex::Complex64;

use super::{c, hermitian_eig, CMatrix, LinalgError};

/// Autonne-Takagi factorization `S = U diag(values) U^T`.
#[derive(Debug, Clone)]
pub struct TakagiResult {
    pub u: CMatrix,
    pub values: Vec<f64>,
}

impl TakagiResult {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag_real(&self.values);
        &(&self.u * &d) * &self.u.transpose()
    }
}

/// Takagi factorization of a complex symmetric matrix.
///
/// Writing `S = A + iB` and `u = x + iy`, the condition `S conj(u) = σ u` is
/// the real symmetric eigenproblem `[[A, B], [B, -A]] [x; y] = σ [x; y]`.
/// Its spectrum is symmetric about zero; the nonnegative half gives the
/// Takagi values and vectors. Columns for (numerically) zero values are
/// completed to a unitary matrix by Gram-Schmidt.
pub fn takagi(s: &CMatrix, tol: f64) -> Result<TakagiResult, LinalgError> {
    if !s.is_square() {
        return Err(LinalgError::Shape("takagi needs a square matrix".into()));
    }
    if !s.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = s.rows();
    let norm = s.norm_fro();
    let asymmetry = s.symmetric_defect();
    if asymmetry > tol * norm.max(f64::MIN_POSITIVE) && asymmetry > 0.0 {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    if n == 0 {
        return Ok(TakagiResult {
            u: CMatrix::zeros(0, 0),
            values: vec![],
        });
    }
    let sym = CMatrix::from_fn(n, n, |i, j| (s[(i, j)] + s[(j, i)]) * 0.5);
    let embed = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = sym[(ii, jj)];
        let v = match (bi, bj) {
            (0, 0) => z.re,
            (1, 1) => -z.re,
            _ => z.im,
        };
        c(v, 0.0)
    });
    let eig = hermitian_eig(&embed, 1e-12)?;

    let top = eig.max().max(0.0);
    let cut = 1e-13 * top.max(f64::MIN_POSITIVE);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in (n..2 * n).rev() {
        let sigma = eig.eigenvalues[k];
        if sigma <= cut {
            break;
        }
        let u: Vec<Complex64> = (0..n)
            .map(|i| c(eig.vectors[(i, k)].re, eig.vectors[(n + i, k)].re))
            .collect();
        cols.push(u);
        values.push(sigma);
    }
    complete_unitary(&mut cols, n);
    values.resize(n, 0.0);

    let mut u = CMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        u.set_col(j, col);
    }
    Ok(TakagiResult { u, values })
}

fn complete_unitary(cols: &mut Vec<Vec<Complex64>>, n: usize) {
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut v = vec![c(0.0, 0.0); n];
        v[e] = c(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for q in cols.iter() {
                let p = super::dot_c(q, &v);
                for (x, b) in v.iter_mut().zip(q) {
                    *x -= p * b;
                }
            }
        }
        let nv = super::norm2(&v);
        if nv > 1e-8 {
            cols.push(v.iter().map(|z| z / nv).collect());
        }
    }
}
