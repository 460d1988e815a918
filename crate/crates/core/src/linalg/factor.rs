use num_complex::Complex64;

use super::{c, hermitian_eig, CMatrix, LinalgError};

/// Cholesky factor `L` (lower triangular, positive real diagonal) with
/// `A = L L^*`. Fails with `Singular` at the first non-positive pivot.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape("cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return Err(LinalgError::Singular { pivot: j });
        }
        let djj = d.sqrt();
        l[(j, j)] = c(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = l.rows();
    if !l.is_square() || b.rows() != n {
        return Err(LinalgError::Shape("solve_lower dimension mismatch".into()));
    }
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            if l[(i, i)].norm() == 0.0 {
                return Err(LinalgError::Singular { pivot: i });
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Solves `U X = B` for upper-triangular `U`.
pub fn solve_upper(u: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = u.rows();
    if !u.is_square() || b.rows() != n {
        return Err(LinalgError::Shape("solve_upper dimension mismatch".into()));
    }
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in (i + 1)..n {
                s -= u[(i, k)] * x[(k, col)];
            }
            if u[(i, i)].norm() == 0.0 {
                return Err(LinalgError::Singular { pivot: i });
            }
            x[(i, col)] = s / u[(i, i)];
        }
    }
    Ok(x)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(LinalgError::Shape("lu_solve dimension mismatch".into()));
    }
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))
            .unwrap_or(k);
        if m[(p, k)].norm() <= f64::EPSILON * scale || m[(p, k)].norm() == 0.0 {
            return Err(LinalgError::Singular { pivot: k });
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        let piv = m[(k, k)];
        for i in (k + 1)..n {
            let f = m[(i, k)] / piv;
            if f == c(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    solve_upper(&m, &x)
}

/// Number of eigenvalues with `|λ| > tol * max(1, max |λ|)`.
pub fn numeric_rank(eigenvalues: &[f64], tol: f64) -> usize {
    let top = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tol * top.max(1.0);
    eigenvalues.iter().filter(|v| v.abs() > cut).count()
}

/// Greedy left-to-right column basis.
///
/// Column `j` joins the basis when its component orthogonal to the columns
/// already chosen has norm above `tol * ||x_j||`. Selection stops once the
/// basis has as many columns as `x` has rows.
pub fn column_basis(x: &CMatrix, tol: f64) -> Vec<usize> {
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    let mut chosen = Vec::new();
    for j in 0..x.cols() {
        if chosen.len() == x.rows() {
            break;
        }
        let col = x.col(j);
        let norm = super::norm2(&col);
        if norm == 0.0 {
            continue;
        }
        let res = orthogonal_residual(&q, &col);
        let rn = super::norm2(&res);
        if rn > tol * norm {
            q.push(res.iter().map(|z| z / rn).collect());
            chosen.push(j);
        }
    }
    chosen
}

fn orthogonal_residual(q: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let mut res = v.to_vec();
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for qk in q {
            let p = super::dot_c(qk, &res);
            for (r, b) in res.iter_mut().zip(qk) {
                *r -= p * b;
            }
        }
    }
    res
}

/// Root factor `X` (r x N) of a Hermitian PSD matrix with `X^* X ≈ A`.
///
/// `r` is the numeric rank. The factor is the truncated eigen root
/// `sqrt(Λ_r) V_r^*` rotated by the unitary QR factor of its basis columns:
/// with `b` the earliest independent set of columns, `X[:, b]` is upper
/// triangular with a positive real diagonal. Truncation discards the
/// eigenvalues below the rank threshold, so `||X^* X − A||` is bounded by
/// them.
pub fn psd_root_factor(a: &CMatrix, tol: f64) -> Result<CMatrix, LinalgError> {
    psd_root_factor_with(a, tol, tol)
}

/// As [`psd_root_factor`] with separate thresholds: eigenvalues below
/// `-psd_tol * ||a||` are rejected, and the rank counts eigenvalues above
/// `rank_tol * max(1, λ_max)`.
pub fn psd_root_factor_with(a: &CMatrix, rank_tol: f64, psd_tol: f64) -> Result<CMatrix, LinalgError> {
    let scale = a.norm_fro();
    let eig = hermitian_eig(a, psd_tol.max(1e-12))?;
    if eig.min() < -psd_tol * scale {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let n = a.rows();
    let r = numeric_rank(&eig.eigenvalues, rank_tol);
    if r == 0 {
        return Ok(CMatrix::zeros(0, n));
    }
    let top: Vec<usize> = ((n - r)..n).collect();
    let x0 = CMatrix::from_fn(r, n, |i, j| {
        let k = top[i];
        eig.vectors[(j, k)].conj() * eig.eigenvalues[k].max(0.0).sqrt()
    });
    let basis = full_basis(&x0, rank_tol.sqrt());
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    for &j in &basis {
        let res = orthogonal_residual(&q, &x0.col(j));
        let rn = super::norm2(&res);
        if rn.is_nan() || rn <= 0.0 {
            return Ok(x0);
        }
        q.push(res.iter().map(|z| z / rn).collect());
    }
    let x = CMatrix::from_fn(r, n, |i, j| {
        (0..r).map(|k| q[i][k].conj() * x0[(k, j)]).sum()
    });
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Greedy basis topped up by largest-residual columns until it has
/// `rows` entries.
fn full_basis(x: &CMatrix, tol: f64) -> Vec<usize> {
    let mut basis = column_basis(x, tol);
    while basis.len() < x.rows() {
        let q: Vec<Vec<Complex64>> = {
            let mut q: Vec<Vec<Complex64>> = Vec::new();
            for &j in &basis {
                let res = orthogonal_residual(&q, &x.col(j));
                let rn = super::norm2(&res);
                q.push(res.iter().map(|z| z / rn).collect());
            }
            q
        };
        let best = (0..x.cols())
            .filter(|j| !basis.contains(j))
            .map(|j| (j, super::norm2(&orthogonal_residual(&q, &x.col(j)))))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, rn)) if rn > 0.0 => {
                basis.push(j);
                basis.sort_unstable();
            }
            _ => break,
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&[0.0, 0.0, 6.0], 1e-8), 1);
        assert_eq!(numeric_rank(&[0.0, 0.0, 0.0], 1e-8), 0);
        assert_eq!(numeric_rank(&[1e-12, 0.5, 2.0], 1e-8), 2);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = CMatrix::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, 1.0)],
            vec![c(1.0, -1.0), c(3.0, 0.0)],
        ]);
        let l = cholesky(&a).unwrap();
        assert!((&(&l * &l.adjoint()) - &a).norm_fro() < 1e-14);
    }

    #[test]
    fn lu_solves_system() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(2.0, 1.0), c(1.0, 0.0)],
        ]);
        let b = CMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![c(0.0, 1.0)]]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((&(&a * &x) - &b).norm_fro() < 1e-14);
    }

    #[test]
    fn root_factor_of_rank_one_example() {
        let a = CMatrix::from_real_rows(&[
            vec![1.0, 1.0, 2.0],
            vec![1.0, 1.0, 2.0],
            vec![2.0, 2.0, 4.0],
        ]);
        let x = psd_root_factor(&a, 1e-9).unwrap();
        assert_eq!(x.rows(), 1);
        for (got, want) in x.row(0).iter().zip([1.0, 1.0, 2.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn root_factor_identity() {
        let x = psd_root_factor(&CMatrix::identity(3), 1e-9).unwrap();
        assert!((&x - &CMatrix::identity(3)).norm_fro() < 1e-12);
    }

    #[test]
    fn root_factor_rejects_indefinite() {
        let a = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(matches!(
            psd_root_factor(&a, 1e-9),
            Err(LinalgError::NotPsd { .. })
        ));
    }

    #[test]
    fn basis_of_zero_matrix_is_empty() {
        assert!(column_basis(&CMatrix::zeros(2, 4), 1e-8).is_empty());
    }

    #[test]
    fn basis_skips_dependent_columns() {
        let x = CMatrix::from_real_rows(&[vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 0.0, 3.0, 1.0]]);
        assert_eq!(column_basis(&x, 1e-8), vec![0, 2]);
    }
}
