use num_complex::Complex64;

use super::{c, CMatrix, LinalgError};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// a unitary matrix of eigenvectors (one per column).
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// The input is accepted if `||A - A^*||_F <= tol * max(||A||_F, 1)`; it is
/// symmetrized before iterating.
pub fn hermitian_eig(a: &CMatrix, tol: f64) -> Result<EigResult, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let scale = a.norm_fro();
    let asymmetry = a.hermitian_defect();
    if asymmetry > tol * scale.max(1.0) {
        return Err(LinalgError::NotHermitian { asymmetry });
    }

    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_cols(&order);
    Ok(EigResult {
        eigenvalues,
        vectors,
    })
}

/// One complex Jacobi rotation annihilating `m[p][q]`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let babs = b.norm();
    if babs == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = b / babs;
    let theta = (aqq - app) / (2.0 * babs);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    // V = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let vpp = c(cs, 0.0);
    let vpq = c(sn, 0.0);
    let vqp = phase.conj() * (-sn);
    let vqq = phase.conj() * cs;

    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * vpp + akq * vqp;
        m[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        m[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    m[(p, q)] = c(0.0, 0.0);
    m[(q, p)] = c(0.0, 0.0);
    m[(p, p)] = c(m[(p, p)].re, 0.0);
    m[(q, q)] = c(m[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// Eigenvalues and unit-norm eigenvectors of a general complex matrix.
#[derive(Debug, Clone)]
pub struct GeneralEig {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
}

/// Eigendecomposition of a general square complex matrix via Hessenberg
/// reduction and shifted QR iteration to Schur form, followed by
/// back-substitution for the eigenvectors.
pub fn eig_general(a: &CMatrix) -> Result<GeneralEig, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok(GeneralEig {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let (mut h, mut q) = hessenberg(a);
    schur_qr(&mut h, &mut q)?;

    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut y = vec![c(0.0, 0.0); n];
        y[k] = c(1.0, 0.0);
        for j in (0..k).rev() {
            let s: Complex64 = ((j + 1)..=k).map(|l| h[(j, l)] * y[l]).sum();
            let mut denom = h[(j, j)] - values[k];
            if denom.norm() < small {
                denom = c(small, 0.0);
            }
            y[j] = -s / denom;
        }
        let mut v = q.mul_vec(&y);
        let nv = super::norm2(&v);
        for z in &mut v {
            *z /= nv;
        }
        vectors.set_col(k, &v);
    }
    Ok(GeneralEig { values, vectors })
}

/// Householder reduction `A = Q H Q^*` with `H` upper Hessenberg.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let xnorm = super::norm2(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            c(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = super::norm2(&v);
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // H <- (I - 2 v v^*) H (I - 2 v v^*), acting on indices k+1..n
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= vi * s * 2.0;
            }
        }
        for mat in [&mut h, &mut q] {
            for i in 0..n {
                let s: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(j, vj)| mat[(i, k + 1 + j)] * vj)
                    .sum();
                for (j, vj) in v.iter().enumerate() {
                    mat[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = c(0.0, 0.0);
        }
    }
    (h, q)
}

/// Shifted QR iteration on a Hessenberg matrix, reducing it in place to upper
/// triangular (Schur) form and accumulating the unitary factor into `q`.
fn schur_qr(h: &mut CMatrix, q: &mut CMatrix) -> Result<(), LinalgError> {
    let n = h.rows();
    let max_iter = 60 * n.max(1);
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) || sub < 1e-300 {
                h[(l, l - 1)] = c(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total += 1;
        iter_since_deflation += 1;
        if total > max_iter {
            return Err(LinalgError::NoConvergence { iterations: total });
        }

        let mu = if iter_since_deflation % 11 == 10 {
            h[(hi, hi)] + c(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cc, ss) = if r == 0.0 {
                (c(1.0, 0.0), c(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            // G = [[conj(c), conj(s)], [-s, c]]
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = cc.conj() * a + ss.conj() * b;
                h[(k + 1, j)] = -ss * a + cc * b;
            }
            rotations.push((cc, ss));
        }
        for (idx, &(cc, ss)) in rotations.iter().enumerate() {
            let k = l + idx;
            // right-multiply by G^* = [[c, -conj(s)], [s, conj(c)]]
            let row_end = (k + 2).min(hi + 1);
            for i in 0..row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * cc + b * ss;
                h[(i, k + 1)] = -a * ss.conj() + b * cc.conj();
            }
            for i in 0..n {
                let a = q[(i, k)];
                let b = q[(i, k + 1)];
                q[(i, k)] = a * cc + b * ss;
                q[(i, k + 1)] = -a * ss.conj() + b * cc.conj();
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = c(0.0, 0.0);
        }
    }
    Ok(())
}

fn wilkinson_shift(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * cc).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}
