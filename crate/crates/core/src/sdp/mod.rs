//! Dense primal-dual interior-point solver for the relaxations built by
//! [`crate::hierarchy`].
//!
//! The relaxation `min b·y s.t. C + Σ y_i A_i ⪰ 0, E y = e` is first reduced
//! to free variables by parametrizing the affine solution set of the
//! equalities. The remaining pair
//!
//! ```text
//! (moment)  min  b·u         s.t.  Z = C + Σ u_k A_k ⪰ 0
//! (dual)    max  −<C, X>     s.t.  <A_k, X> = b_k,  X ⪰ 0
//! ```
//!
//! is solved by an infeasible-start path-following method on its homogeneous
//! self-dual embedding, with the HKM search direction and a Mehrotra
//! predictor-corrector step. Iterates are not feasible pairs until the
//! residuals vanish, so weak duality is only meaningful on iterates whose
//! residuals are small; see [`Solution::weak_duality_violation`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::hierarchy::{realify, SdpProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)` to stop at.
    pub gap_tolerance: f64,
    /// Relative primal and dual residual norms to stop at.
    pub feasibility_tolerance: f64,
    /// Fraction of the distance to the PSD boundary taken per step.
    pub step_damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gap_tolerance: 1e-8,
            feasibility_tolerance: 1e-8,
            step_damping: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    MaxIter,
    /// Progress stopped (a factorization failed or the step collapsed) before
    /// the tolerances were met; the last iterate is returned. Relaxations
    /// without a strictly feasible moment matrix usually end here, a few
    /// digits short of `gap_tolerance`.
    Stalled,
    InfeasibleSuspected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIter => "max_iter",
            Status::Stalled => "stalled",
            Status::InfeasibleSuspected => "infeasible_suspected",
        }
    }
}

/// One interior-point iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `||Z − C − Σ u_k A_k||_F / (1 + ||C||_F)`
    pub moment_residual: f64,
    /// `||<A_k, X> − b_k|| / (1 + ||b||)`
    pub dual_residual: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    /// Values of the original variables.
    pub variables: Vec<f64>,
    /// Moment-side objective `b·y + const`.
    pub primal_objective: f64,
    /// Lower bound `−<C, X> + const` from the dual iterate.
    pub dual_objective: f64,
    pub status: Status,
    pub iterations: usize,
    pub history: Vec<IterateRecord>,
    /// Smallest eigenvalue over all blocks at `variables`.
    pub min_block_eigenvalue: f64,
    /// Largest equality residual at `variables`.
    pub equality_residual: f64,
}

impl Solution {
    /// Largest violation of `primal >= dual - slack` over iterates whose
    /// residuals are below `feas` (0 when none is violated).
    pub fn weak_duality_violation(&self, feas: f64, slack: f64) -> f64 {
        self.history
            .iter()
            .filter(|r| r.moment_residual <= feas && r.dual_residual <= feas)
            .map(|r| (r.dual_objective - slack - r.primal_objective).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("Newton system is singular after regularization (iteration {iteration})")]
    NumericalBreakdown { iteration: usize },
    #[error("equality constraints are inconsistent (residual {residual:.3e})")]
    InconsistentEqualities { residual: f64 },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// Real symmetric block data of the reduced problem.
struct Block {
    c: DMatrix<f64>,
    /// `(k, A_k)` for variables that touch this block.
    a: Vec<(usize, DMatrix<f64>)>,
}

struct Reduced {
    blocks: Vec<Block>,
    b: DVector<f64>,
    constant: f64,
    /// `y = y0 + N u`
    y0: DVector<f64>,
    null: DMatrix<f64>,
}

fn to_real(m: &crate::linalg::CMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re)
}

fn reduce(p: &SdpProblem) -> Result<Reduced, SdpError> {
    let m = p.num_vars;
    if p.objective.len() != m {
        return Err(SdpError::Invalid("objective length differs from variable count".into()));
    }
    let (y0, null) = if p.equalities.is_empty() {
        (DVector::zeros(m), DMatrix::identity(m, m))
    } else {
        let rows = p.equalities.len();
        let mut e = DMatrix::<f64>::zeros(rows, m);
        let mut rhs = DVector::<f64>::zeros(rows);
        for (r, eq) in p.equalities.iter().enumerate() {
            for (i, v) in &eq.coeffs {
                if *i >= m {
                    return Err(SdpError::Invalid(format!("equality references variable {i}")));
                }
                e[(r, *i)] += v;
            }
            rhs[r] = eq.rhs;
        }
        let gram: DMatrix<f64> = e.transpose() * &e;
        let eig = SymmetricEigen::new(gram);
        let top: f64 = eig.eigenvalues.amax();
        let cut = 1e-12 * top.max(1.0);
        let etr = e.transpose() * &rhs;
        let mut y0 = DVector::zeros(m);
        let mut null_cols = Vec::new();
        for k in 0..m {
            let v = eig.eigenvectors.column(k);
            if eig.eigenvalues[k] > cut {
                y0 += v * (v.dot(&etr) / eig.eigenvalues[k]);
            } else {
                null_cols.push(v.into_owned());
            }
        }
        let residual = (&e * &y0 - &rhs).norm();
        if residual > 1e-8 * (1.0 + rhs.norm()) {
            return Err(SdpError::InconsistentEqualities { residual });
        }
        let null = if null_cols.is_empty() {
            DMatrix::zeros(m, 0)
        } else {
            DMatrix::from_columns(&null_cols)
        };
        (y0, null)
    };
    let q = null.ncols();
    let b_full = DVector::from_column_slice(&p.objective);
    let b = null.transpose() * &b_full;
    let constant = p.objective_constant + b_full.dot(&y0);
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for blk in &p.blocks {
        let mut c = to_real(&blk.constant);
        let coeffs: Vec<(usize, DMatrix<f64>)> =
            blk.coeffs.iter().map(|(i, a)| (*i, to_real(a))).collect();
        for (i, a) in &coeffs {
            if *i >= m {
                return Err(SdpError::Invalid(format!("block references variable {i}")));
            }
            if y0[*i] != 0.0 {
                c += a * y0[*i];
            }
        }
        let mut a = Vec::new();
        for k in 0..q {
            let mut acc = DMatrix::zeros(c.nrows(), c.ncols());
            let mut touched = false;
            for (i, ai) in &coeffs {
                let w = null[(*i, k)];
                if w.abs() > 1e-14 {
                    acc += ai * w;
                    touched = true;
                }
            }
            if touched && acc.amax() > 1e-13 {
                a.push((k, acc));
            }
        }
        blocks.push(Block { c, a });
    }
    Ok(Reduced {
        blocks,
        b,
        constant,
        y0,
        null,
    })
}

/// Largest `α` with `S + α dS ⪰ 0`, given the Cholesky factor `L` of `S`.
fn max_step(l: &DMatrix<f64>, ds: &DMatrix<f64>) -> f64 {
    let linv = match l.clone().try_inverse() {
        Some(v) => v,
        None => return 0.0,
    };
    let w = &linv * ds * linv.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let lam = SymmetricEigen::new(w).eigenvalues.min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn sym(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

struct State {
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    u: DVector<f64>,
    tau: f64,
    kappa: f64,
}

/// Search direction of the embedded system.
struct Direction {
    du: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dtau: f64,
    dkappa: f64,
}

/// Solves the relaxation. Complex blocks are realified first.
///
/// The pair is embedded in the homogeneous self-dual system
///
/// ```text
/// <A_k, X> = τ b_k,   Z = τ C + Σ u_k A_k,   κ = −<C, X> − b·u
/// ```
///
/// with `X, Z ⪰ 0` and `τ, κ >= 0`, which has an interior even when the
/// relaxation itself has none (equality constraints often force a singular
/// moment matrix). Iterates are reported after division by `τ`.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<Solution, SdpError> {
    if !(opts.gap_tolerance > 0.0 && opts.feasibility_tolerance > 0.0) {
        return Err(SdpError::Invalid("tolerances must be positive".into()));
    }
    let owned;
    let p = if problem.is_real() {
        problem
    } else {
        owned = realify(problem);
        &owned
    };
    let red = reduce(p)?;
    let q = red.b.len();
    let nb = red.blocks.len();
    let dim: usize = red.blocks.iter().map(|b| b.c.nrows()).sum();
    let c_norm = red.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();
    let b_norm = red.b.norm();

    let mut st = State {
        x: red.blocks.iter().map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows())).collect(),
        z: red.blocks.iter().map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows())).collect(),
        u: DVector::zeros(q),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut history = Vec::new();
    let mut status = Status::MaxIter;
    let mut iterations = 0;

    for iter in 0..=opts.max_iterations {
        iterations = iter;
        // residuals of the embedding
        let mut rd: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for (j, blk) in red.blocks.iter().enumerate() {
            let mut r = &blk.c * st.tau - &st.z[j];
            for (k, a) in &blk.a {
                r += a * st.u[*k];
            }
            rd.push(r);
        }
        let mut rp = &red.b * st.tau;
        for (j, blk) in red.blocks.iter().enumerate() {
            for (k, a) in &blk.a {
                rp[*k] -= inner(a, &st.x[j]);
            }
        }
        let cx: f64 = red.blocks.iter().zip(&st.x).map(|(b, x)| inner(&b.c, x)).sum();
        let bu = red.b.dot(&st.u);
        let rg = -st.kappa - cx - bu;
        let mu = (st.x.iter().zip(&st.z).map(|(x, z)| inner(x, z)).sum::<f64>() + st.tau * st.kappa)
            / (dim + 1) as f64;

        let pobj = bu / st.tau + red.constant;
        let dobj = -cx / st.tau + red.constant;
        let moment_res =
            rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / st.tau / (1.0 + c_norm);
        let dual_res = rp.norm() / st.tau / (1.0 + b_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let record = |sp: f64, sd: f64| IterateRecord {
            iteration: iter,
            primal_objective: pobj,
            dual_objective: dobj,
            moment_residual: moment_res,
            dual_residual: dual_res,
            mu,
            step_primal: sp,
            step_dual: sd,
        };

        if gap <= opts.gap_tolerance
            && moment_res <= opts.feasibility_tolerance
            && dual_res <= opts.feasibility_tolerance
        {
            history.push(record(0.0, 0.0));
            status = Status::Optimal;
            break;
        }
        // κ/τ large with a certificate-like direction: primal or dual infeasible
        if st.tau < 1e-10 * st.kappa.max(1.0) && mu < 1e-10 {
            history.push(record(0.0, 0.0));
            status = Status::InfeasibleSuspected;
            break;
        }
        if iter == opts.max_iterations {
            history.push(record(0.0, 0.0));
            break;
        }

        let mut zinv = Vec::with_capacity(nb);
        let mut zchol = Vec::with_capacity(nb);
        let mut xchol = Vec::with_capacity(nb);
        let mut ok = true;
        for j in 0..nb {
            match (st.z[j].clone().cholesky(), st.x[j].clone().cholesky()) {
                (Some(cz), Some(cx)) => {
                    zinv.push(sym(cz.inverse()));
                    zchol.push(cz.l());
                    xchol.push(cx.l());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            history.push(record(0.0, 0.0));
            status = Status::Stalled;
            break;
        }

        // Schur complement M_kl = Σ_j <A_jk, X_j A_jl Z_j^{-1}>, plus the
        // coupling with τ through G_C = X C Z^{-1}
        let mut schur = DMatrix::<f64>::zeros(q, q);
        let mut g: Vec<Vec<(usize, DMatrix<f64>)>> = Vec::with_capacity(nb);
        let mut gc: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        let mut v = DVector::<f64>::zeros(q);
        let mut c_gc = 0.0;
        for (j, blk) in red.blocks.iter().enumerate() {
            let gj: Vec<(usize, DMatrix<f64>)> = blk
                .a
                .iter()
                .map(|(k, a)| (*k, &st.x[j] * a * &zinv[j]))
                .collect();
            let gcj = &st.x[j] * &blk.c * &zinv[j];
            for (k, ak) in &blk.a {
                for (l, gl) in &gj {
                    if l < k {
                        continue;
                    }
                    schur[(*k, *l)] += inner(ak, &gl.transpose());
                }
                v[*k] += inner(ak, &gcj.transpose());
            }
            c_gc += inner(&blk.c, &gcj.transpose());
            g.push(gj);
            gc.push(gcj);
        }
        for k in 0..q {
            for l in 0..k {
                schur[(k, l)] = schur[(l, k)];
            }
        }
        let diag_max = (0..q).map(|k| schur[(k, k)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut reg = 1e-12 * diag_max;
        let chol = loop {
            let mut mreg = schur.clone();
            for k in 0..q {
                mreg[(k, k)] += reg;
            }
            if let Some(cm) = mreg.cholesky() {
                break Some(cm);
            }
            reg *= 100.0;
            if reg > 1e-2 * diag_max {
                break None;
            }
        };
        let chol = match chol {
            Some(cm) => cm,
            None if iter == 0 => return Err(SdpError::NumericalBreakdown { iteration: iter }),
            None => {
                history.push(record(0.0, 0.0));
                status = Status::Stalled;
                break;
            }
        };
        let m_bv = chol.solve(&(&red.b + &v));
        let denom_base = (&red.b - &v).dot(&m_bv) + st.kappa / st.tau + c_gc;

        // direction for complementarity targets R_c (blocks) and r_t (τκ)
        let direction = |rc: &[DMatrix<f64>], rt: f64| -> Direction {
            let mut h1 = -rp.clone();
            let mut t = Vec::with_capacity(nb);
            let mut c_t = 0.0;
            for j in 0..nb {
                let tj = (&rc[j] - &st.x[j] * &rd[j]) * &zinv[j];
                for (k, a) in &red.blocks[j].a {
                    h1[*k] += inner(a, &tj);
                }
                c_t += inner(&red.blocks[j].c, &tj);
                t.push(tj);
            }
            let h2 = rg - rt / st.tau - c_t;
            let m_h1 = chol.solve(&h1);
            let dtau = ((&red.b - &v).dot(&m_h1) - h2) / denom_base;
            let du = m_h1 - &m_bv * dtau;
            let dkappa = (rt - st.kappa * dtau) / st.tau;
            let mut dz = Vec::with_capacity(nb);
            let mut dx = Vec::with_capacity(nb);
            for j in 0..nb {
                let mut dzj = &rd[j] + &red.blocks[j].c * dtau;
                for (k, a) in &red.blocks[j].a {
                    dzj += a * du[*k];
                }
                let mut dxj = &t[j] - &gc[j] * dtau;
                for (k, gk) in &g[j] {
                    dxj -= gk * du[*k];
                }
                dz.push(dzj);
                dx.push(sym(dxj));
            }
            Direction {
                du,
                dx,
                dz,
                dtau,
                dkappa,
            }
        };
        let step_len = |d: &Direction| -> f64 {
            let mut a = f64::INFINITY;
            for j in 0..nb {
                a = a.min(max_step(&xchol[j], &d.dx[j]));
                a = a.min(max_step(&zchol[j], &d.dz[j]));
            }
            if d.dtau < 0.0 {
                a = a.min(-st.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-st.kappa / d.dkappa);
            }
            a
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = st.x.iter().zip(&st.z).map(|(x, z)| -(x * z)).collect();
        let aff = direction(&rc_aff, -st.tau * st.kappa);
        let a_aff = step_len(&aff).min(1.0);
        let mu_aff = ((0..nb)
            .map(|j| inner(&(&st.x[j] + &aff.dx[j] * a_aff), &(&st.z[j] + &aff.dz[j] * a_aff)))
            .sum::<f64>()
            + (st.tau + a_aff * aff.dtau) * (st.kappa + a_aff * aff.dkappa))
            / (dim + 1) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|j| {
                DMatrix::identity(st.x[j].nrows(), st.x[j].nrows()) * (sigma * mu)
                    - &st.x[j] * &st.z[j]
                    - &aff.dx[j] * &aff.dz[j]
            })
            .collect();
        let rt = sigma * mu - st.tau * st.kappa - aff.dtau * aff.dkappa;
        let dir = direction(&rc, rt);
        let alpha = (opts.step_damping * step_len(&dir)).min(1.0);
        history.push(record(alpha, alpha));
        if alpha < 1e-12 {
            status = Status::Stalled;
            break;
        }
        for j in 0..nb {
            st.x[j] = sym(&st.x[j] + &dir.dx[j] * alpha);
            st.z[j] = sym(&st.z[j] + &dir.dz[j] * alpha);
        }
        st.u += &dir.du * alpha;
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;
    }

    let u = &st.u / st.tau;
    let dobj = history.last().map_or(f64::NAN, |r| r.dual_objective);
    let y = &red.y0 + &red.null * &u;
    let variables: Vec<f64> = y.iter().copied().collect();
    let mut min_eig = f64::INFINITY;
    for blk in &p.blocks {
        let v = to_real(&blk.eval(&variables));
        let e = SymmetricEigen::new(sym(v)).eigenvalues.min();
        min_eig = min_eig.min(e);
    }
    let equality_residual = p
        .equalities
        .iter()
        .map(|eq| (eq.coeffs.iter().map(|(i, a)| a * variables[*i]).sum::<f64>() - eq.rhs).abs())
        .fold(0.0, f64::max);
    Ok(Solution {
        primal_objective: p.objective_value(&variables),
        dual_objective: dobj,
        variables,
        status,
        iterations,
        history,
        min_block_eigenvalue: min_eig,
        equality_residual,
    })
}
