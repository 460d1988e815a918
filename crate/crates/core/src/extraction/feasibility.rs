use num_complex::Complex64;
use serde::Serialize;

use super::AtomicMeasure;
use crate::hierarchy::{ConstraintKind, PolynomialProblem};
use crate::linalg::{hermitian_eig, numeric_rank};
use crate::moment::{localizing_matrix, moment_matrix, MomentSequence};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintFeasibility {
    /// Zero-based index into `problem.constraints`.
    pub index: usize,
    pub kind: ConstraintKind,
    /// `g(a_k)` for every atom (real part; Hermitian `g` is real-valued).
    pub values: Vec<f64>,
    /// `(atom, value)` pairs that violate the constraint by more than `tol`.
    pub violations: Vec<(usize, f64)>,
    /// Atoms with `|g(a_k)| <= tol`.
    pub zero_count: usize,
    /// `rank M_d(y) − rank M_{d−d_K}(g y)` when the data is available.
    pub expected_zero_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub constraints: Vec<ConstraintFeasibility>,
    pub feasible: bool,
}

/// Evaluates every constraint of `problem` at every atom of `m`.
///
/// With `data = Some((seq, d))` the expected number of zeros of each `g_i`
/// among the atoms is computed from ranks of moment and localizing matrices
/// (`rank_tol` relative).
pub fn feasibility_report(
    m: &AtomicMeasure,
    problem: &PolynomialProblem,
    data: Option<(&MomentSequence, u32)>,
    tol: f64,
    rank_tol: f64,
) -> FeasibilityReport {
    let dk = problem.dk();
    let rank_d = data.and_then(|(seq, d)| {
        let mm = moment_matrix(seq, d).ok()?;
        let e = hermitian_eig(&mm.matrix.hermitian_part(), 1e-9).ok()?;
        Some(numeric_rank(&e.eigenvalues, rank_tol))
    });
    let mut constraints = Vec::with_capacity(problem.constraints.len());
    let mut feasible = true;
    for (index, con) in problem.constraints.iter().enumerate() {
        let values: Vec<Complex64> = m.atoms.iter().map(|a| con.poly.eval(a)).collect();
        let mut violations = Vec::new();
        let mut zero_count = 0;
        for (k, v) in values.iter().enumerate() {
            if v.norm() <= tol {
                zero_count += 1;
            }
            let bad = match con.kind {
                ConstraintKind::Eq => v.norm() > tol,
                ConstraintKind::Ineq => v.re < -tol,
            };
            if bad {
                violations.push((k, v.re));
            }
        }
        feasible &= violations.is_empty();
        let expected_zero_count = match (data, rank_d) {
            (Some((seq, d)), Some(rd)) if d >= dk => {
                let order = d - dk + con.half_degree();
                localizing_matrix(seq, &con.poly, order).ok().and_then(|l| {
                    let a = &l.matrix;
                    let g = &a.adjoint() * a;
                    let e = hermitian_eig(&g.hermitian_part(), 1e-9).ok()?;
                    let sv: Vec<f64> = e.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
                    Some(rd.saturating_sub(numeric_rank(&sv, rank_tol)))
                })
            }
            _ => None,
        };
        constraints.push(ConstraintFeasibility {
            index,
            kind: con.kind,
            values: values.iter().map(|v| v.re).collect(),
            violations,
            zero_count,
            expected_zero_count,
        });
    }
    FeasibilityReport {
        constraints,
        feasible,
    }
}
