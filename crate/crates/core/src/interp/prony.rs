use num_complex::Complex64;

use super::{ExpSumModel, ExpTerm, InterpError, ATOM_ZERO_TOL};
use crate::linalg::{c, eig_general, hermitian_eig, lu_solve, CMatrix};

/// Vandermonde condition numbers above this are flagged in [`PronyResult`].
pub const VANDERMONDE_WARN: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct PronyResult {
    pub model: ExpSumModel,
    /// Monic kernel polynomial, lowest degree first (`p_d = 1`).
    pub kernel: Vec<Complex64>,
    /// 2-norm condition number of the node Vandermonde matrix.
    pub vandermonde_condition: f64,
    pub ill_conditioned: bool,
}

/// Classical univariate Prony: from `y_0, ..., y_{2d}` find the monic
/// polynomial spanning the kernel of `H_d = (y_{i+j})`, take its roots as
/// nodes, and solve the Vandermonde system `Σ_k w_k a_k^j = y_j` for the
/// weights. Singular values of `H_d` below `tol` times the largest count
/// toward the kernel dimension.
pub fn prony_univariate(samples: &[Complex64], tol: f64) -> Result<PronyResult, InterpError> {
    if samples.len() < 3 || samples.len().is_multiple_of(2) {
        return Err(InterpError::Invalid(format!(
            "Prony needs 2d + 1 samples with d >= 1, got {}",
            samples.len()
        )));
    }
    let d = (samples.len() - 1) / 2;
    let h = CMatrix::from_fn(d + 1, d + 1, |i, j| samples[i + j]);
    let gram = &h.adjoint() * &h;
    let e = hermitian_eig(&gram.hermitian_part(), 1e-8)?;
    let sv: Vec<f64> = e.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    let top = sv.iter().fold(0.0_f64, |a, v| a.max(*v)).max(f64::MIN_POSITIVE);
    let dimension = sv.iter().filter(|v| **v <= tol * top).count();
    if dimension != 1 {
        return Err(InterpError::KernelNotUnidimensional { dimension });
    }
    // eigenvalues ascend; the first column spans the kernel
    let v = e.vectors.col(0);
    let lead = v[d];
    if lead.norm() < 1e-10 {
        return Err(InterpError::DegenerateKernel { value: lead.norm() });
    }
    let p: Vec<Complex64> = v.iter().map(|x| x / lead).collect();

    // companion matrix of x^d + p_{d-1} x^{d-1} + ... + p_0
    let comp = CMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -p[d - 1 - j]
        } else if i == j + 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let nodes = eig_general(&comp)?.values;
    if let Some(k) = nodes.iter().position(|a| a.norm() < ATOM_ZERO_TOL) {
        return Err(InterpError::AtomAtZero { index: k });
    }
    let vander = CMatrix::from_fn(d, d, |j, k| nodes[k].powu(j as u32));
    let rhs = CMatrix::from_fn(d, 1, |j, _| samples[j]);
    let w = lu_solve(&vander, &rhs)?;
    let sv = hermitian_eig(&(&vander.adjoint() * &vander).hermitian_part(), 1e-8)?;
    let smax = sv.max().max(0.0).sqrt();
    let smin = sv.min().max(0.0).sqrt();
    let vandermonde_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let terms = nodes
        .iter()
        .enumerate()
        .map(|(k, a)| ExpTerm {
            weight: w[(k, 0)],
            frequency: vec![a.ln()],
        })
        .collect();
    Ok(PronyResult {
        model: ExpSumModel::new(1, terms)?,
        kernel: p,
        vandermonde_condition,
        ill_conditioned: vandermonde_condition > VANDERMONDE_WARN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{sample_grid, resample_residual};

    #[test]
    fn constant_signal() {
        let y = vec![c(2.5, -1.0); 3];
        let r = prony_univariate(&y, 1e-6).unwrap();
        assert_eq!(r.model.len(), 1);
        assert!((r.model.terms[0].weight - c(2.5, -1.0)).norm() < 1e-12);
        assert!(r.model.terms[0].frequency[0].norm() < 1e-12);
    }

    #[test]
    fn two_terms_round_trip() {
        let m = ExpSumModel::new(
            1,
            vec![
                ExpTerm { weight: c(1.0, 0.0), frequency: vec![c(0.0, 0.3)] },
                ExpTerm { weight: c(0.0, 2.0), frequency: vec![c(-0.5, 0.0)] },
            ],
        )
        .unwrap();
        let g = sample_grid(&m, 2);
        let y: Vec<Complex64> = (0..5).map(|k| g.get_single(&crate::moment::MultiIndex::new(vec![k])).unwrap()).collect();
        let r = prony_univariate(&y, 1e-6).unwrap();
        assert!(r.model.distance(&m).unwrap() < 1e-8);
        assert!(resample_residual(&r.model, &g) < 1e-8);
        assert!(!r.ill_conditioned);
    }

    #[test]
    fn rank_deficient_grid_has_large_kernel() {
        let y = vec![c(1.0, 0.0); 5];
        assert!(matches!(
            prony_univariate(&y, 1e-6),
            Err(InterpError::KernelNotUnidimensional { dimension: 2 })
        ));
    }
}
