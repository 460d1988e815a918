use serde::Serialize;

use super::{ExtractionError, Mode, ShiftFamily};
use crate::linalg::{hermitian_eig, lu_solve, norm2, numeric_rank, CMatrix};
use crate::moment::{index_count, MultiIndex};

/// Ranks of the nested leading blocks `M_0 ⊂ M_1 ⊂ ... ⊂ M_d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flatness {
    /// `ranks[j] = rank M_j`.
    pub ranks: Vec<usize>,
    /// `rank M_d = rank M_{d-dk}`.
    pub flat_dk: bool,
    /// `rank M_d = rank M_{d-1}`.
    pub flat_1: bool,
}

impl Flatness {
    pub fn rank(&self) -> usize {
        self.ranks.last().copied().unwrap_or(0)
    }
}

/// Numeric ranks of the leading principal blocks of `m` (ordered in graded
/// lex, so the block of size `index_count(n, j)` is `M_j`).
///
/// For `Mode::Transpose` the rank counts singular values, computed as square
/// roots of the eigenvalues of `B^* B`.
pub fn check_flatness(
    m: &CMatrix,
    n: usize,
    d: u32,
    dk: u32,
    mode: Mode,
    tol: f64,
) -> Result<Flatness, ExtractionError> {
    let mut ranks = Vec::with_capacity(d as usize + 1);
    for j in 0..=d {
        let size = index_count(n, j);
        let b = m.leading(size);
        let vals: Vec<f64> = match mode {
            Mode::ConjugateTranspose => hermitian_eig(&b.hermitian_part(), 1e-9)?.eigenvalues,
            Mode::Transpose => hermitian_eig(&(&b.adjoint() * &b).hermitian_part(), 1e-9)?
                .eigenvalues
                .iter()
                .map(|v| v.max(0.0).sqrt())
                .collect(),
        };
        ranks.push(numeric_rank(&vals, tol));
    }
    let rd = ranks[d as usize];
    let flat_1 = d >= 1 && ranks[d as usize - 1] == rd;
    let flat_dk = d >= dk && ranks[(d - dk) as usize] == rd;
    Ok(Flatness {
        ranks,
        flat_dk,
        flat_1,
    })
}

/// Shift operators from a factor `x` (columns labeled by `labels`) and a
/// basis of column positions with degree `< d`.
///
/// `T_k = X[:, basis + e_k] · X[:, basis]^{-1}`. The relative residual
/// `max ||T_k x_α − x_{α+e_k}|| / ||X||_F` is taken over every label `α`
/// whose shift `α + e_k` is also a label, and must not exceed `tol`.
pub fn compute_shifts(
    x: &CMatrix,
    labels: &[MultiIndex],
    basis: &[usize],
    mode: Mode,
    tol: f64,
) -> Result<ShiftFamily, ExtractionError> {
    let r = x.rows();
    if basis.len() != r {
        return Err(ExtractionError::BasisDegenerate {
            found: basis.len(),
            rank: r,
        });
    }
    let n = labels.first().map_or(0, MultiIndex::n);
    let position = |a: &MultiIndex| labels.iter().position(|l| l == a);
    let b = x.select_cols(basis);
    let bt = b.transpose();
    let scale = x.norm_fro().max(f64::MIN_POSITIVE);
    let mut shifts = Vec::with_capacity(n);
    let mut residual = 0.0_f64;
    for k in 0..n {
        let e = MultiIndex::unit(n, k);
        let mut targets = Vec::with_capacity(r);
        for &j in basis {
            match position(&labels[j].add(&e)) {
                Some(p) => targets.push(p),
                None => {
                    return Err(ExtractionError::BasisDegenerate {
                        found: basis.len(),
                        rank: r,
                    })
                }
            }
        }
        let y = x.select_cols(&targets);
        // T B = Y  <=>  B^T T^T = Y^T
        let t = lu_solve(&bt, &y.transpose())
            .map_err(|_| ExtractionError::BasisDegenerate {
                found: basis.len(),
                rank: r,
            })?
            .transpose();
        for (j, a) in labels.iter().enumerate() {
            if let Some(p) = position(&a.add(&e)) {
                let img = t.mul_vec(&x.col(j));
                let diff: Vec<_> = img.iter().zip(x.col(p)).map(|(u, v)| u - v).collect();
                residual = residual.max(norm2(&diff) / scale);
            }
        }
        shifts.push(t);
    }
    if residual.is_nan() || residual > tol {
        return Err(ExtractionError::ShiftInconsistent { residual });
    }
    Ok(ShiftFamily {
        shifts,
        mode,
        residual,
    })
}

/// Operator block for the pair `(T_i, T_j)`: with `S = (I, T_i, T_j)`, block
/// `(a, b)` is `S_b^* S_a`, i.e.
///
/// ```text
/// [ I    T_i^*      T_j^*     ]
/// [ T_i  T_i^* T_i  T_j^* T_i ]
/// [ T_j  T_i^* T_j  T_j^* T_j ]
/// ```
pub fn operator_block(ti: &CMatrix, tj: &CMatrix) -> CMatrix {
    let s = [CMatrix::identity(ti.rows()), ti.clone(), tj.clone()];
    let grid: Vec<Vec<CMatrix>> = (0..3)
        .map(|a| (0..3).map(|b| &s[b].adjoint() * &s[a]).collect())
        .collect();
    CMatrix::block(&grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyponormalityCheck {
    /// Smallest eigenvalue over all operator blocks (`+inf` for `n = 1`).
    pub min_eigenvalue: f64,
    /// Spectrum of each operator block, keyed by zero-based pair.
    pub spectra: Vec<((usize, usize), Vec<f64>)>,
    /// Largest normalized commutator `||[A, B]||_F / max(1, ||A|| ||B||)` over
    /// `A, B ∈ {T_k, T_k^*}`.
    pub commutator_norm: f64,
    pub pass: bool,
}

/// Joint hyponormality test for conjugate-transpose shifts.
///
/// Block eigenvalues are compared against `-tol * max(1, ||block||_F)`.
pub fn check_hyponormality(
    family: &ShiftFamily,
    tol: f64,
) -> Result<HyponormalityCheck, ExtractionError> {
    let t = &family.shifts;
    let n = t.len();
    let mut min_eigenvalue = f64::INFINITY;
    let mut min_scaled = f64::INFINITY;
    let mut spectra = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let block = operator_block(&t[i], &t[j]);
            let eig = hermitian_eig(&block, 1e-8)?;
            min_eigenvalue = min_eigenvalue.min(eig.min());
            min_scaled = min_scaled.min(eig.min() / block.norm_fro().max(1.0));
            spectra.push(((i, j), eig.eigenvalues));
        }
    }
    let mut ops: Vec<CMatrix> = Vec::with_capacity(2 * n);
    for tk in t {
        ops.push(tk.clone());
        ops.push(tk.adjoint());
    }
    let mut commutator_norm = 0.0_f64;
    for a in 0..ops.len() {
        for b in (a + 1)..ops.len() {
            let (p, q) = (&ops[a], &ops[b]);
            let comm = &(p * q) - &(q * p);
            let norm = (p.norm_fro() * q.norm_fro()).max(1.0);
            commutator_norm = commutator_norm.max(comm.norm_fro() / norm);
        }
    }
    let pass = min_scaled >= -tol && commutator_norm <= tol;
    Ok(HyponormalityCheck {
        min_eigenvalue,
        spectra,
        commutator_norm,
        pass,
    })
}

/// Column positions of `labels` with degree `< d`.
pub(crate) fn low_degree_columns(labels: &[MultiIndex], d: u32) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, a)| a.degree() < d)
        .map(|(j, _)| j)
        .collect()
}

/// Basis of `x` drawn from the columns of degree `< d`, as positions into
/// `labels`.
pub(crate) fn shift_basis(x: &CMatrix, labels: &[MultiIndex], d: u32, tol: f64) -> Vec<usize> {
    let low = low_degree_columns(labels, d);
    let sub = x.select_cols(&low);
    crate::linalg::column_basis(&sub, tol)
        .into_iter()
        .map(|j| low[j])
        .collect()
}
