//! Extraction of atomic measures from flat truncated moment data.
//!
//! The pipeline factors the moment matrix as `X^• X`, picks a column basis,
//! builds the shift operators `T_k` with `T_k x_α = x_{α+e_k}`, checks joint
//! hyponormality (conjugate-transpose mode), diagonalizes a random real
//! combination of the shifts and reads atoms and weights off the common
//! eigenvectors. `•` is the conjugate transpose for optimization data and the
//! plain transpose for interpolation (Hankel) data.

mod diag;
mod feasibility;
pub mod io;
mod pipeline;
mod shifts;

pub use diag::{diagonalize_combination, simultaneous_diagonalize, Diagonalization};
pub use feasibility::{feasibility_report, ConstraintFeasibility, FeasibilityReport};
pub use pipeline::{
    extract_measure, verify_measure, Certification, ExtractConfig, Extraction, ExtractionFailure,
    ExtractionReport, PairSpectrum,
};
pub use shifts::{
    check_flatness, check_hyponormality, compute_shifts, operator_block, Flatness,
    HyponormalityCheck,
};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{CMatrix, LinalgError};
use crate::moment::MomentError;

/// Which adjoint `•` the factorization and diagonalization use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ConjugateTranspose,
    Transpose,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ConjugateTranspose => "conjugate_transpose",
            Mode::Transpose => "transpose",
        }
    }

    /// `x^•`-style bilinear or sesquilinear pairing `u^• v`.
    pub fn pair(self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        match self {
            Mode::ConjugateTranspose => crate::linalg::dot_c(u, v),
            Mode::Transpose => crate::linalg::dot_t(u, v),
        }
    }

    pub fn adjoint(self, m: &CMatrix) -> CMatrix {
        match self {
            Mode::ConjugateTranspose => m.adjoint(),
            Mode::Transpose => m.transpose(),
        }
    }
}

/// Shift operators `T_1..T_n`, each `r x r`.
#[derive(Debug, Clone)]
pub struct ShiftFamily {
    pub shifts: Vec<CMatrix>,
    pub mode: Mode,
    /// Largest relative residual `||T_k x_α − x_{α+e_k}|| / ||X||` over
    /// `|α| <= d − 1`.
    pub residual: f64,
}

impl ShiftFamily {
    pub fn rank(&self) -> usize {
        self.shifts.first().map_or(0, CMatrix::rows)
    }

    /// `max_k ||T_k^* T_k − I||_F`.
    pub fn unitary_defect(&self) -> f64 {
        self.shifts
            .iter()
            .map(|t| {
                let g = &t.adjoint() * t;
                (&g - &CMatrix::identity(t.rows())).norm_fro()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k ||T_k − T_k^T||_F`.
    pub fn symmetric_defect(&self) -> f64 {
        self.shifts.iter().map(CMatrix::symmetric_defect).fold(0.0, f64::max)
    }

    /// Largest imaginary part among all shift entries.
    pub fn max_imag(&self) -> f64 {
        self.shifts
            .iter()
            .flat_map(|t| t.as_slice().iter().map(|z| z.im.abs()))
            .fold(0.0, f64::max)
    }
}

/// Finite atomic measure `Σ w_k δ_{a_k}` on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    pub mode: Mode,
    pub atoms: Vec<Vec<Complex64>>,
    pub weights: Vec<Complex64>,
}

impl AtomicMeasure {
    pub fn n(&self) -> usize {
        self.atoms.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    /// Sorts atoms lexicographically by `(Re a_1, Im a_1, Re a_2, ...)`.
    pub fn sort_canonical(&mut self) {
        let mut order: Vec<usize> = (0..self.atoms.len()).collect();
        order.sort_by(|&i, &j| {
            let key = |k: usize| -> Vec<f64> {
                self.atoms[k].iter().flat_map(|z| [z.re, z.im]).collect()
            };
            let (a, b) = (key(i), key(j));
            a.iter()
                .zip(&b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        self.atoms = order.iter().map(|&k| self.atoms[k].clone()).collect();
        self.weights = order.iter().map(|&k| self.weights[k]).collect();
    }
}

/// Numerical thresholds used along the pipeline. All are relative unless
/// noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Eigen/singular values above `rank * max(1, λ_max)` count toward rank.
    pub rank: f64,
    /// Allowed negative eigenvalue of the moment matrix, relative to its norm.
    pub psd: f64,
    /// Allowed shift residual relative to `||X||_F`.
    pub shift: f64,
    /// Allowed negative eigenvalue of the operator blocks and commutator norm.
    pub hyponormal: f64,
    /// Minimum separation of the combined eigenvalues, relative to their spread.
    pub separation: f64,
    /// Absolute distance below which atoms are merged.
    pub dedup: f64,
    /// Atoms with weight below `weight_floor * y_00` are dropped
    /// (conjugate-transpose mode).
    pub weight_floor: f64,
    /// Allowed asymmetry of Hankel data before Takagi factorization.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: crate::linalg::DEFAULT_RANK_TOL,
            psd: 1e-7,
            shift: 1e-6,
            hyponormal: 1e-6,
            separation: 1e-6,
            dedup: 1e-6,
            weight_floor: 1e-8,
            symmetry: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractionError {
    #[error("order {d} is too small for extraction")]
    OrderTooSmall { d: u32 },
    #[error("moment matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("rank is not preserved: rank M_d = {r_d}, rank M_(d-1) = {r_prev}")]
    NotFlat { r_d: usize, r_prev: usize },
    #[error("could only find {found} independent basis columns of degree < d, need {rank}")]
    BasisDegenerate { found: usize, rank: usize },
    #[error("shift operators are not well defined (relative residual {residual:.6e})")]
    ShiftInconsistent { residual: f64 },
    #[error(
        "shift operators are not jointly hyponormal (operator block min eigenvalue {min_eigenvalue:.6e}, commutator norm {commutator_norm:.6e})"
    )]
    NotHyponormal {
        min_eigenvalue: f64,
        commutator_norm: f64,
    },
    #[error("random combinations kept producing clustered eigenvalues ({attempts} attempts)")]
    DegenerateCombination { attempts: usize },
    #[error("eigenvectors stayed isotropic (p^T p ~ 0) over {attempts} attempts")]
    IsotropicEigenvector { attempts: usize },
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
