//! Exponential sums `f(z) = Σ_k w_k exp(<f_k, z>)` and their recovery from
//! samples on the integer grid.
//!
//! Sampling `f` at `α ∈ N^n` gives the moments `y_α = Σ_k w_k a_k^α` of the
//! measure `Σ_k w_k δ_{a_k}` with nodes `a_k = exp(f_k)`, so interpolation
//! is atom extraction from a complex Hankel matrix in transpose mode.

mod interpolate;
pub mod io;
mod prony;
mod signal;

pub use interpolate::{interpolate, InterpConfig, Interpolation};
pub use prony::{prony_univariate, PronyResult, VANDERMONDE_WARN};
pub use signal::{damped_sinusoid_to_expsum, emit_signal, DampedSinusoid, GridSpec, SignalPart};

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::extraction::ExtractionFailure;
use crate::linalg::LinalgError;
use crate::moment::{enumerate_indices, MomentError, MomentSequence, SequenceMode};

/// Nodes with modulus below this have no logarithm.
pub const ATOM_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub weight: Complex64,
    pub frequency: Vec<Complex64>,
}

impl ExpTerm {
    /// `exp(f_k)` componentwise.
    pub fn node(&self) -> Vec<Complex64> {
        self.frequency.iter().map(|f| f.exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumModel {
    pub n: usize,
    pub terms: Vec<ExpTerm>,
}

impl ExpSumModel {
    /// Checks shapes and nonzero weights, then canonicalizes.
    pub fn new(n: usize, terms: Vec<ExpTerm>) -> Result<Self, InterpError> {
        if n == 0 {
            return Err(InterpError::Invalid("a model needs at least one variable".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.frequency.len() != n {
                return Err(InterpError::Invalid(format!(
                    "term {} has {} frequencies, expected {n}",
                    k + 1,
                    t.frequency.len()
                )));
            }
            if t.weight == Complex64::new(0.0, 0.0) {
                return Err(InterpError::Invalid(format!("term {} has zero weight", k + 1)));
            }
            if !(t.weight.is_finite() && t.frequency.iter().all(|f| f.is_finite())) {
                return Err(InterpError::Invalid(format!("term {} is not finite", k + 1)));
            }
        }
        let mut m = Self { n, terms };
        m.canonicalize();
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Wraps imaginary parts of frequencies into `(−π, π]` and sorts terms
    /// lexicographically by `(Re f_1, Im f_1, ...)`.
    pub fn canonicalize(&mut self) {
        for t in &mut self.terms {
            for f in &mut t.frequency {
                f.im = wrap_angle(f.im);
            }
        }
        self.terms.sort_by(|a, b| cmp_frequency(&a.frequency, &b.frequency));
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        eval_expsum(self, z)
    }

    /// Largest distance between matched terms of two canonical models, or
    /// `None` when the term counts differ.
    pub fn distance(&self, other: &ExpSumModel) -> Option<f64> {
        if self.n != other.n || self.len() != other.len() {
            return None;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        a.canonicalize();
        b.canonicalize();
        let mut worst = 0.0_f64;
        for (s, t) in a.terms.iter().zip(&b.terms) {
            worst = worst.max((s.weight - t.weight).norm());
            for (f, g) in s.frequency.iter().zip(&t.frequency) {
                let mut diff = f - g;
                diff.im = wrap_angle(diff.im);
                worst = worst.max(diff.norm());
            }
        }
        Some(worst)
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut v = x.rem_euclid(two_pi);
    if v > PI {
        v -= two_pi;
    }
    v
}

fn cmp_frequency(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

pub fn eval_expsum(m: &ExpSumModel, z: &[Complex64]) -> Complex64 {
    m.terms
        .iter()
        .map(|t| {
            let e: Complex64 = t.frequency.iter().zip(z).map(|(f, x)| f * x).sum();
            t.weight * e.exp()
        })
        .sum()
}

/// Samples `y_α = f(α)` for `|α| <= 2d` as a Hankel-mode sequence of order
/// `d`.
pub fn sample_grid(m: &ExpSumModel, d: u32) -> MomentSequence {
    let mut seq = MomentSequence::new(m.n, d, SequenceMode::Hankel);
    for a in enumerate_indices(m.n, 2 * d) {
        let z: Vec<Complex64> = a.exponents().iter().map(|&e| Complex64::new(e as f64, 0.0)).collect();
        let v = eval_expsum(m, &z);
        seq.insert_single(a, v);
    }
    seq
}

/// Largest `|y_α − f(α)|` over the keys of `seq`.
pub fn resample_residual(m: &ExpSumModel, seq: &MomentSequence) -> f64 {
    seq.singles()
        .map(|(a, v)| {
            let z: Vec<Complex64> = a.exponents().iter().map(|&e| Complex64::new(e as f64, 0.0)).collect();
            (eval_expsum(m, &z) - v).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("rank of the Hankel matrix did not stabilize up to order {d_max} (ranks {ranks:?})")]
    RankNotStabilized { d_max: u32, ranks: Vec<usize> },
    #[error("node {index} is (numerically) zero; its frequency is undefined")]
    AtomAtZero { index: usize },
    #[error("Hankel kernel has dimension {dimension}, expected 1")]
    KernelNotUnidimensional { dimension: usize },
    #[error("leading kernel coefficient {value:.3e} is too small to normalize")]
    DegenerateKernel { value: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Extraction(#[from] ExtractionFailure),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
