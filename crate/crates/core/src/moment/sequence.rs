use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{enumerate_indices, MomentError, MultiIndex};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMode {
    /// Keys `(α, β)`, values `y_{α,β} = ∫ conj(z)^α z^β dμ`.
    Paired,
    /// Keys `α`, values `y_α = ∫ z^α dν`.
    Hankel,
}

impl SequenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceMode::Paired => "paired",
            SequenceMode::Hankel => "hankel",
        }
    }
}

/// Truncated moment data.
///
/// Paired sequences of order `d` cover `|α|, |β| <= d`; Hankel sequences
/// cover `|α| <= 2d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    n: usize,
    d: u32,
    mode: SequenceMode,
    paired: BTreeMap<(MultiIndex, MultiIndex), Complex64>,
    single: BTreeMap<MultiIndex, Complex64>,
}

impl MomentSequence {
    pub fn new(n: usize, d: u32, mode: SequenceMode) -> Self {
        Self {
            n,
            d,
            mode,
            paired: BTreeMap::new(),
            single: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn mode(&self) -> SequenceMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        match self.mode {
            SequenceMode::Paired => self.paired.len(),
            SequenceMode::Hankel => self.single.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert_pair(&mut self, alpha: MultiIndex, beta: MultiIndex, value: Complex64) {
        debug_assert_eq!(self.mode, SequenceMode::Paired);
        self.paired.insert((alpha, beta), value);
    }

    pub fn insert_single(&mut self, alpha: MultiIndex, value: Complex64) {
        debug_assert_eq!(self.mode, SequenceMode::Hankel);
        self.single.insert(alpha, value);
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Complex64)> {
        self.paired.iter()
    }

    pub fn singles(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.single.iter()
    }

    /// Entry at row label `α`, column label `β`: `y_{α,β}` for paired data and
    /// `y_{α+β}` for Hankel data.
    pub fn get(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<Complex64, MomentError> {
        match self.mode {
            SequenceMode::Paired => self
                .paired
                .get(&(alpha.clone(), beta.clone()))
                .copied()
                .ok_or_else(|| MomentError::MissingMoment {
                    key: format!("({alpha}; {beta})"),
                }),
            SequenceMode::Hankel => self.get_single(&alpha.add(beta)),
        }
    }

    pub fn get_single(&self, alpha: &MultiIndex) -> Result<Complex64, MomentError> {
        self.single
            .get(alpha)
            .copied()
            .ok_or_else(|| MomentError::MissingMoment {
                key: format!("({alpha})"),
            })
    }

    /// `y_{0,0}` (or `y_0`).
    pub fn mass(&self) -> Result<Complex64, MomentError> {
        let z = MultiIndex::zero(self.n);
        self.get(&z, &z)
    }

    /// Verifies that every key required for order `d` is present.
    pub fn check_coverage(&self) -> Result<(), MomentError> {
        match self.mode {
            SequenceMode::Paired => {
                let idx = enumerate_indices(self.n, self.d);
                for a in &idx {
                    for b in &idx {
                        self.get(a, b)?;
                    }
                }
            }
            SequenceMode::Hankel => {
                for a in enumerate_indices(self.n, 2 * self.d) {
                    self.get_single(&a)?;
                }
            }
        }
        Ok(())
    }

    /// Largest `|y_{β,α} − conj(y_{α,β})|` over stored pairs. Zero for Hankel
    /// sequences, which have no Hermitian structure to check.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((a, b), v) in &self.paired {
            match self.paired.get(&(b.clone(), a.clone())) {
                Some(w) => worst = worst.max((w - v.conj()).norm()),
                None => return f64::INFINITY,
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.mode == SequenceMode::Paired && self.hermitian_defect() <= tol
    }

    /// Moments of `Σ w_k δ_{a_k}` up to order `d`.
    pub fn from_atoms(
        mode: SequenceMode,
        d: u32,
        atoms: &[Vec<Complex64>],
        weights: &[Complex64],
    ) -> Self {
        assert_eq!(atoms.len(), weights.len());
        let n = atoms.first().map_or(0, Vec::len);
        let mut seq = Self::new(n, d, mode);
        match mode {
            SequenceMode::Paired => {
                let idx = enumerate_indices(n, d);
                for a in &idx {
                    for b in &idx {
                        let v = atoms
                            .iter()
                            .zip(weights)
                            .map(|(z, w)| w * a.pow(z).conj() * b.pow(z))
                            .sum();
                        seq.insert_pair(a.clone(), b.clone(), v);
                    }
                }
            }
            SequenceMode::Hankel => {
                for a in enumerate_indices(n, 2 * d) {
                    let v = atoms.iter().zip(weights).map(|(z, w)| w * a.pow(z)).sum();
                    seq.insert_single(a, v);
                }
            }
        }
        seq
    }

    /// Paired sequence read off a full moment matrix `M_d(y)` whose rows and
    /// columns follow `enumerate_indices(n, d)`.
    pub fn from_moment_matrix(n: usize, d: u32, m: &CMatrix) -> Result<Self, MomentError> {
        let idx = enumerate_indices(n, d);
        if m.rows() != idx.len() || m.cols() != idx.len() {
            return Err(MomentError::Shape(format!(
                "moment matrix of order {d} in {n} variables must be {0}x{0}, got {1}x{2}",
                idx.len(),
                m.rows(),
                m.cols()
            )));
        }
        let mut seq = Self::new(n, d, SequenceMode::Paired);
        for (i, a) in idx.iter().enumerate() {
            for (j, b) in idx.iter().enumerate() {
                seq.insert_pair(a.clone(), b.clone(), m[(i, j)]);
            }
        }
        Ok(seq)
    }

    /// Restriction to order `d' <= d`.
    pub fn truncate(&self, d: u32) -> Self {
        let mut out = Self::new(self.n, d.min(self.d), self.mode);
        match self.mode {
            SequenceMode::Paired => {
                for ((a, b), v) in &self.paired {
                    if a.degree() <= out.d && b.degree() <= out.d {
                        out.insert_pair(a.clone(), b.clone(), *v);
                    }
                }
            }
            SequenceMode::Hankel => {
                for (a, v) in &self.single {
                    if a.degree() <= 2 * out.d {
                        out.insert_single(a.clone(), *v);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn dirac_moments_paired() {
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, 2, &[vec![c(0.0, 2.0)]], &[c(1.0, 0.0)]);
        seq.check_coverage().unwrap();
        let v = seq
            .get(&MultiIndex::new(vec![1]), &MultiIndex::new(vec![2]))
            .unwrap();
        // conj(2i) * (2i)^2 = -2i * -4 = 8i
        assert!((v - c(0.0, 8.0)).norm() < 1e-12);
        assert!(seq.is_hermitian(1e-12));
    }

    #[test]
    fn missing_key_reported() {
        let seq = MomentSequence::new(1, 1, SequenceMode::Paired);
        let err = seq.mass().unwrap_err();
        assert!(matches!(err, MomentError::MissingMoment { .. }));
    }

    #[test]
    fn hankel_get_adds_indices() {
        let seq = MomentSequence::from_atoms(SequenceMode::Hankel, 1, &[vec![c(2.0, 0.0), c(3.0, 0.0)]], &[c(1.0, 0.0)]);
        let v = seq
            .get(&MultiIndex::new(vec![1, 0]), &MultiIndex::new(vec![0, 1]))
            .unwrap();
        assert!((v - c(6.0, 0.0)).norm() < 1e-12);
    }
}
