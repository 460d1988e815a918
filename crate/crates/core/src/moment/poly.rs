use std::collections::BTreeMap;

use num_complex::Complex64;

use super::MultiIndex;

/// Polynomial in `z` and `conj(z)`: `Σ c_{α,β} conj(z)^α z^β`.
///
/// The polynomial is real-valued on `C^n` exactly when its coefficients are
/// Hermitian, `conj(c_{α,β}) = c_{β,α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), Complex64>,
}

impl Polynomial {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        let mut p = Self::new(n);
        p.add_term(MultiIndex::zero(n), MultiIndex::zero(n), value);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `value · conj(z)^α z^β`, accumulating onto an existing term.
    pub fn add_term(&mut self, alpha: MultiIndex, beta: MultiIndex, value: Complex64) {
        assert_eq!(alpha.n(), self.n);
        assert_eq!(beta.n(), self.n);
        *self.terms.entry((alpha, beta)).or_insert(Complex64::new(0.0, 0.0)) += value;
    }

    pub fn with_term(mut self, alpha: &[u32], beta: &[u32], re: f64, im: f64) -> Self {
        self.add_term(
            MultiIndex::new(alpha.to_vec()),
            MultiIndex::new(beta.to_vec()),
            Complex64::new(re, im),
        );
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Complex64)> {
        self.terms.iter().filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
    }

    pub fn coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Complex64 {
        self.terms
            .get(&(alpha.clone(), beta.clone()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }

    /// `k = max(|α|, |β|)` over nonzero terms.
    pub fn half_degree(&self) -> u32 {
        self.terms()
            .map(|((a, b), _)| a.degree().max(b.degree()))
            .max()
            .unwrap_or(0)
    }

    /// Coefficients `c♯_{α,β} = conj(c_{β,α})`, so that `p♯(z) = conj(p(z))`.
    pub fn sharp(&self) -> Self {
        let mut out = Self::new(self.n);
        for ((a, b), v) in self.terms() {
            out.add_term(b.clone(), a.clone(), v.conj());
        }
        out
    }

    pub fn hermitian_defect(&self) -> f64 {
        let s = self.sharp();
        let mut keys: Vec<&(MultiIndex, MultiIndex)> = self.terms.keys().collect();
        keys.extend(s.terms.keys());
        keys.iter()
            .map(|(a, b)| (self.coefficient(a, b) - s.coefficient(a, b)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Splits `p = h_re + i·h_im` with both parts Hermitian:
    /// `h_re = (p + p♯)/2`, `h_im = (p − p♯)/(2i)`.
    pub fn hermitian_parts(&self) -> (Self, Self) {
        let s = self.sharp();
        let mut re = Self::new(self.n);
        let mut im = Self::new(self.n);
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        let mut keys: Vec<(MultiIndex, MultiIndex)> = self.terms.keys().cloned().collect();
        keys.extend(s.terms.keys().cloned());
        keys.sort();
        keys.dedup();
        for (a, b) in keys {
            let p = self.coefficient(&a, &b);
            let q = s.coefficient(&a, &b);
            let r = (p + q) * half;
            let i = (p - q) * minus_half_i;
            if r != Complex64::new(0.0, 0.0) {
                re.add_term(a.clone(), b.clone(), r);
            }
            if i != Complex64::new(0.0, 0.0) {
                im.add_term(a, b, i);
            }
        }
        (re, im)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::new(self.n);
        for ((a, b), v) in self.terms() {
            out.add_term(a.clone(), b.clone(), v * s);
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms()
            .map(|((a, b), v)| v * a.pow(z).conj() * b.pow(z))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn modulus_squared_is_hermitian() {
        let p = Polynomial::new(1).with_term(&[1], &[1], 1.0, 0.0);
        assert!(p.is_hermitian(0.0));
        assert_eq!(p.half_degree(), 1);
        assert!((p.eval(&[c(3.0, 4.0)]) - c(25.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cube_splits_into_real_and_imaginary_parts() {
        // z^3 - 1
        let p = Polynomial::new(1)
            .with_term(&[0], &[3], 1.0, 0.0)
            .with_term(&[0], &[0], -1.0, 0.0);
        assert!(!p.is_hermitian(1e-12));
        let (re, im) = p.hermitian_parts();
        assert!(re.is_hermitian(0.0) && im.is_hermitian(0.0));
        let z = c(0.3, -1.2);
        let v = p.eval(&[z]);
        assert!((re.eval(&[z]) - c(v.re, 0.0)).norm() < 1e-12);
        assert!((im.eval(&[z]) - c(v.im, 0.0)).norm() < 1e-12);
        assert_eq!(re.half_degree(), 3);
    }

    #[test]
    fn skew_realness_constraint_has_zero_real_part() {
        // conj(z2) - z2
        let p = Polynomial::new(2)
            .with_term(&[0, 1], &[0, 0], 1.0, 0.0)
            .with_term(&[0, 0], &[0, 1], -1.0, 0.0);
        let (re, im) = p.hermitian_parts();
        assert!(re.is_zero());
        assert!(!im.is_zero());
        let z = [c(0.0, 0.0), c(1.0, 2.0)];
        assert!((im.eval(&z) - c(-4.0, 0.0)).norm() < 1e-12);
    }
}
