use num_complex::Complex64;

use super::{eval_expsum, ExpSumModel, ExpTerm, InterpError};
use crate::moment::io::fmt_f64;

/// `A e^{σt} cos(ωt + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedSinusoid {
    pub amplitude: f64,
    pub damping: f64,
    pub angular_frequency: f64,
    pub phase: f64,
}

/// Splits each cosine into two exponentials with weights `(A/2) e^{±iφ}` and
/// frequencies `σ ± iω`, merging terms whose frequencies coincide.
pub fn damped_sinusoid_to_expsum(components: &[DampedSinusoid]) -> Result<ExpSumModel, InterpError> {
    let mut terms: Vec<ExpTerm> = Vec::new();
    for s in components {
        for sign in [1.0, -1.0] {
            let weight = Complex64::from_polar(s.amplitude / 2.0, sign * s.phase);
            let f = Complex64::new(s.damping, sign * s.angular_frequency);
            match terms.iter_mut().find(|t| (t.frequency[0] - f).norm() <= 1e-12) {
                Some(t) => t.weight += weight,
                None => terms.push(ExpTerm {
                    weight,
                    frequency: vec![f],
                }),
            }
        }
    }
    terms.retain(|t| t.weight.norm() > 1e-15);
    ExpSumModel::new(1, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalPart {
    Real,
    Imag,
    Abs,
}

impl SignalPart {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalPart::Real => "real",
            SignalPart::Imag => "imag",
            SignalPart::Abs => "abs",
        }
    }

    fn apply(self, v: Complex64) -> f64 {
        match self {
            SignalPart::Real => v.re,
            SignalPart::Imag => v.im,
            SignalPart::Abs => v.norm(),
        }
    }
}

/// Evenly spaced real points per variable: `steps` values from `lo` to `hi`
/// inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub ranges: Vec<(f64, f64)>,
    pub steps: Vec<usize>,
}

impl GridSpec {
    fn axis(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.ranges[k];
        let s = self.steps[k];
        if s == 1 {
            return vec![lo];
        }
        (0..s).map(|i| lo + (hi - lo) * i as f64 / (s - 1) as f64).collect()
    }
}

/// Comma-separated table `z1,...,zn,value` of the model on a real grid.
pub fn emit_signal(m: &ExpSumModel, grid: &GridSpec, which: SignalPart) -> Result<String, InterpError> {
    if m.n > 2 {
        return Err(InterpError::Invalid("gridded output supports at most two variables".into()));
    }
    if grid.ranges.len() != m.n || grid.steps.len() != m.n {
        return Err(InterpError::Invalid(format!("grid needs one range and step count per variable ({})", m.n)));
    }
    if grid.steps.contains(&0) {
        return Err(InterpError::Invalid("step counts must be positive".into()));
    }
    let axes: Vec<Vec<f64>> = (0..m.n).map(|k| grid.axis(k)).collect();
    let mut out: String = (1..=m.n).map(|k| format!("z{k},")).collect();
    out.push_str(which.as_str());
    out.push('\n');
    let mut point = vec![0usize; m.n];
    loop {
        let coords: Vec<f64> = point.iter().enumerate().map(|(k, &i)| axes[k][i]).collect();
        let z: Vec<Complex64> = coords.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        let v = which.apply(eval_expsum(m, &z));
        for x in &coords {
            out.push_str(&fmt_f64(*x));
            out.push(',');
        }
        out.push_str(&fmt_f64(v));
        out.push('\n');
        // odometer over the grid, last variable fastest
        let mut k = m.n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            point[k] += 1;
            if point[k] < axes[k].len() {
                break;
            }
            point[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::PI;

    #[test]
    fn pure_cosine_at_zero_frequency_merges() {
        let m = damped_sinusoid_to_expsum(&[DampedSinusoid {
            amplitude: 1.0,
            damping: 0.0,
            angular_frequency: 0.0,
            phase: 0.0,
        }])
        .unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.terms[0].weight - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn damped_component_terms() {
        let m = damped_sinusoid_to_expsum(&[DampedSinusoid {
            amplitude: 2.0,
            damping: -0.1,
            angular_frequency: 1.0,
            phase: PI / 4.0,
        }])
        .unwrap();
        assert_eq!(m.len(), 2);
        // canonical order puts Im f = -1 first
        assert!((m.terms[0].frequency[0] - c(-0.1, -1.0)).norm() < 1e-15);
        assert!((m.terms[0].weight - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        assert!((m.terms[1].weight - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        for t in [0.0, 0.7, 3.3, -5.0] {
            let v = m.eval(&[c(t, 0.0)]);
            assert!(v.im.abs() < 1e-12);
            let want = 2.0 * (-0.1 * t).exp() * (t + PI / 4.0).cos();
            assert!((v.re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_model_table() {
        let m = ExpSumModel::new(1, vec![ExpTerm { weight: c(1.0, 0.0), frequency: vec![c(0.0, 0.0)] }]).unwrap();
        let g = GridSpec { ranges: vec![(0.0, 2.0)], steps: vec![3] };
        let t = emit_signal(&m, &g, SignalPart::Real).unwrap();
        assert_eq!(t, "z1,real\n0.0,1.0\n1.0,1.0\n2.0,1.0\n");
    }

    #[test]
    fn abs_of_cosine_is_even() {
        let m = damped_sinusoid_to_expsum(&[DampedSinusoid {
            amplitude: 1.0,
            damping: 0.0,
            angular_frequency: 0.8,
            phase: 0.0,
        }])
        .unwrap();
        let g = GridSpec { ranges: vec![(-3.0, 3.0)], steps: vec![7] };
        let t = emit_signal(&m, &g, SignalPart::Abs).unwrap();
        let vals: Vec<f64> = t.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        for i in 0..vals.len() {
            assert!((vals[i] - vals[vals.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_variable_grid_row_count() {
        let m = crate::interp::tests::example7();
        let g = GridSpec { ranges: vec![(0.0, 9.0), (0.0, 9.0)], steps: vec![10, 10] };
        let t = emit_signal(&m, &g, SignalPart::Real).unwrap();
        assert_eq!(t.lines().count(), 101);
        assert!(t.lines().skip(1).all(|l| l.split(',').all(|f| f.parse::<f64>().unwrap().is_finite())));
    }
}
