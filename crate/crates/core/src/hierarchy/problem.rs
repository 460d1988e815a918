//! Problem file format.
//!
//! ```text
//! # minimize |z1|^2 subject to |z1|^2 - 1 = 0
//! version 1
//! n 1
//! objective
//! 1 | 1 | 1.0 | 0.0
//! constraint eq
//! 1 | 1 | 1.0 | 0.0
//! 0 | 0 | -1.0 | 0.0
//! ```
//!
//! Records are `alpha | beta | re | im`, the coefficient of
//! `conj(z)^alpha z^beta`. Inequalities read `g >= 0`, equalities `g = 0`.

use serde::Serialize;

use super::HierarchyError;
use crate::moment::io::{content_lines, fmt_f64, parse_float, parse_index};
use crate::moment::Polynomial;

/// Absolute tolerance on `|c_{α,β} − conj(c_{β,α})|` when validating input.
pub const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `g = 0`
    Eq,
    /// `g >= 0`
    Ineq,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Eq => "eq",
            ConstraintKind::Ineq => "ineq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub poly: Polynomial,
    pub kind: ConstraintKind,
    /// 1-based position of the constraint in the source file. Both halves of
    /// a split complex equality share it.
    pub source: usize,
}

impl Constraint {
    pub fn half_degree(&self) -> u32 {
        self.poly.half_degree()
    }
}

/// `min f(z) s.t. g_i(z) >= 0 or = 0` with Hermitian `f` and `g_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProblem {
    pub n: usize,
    pub objective: Polynomial,
    pub constraints: Vec<Constraint>,
}

impl PolynomialProblem {
    /// Builds a problem, splitting non-Hermitian equalities into their real
    /// and imaginary parts. Non-Hermitian objectives or inequalities are
    /// rejected.
    pub fn new(
        n: usize,
        objective: Polynomial,
        constraints: Vec<(Polynomial, ConstraintKind)>,
    ) -> Result<Self, HierarchyError> {
        if !objective.is_hermitian(HERMITIAN_TOL) {
            return Err(HierarchyError::NotHermitian {
                what: "objective".into(),
                defect: objective.hermitian_defect(),
            });
        }
        let mut out = Vec::new();
        for (i, (g, kind)) in constraints.into_iter().enumerate() {
            if g.n() != n {
                return Err(HierarchyError::Shape(format!(
                    "constraint {} has {} variables, expected {n}",
                    i + 1,
                    g.n()
                )));
            }
            if g.is_hermitian(HERMITIAN_TOL) {
                out.push(Constraint {
                    poly: hermitize(&g),
                    kind,
                    source: i + 1,
                });
                continue;
            }
            if kind == ConstraintKind::Ineq {
                return Err(HierarchyError::NotHermitian {
                    what: format!("inequality constraint {}", i + 1),
                    defect: g.hermitian_defect(),
                });
            }
            let (re, im) = g.hermitian_parts();
            for part in [re, im] {
                if !part.is_zero() {
                    out.push(Constraint {
                        poly: part,
                        kind,
                        source: i + 1,
                    });
                }
            }
        }
        Ok(Self {
            n,
            objective: hermitize(&objective),
            constraints: out,
        })
    }

    /// `d_K = max(1, k_1, ..., k_m)`.
    pub fn dk(&self) -> u32 {
        self.constraints
            .iter()
            .map(Constraint::half_degree)
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Smallest order at which the relaxation is defined.
    pub fn min_order(&self) -> u32 {
        self.dk().max(self.objective.half_degree())
    }
}

/// Hermitian part `(p + p♯)/2`, removing round-off asymmetry.
fn hermitize(p: &Polynomial) -> Polynomial {
    p.hermitian_parts().0
}

pub fn parse_problem(text: &str) -> Result<PolynomialProblem, HierarchyError> {
    enum Section {
        Header,
        Objective,
        Constraint,
    }
    let mut section = Section::Header;
    let mut version = false;
    let mut n: Option<usize> = None;
    let mut objective: Option<Polynomial> = None;
    let mut constraints: Vec<(Polynomial, ConstraintKind)> = Vec::new();
    let err = |line: usize, msg: String| HierarchyError::Parse { line, msg };

    for (ln, line) in content_lines(text) {
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or("");
        if !line.contains('|') {
            match head {
                "version" => {
                    if words.next() != Some("1") {
                        return Err(err(ln, "unsupported version".into()));
                    }
                    version = true;
                }
                "n" => {
                    let v = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .filter(|v| *v >= 1)
                        .ok_or_else(|| err(ln, "bad n".into()))?;
                    n = Some(v);
                }
                "objective" => {
                    let nv = n.ok_or_else(|| err(ln, "'n' must precede 'objective'".into()))?;
                    if objective.is_some() {
                        return Err(err(ln, "duplicate objective".into()));
                    }
                    objective = Some(Polynomial::new(nv));
                    section = Section::Objective;
                }
                "constraint" => {
                    let nv = n.ok_or_else(|| err(ln, "'n' must precede constraints".into()))?;
                    let kind = match words.next() {
                        Some("eq") => ConstraintKind::Eq,
                        Some("ineq") => ConstraintKind::Ineq,
                        other => {
                            return Err(err(ln, format!("constraint kind must be eq or ineq, got {other:?}")))
                        }
                    };
                    constraints.push((Polynomial::new(nv), kind));
                    section = Section::Constraint;
                }
                other => return Err(err(ln, format!("unknown directive '{other}'"))),
            }
            continue;
        }
        let nv = n.ok_or_else(|| err(ln, "record before 'n'".into()))?;
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 4 {
            return Err(err(ln, "record needs 'alpha | beta | re | im'".into()));
        }
        let a = parse_index(ln, fields[0], nv)?;
        let b = parse_index(ln, fields[1], nv)?;
        let v = num_complex::Complex64::new(parse_float(ln, fields[2])?, parse_float(ln, fields[3])?);
        let target = match section {
            Section::Header => return Err(err(ln, "record outside a section".into())),
            Section::Objective => objective.as_mut().expect("section opened"),
            Section::Constraint => &mut constraints.last_mut().expect("section opened").0,
        };
        target.add_term(a, b, v);
    }
    if !version {
        return Err(err(0, "missing 'version' header".into()));
    }
    let n = n.ok_or_else(|| err(0, "missing 'n'".into()))?;
    let objective = objective.ok_or_else(|| err(0, "missing objective".into()))?;
    PolynomialProblem::new(n, objective, constraints)
}

pub fn write_problem(p: &PolynomialProblem) -> String {
    let mut out = format!("version 1\nn {}\nobjective\n", p.n);
    let push_poly = |out: &mut String, poly: &Polynomial| {
        for ((a, b), v) in poly.terms() {
            out.push_str(&format!("{a} | {b} | {} | {}\n", fmt_f64(v.re), fmt_f64(v.im)));
        }
    };
    push_poly(&mut out, &p.objective);
    for c in &p.constraints {
        out.push_str(&format!("constraint {}\n", c.kind.as_str()));
        push_poly(&mut out, &c.poly);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "version 1\nn 1\nobjective\n1 | 1 | 1 | 0\n0 | 1 | -0.5 | -0.8660254037844386\n1 | 0 | -0.5 | 0.8660254037844386\n0 | 0 | 1 | 0\nconstraint eq\n1 | 1 | 1 | 0\n0 | 0 | -1 | 0\nconstraint eq\n0 | 3 | 1 | 0\n0 | 0 | -1 | 0\n";

    #[test]
    fn cube_root_equality_is_split() {
        let p = parse_problem(TORUS).unwrap();
        assert_eq!(p.constraints.len(), 3);
        assert_eq!(p.dk(), 3);
        assert!(p.constraints.iter().all(|c| c.poly.is_hermitian(0.0)));
        assert_eq!(p.constraints[2].source, 2);
    }

    #[test]
    fn unconstrained_problem_has_unit_gap() {
        let p = parse_problem("version 1\nn 1\nobjective\n1 | 1 | 1 | 0\n").unwrap();
        assert!(p.constraints.is_empty());
        assert_eq!(p.dk(), 1);
    }

    #[test]
    fn non_hermitian_inequality_is_rejected() {
        let text = "version 1\nn 1\nobjective\n1 | 1 | 1 | 0\nconstraint ineq\n0 | 1 | 1 | 0\n";
        assert!(matches!(parse_problem(text), Err(HierarchyError::NotHermitian { .. })));
    }

    #[test]
    fn write_then_parse_is_stable() {
        let p = parse_problem(TORUS).unwrap();
        let q = parse_problem(&write_problem(&p)).unwrap();
        assert_eq!(p.objective, q.objective);
        assert_eq!(p.constraints.len(), q.constraints.len());
        for (a, b) in p.constraints.iter().zip(&q.constraints) {
            assert_eq!(a.poly, b.poly);
        }
    }

    #[test]
    fn bad_kind_reports_line() {
        let text = "version 1\nn 1\nobjective\n1 | 1 | 1 | 0\nconstraint lt\n";
        assert!(matches!(parse_problem(text), Err(HierarchyError::Parse { line: 5, .. })));
    }
}
