//! Complex polynomial optimization problems and their moment relaxations.

mod problem;
mod relax;
mod sdpa;

pub use problem::{
    parse_problem, write_problem, Constraint, ConstraintKind, PolynomialProblem, HERMITIAN_TOL,
};
pub use relax::{
    assemble_relaxation, assemble_relaxation_with, realify, Affine, AffineBlock, BlockOrigin,
    LinearEquality, Part, RelaxOptions, RelaxationMap, SdpProblem,
};
pub use sdpa::{export_sdpa, import_solution, parse_sdpa};

use thiserror::Error;

use crate::moment::MomentError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{what} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { what: String, defect: f64 },
    #[error("relaxation of order {d} is not defined; order {required} or more is needed")]
    OrderTooSmall { d: u32, required: u32 },
    #[error("{0}")]
    Shape(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
}
