//! Multi-indices, truncated moment sequences and the matrices built from
//! them: moment, localizing, Hankel and hyponormality blocks.

mod index;
pub mod io;
mod matrices;
mod poly;
mod sequence;

pub use index::{enumerate_indices, index_count, MultiIndex};
pub use matrices::{
    classify_structure, hankel_matrix, hyponormality_block, localizing_matrix, moment_matrix,
    MatrixKind, MomentMatrix, Structure, DEFAULT_STRUCTURE_TOL,
};
pub use poly::Polynomial;
pub use sequence::{MomentSequence, SequenceMode};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("missing moment {key}")]
    MissingMoment { key: String },
    #[error("order {d} is below the required order {k}")]
    OrderTooSmall { d: u32, k: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    ModeMismatch(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
