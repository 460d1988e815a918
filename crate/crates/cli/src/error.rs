use std::path::PathBuf;

use momex::extraction::{ExtractionError, ExtractionFailure};
use momex::hierarchy::HierarchyError;
use momex::interp::InterpError;
use momex::moment::MomentError;
use momex::sdp::SdpError;
use thiserror::Error;

pub const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  usage error
   3  file could not be read or written
   4  malformed input file
  10  moment matrix is not flat (rank not preserved)
  11  shift operators are inconsistent with the data
  12  shift operators are not jointly hyponormal
  13  moment matrix is not positive semidefinite
  14  order too small
  15  Hankel rank did not stabilize
  16  degenerate basis or diagonalization
  17  solver breakdown or suspected infeasibility
  18  node at zero (frequency undefined)
  19  other numerical failure";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Moment(#[from] MomentError),
    #[error("{0}")]
    Hierarchy(#[from] HierarchyError),
    #[error("{0}")]
    Extraction(ExtractionError),
    #[error("{0}")]
    Solver(#[from] SdpError),
    #[error("solver stopped with status {0}")]
    SolverStatus(&'static str),
    #[error("{0}")]
    Interp(InterpError),
}

impl From<ExtractionFailure> for CliError {
    fn from(f: ExtractionFailure) -> Self {
        CliError::Extraction(f.error)
    }
}

impl From<InterpError> for CliError {
    fn from(e: InterpError) -> Self {
        match e {
            InterpError::Extraction(f) => CliError::Extraction(f.error),
            InterpError::Moment(m) => CliError::Moment(m),
            other => CliError::Interp(other),
        }
    }
}

fn extraction_code(e: &ExtractionError) -> i32 {
    match e {
        ExtractionError::NotFlat { .. } => 10,
        ExtractionError::ShiftInconsistent { .. } => 11,
        ExtractionError::NotHyponormal { .. } => 12,
        ExtractionError::NotPsd { .. } => 13,
        ExtractionError::OrderTooSmall { .. } => 14,
        ExtractionError::BasisDegenerate { .. }
        | ExtractionError::DegenerateCombination { .. }
        | ExtractionError::IsotropicEigenvector { .. } => 16,
        ExtractionError::Moment(_) => 4,
        ExtractionError::Linalg(_) => 19,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Usage(_) => 2,
            CliError::Moment(_) => 4,
            CliError::Hierarchy(h) => match h {
                HierarchyError::OrderTooSmall { .. } => 14,
                HierarchyError::Infeasible(_) => 17,
                _ => 4,
            },
            CliError::Extraction(e) => extraction_code(e),
            CliError::Solver(s) => match s {
                SdpError::Invalid(_) => 19,
                _ => 17,
            },
            CliError::SolverStatus(_) => 17,
            CliError::Interp(i) => match i {
                InterpError::RankNotStabilized { .. } => 15,
                InterpError::AtomAtZero { .. } => 18,
                InterpError::KernelNotUnidimensional { .. } | InterpError::DegenerateKernel { .. } => 16,
                InterpError::Invalid(_) => 4,
                InterpError::Extraction(f) => extraction_code(&f.error),
                InterpError::Moment(_) => 4,
                InterpError::Linalg(_) => 19,
            },
        }
    }
}
