//! `momex` command-line front end.

mod commands;
mod error;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::EXIT_CODES;

#[derive(Debug, Parser)]
#[command(name = "momex", version, about = "Atomic measure extraction from truncated moment data", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Real,
    Imag,
    Abs,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Where to write the command's output file (measure, model, samples, ...).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the random combination of shift operators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative threshold for numeric rank.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    /// Allowed relative negative eigenvalue of the moment matrix.
    #[arg(long, global = true)]
    pub psd_tol: Option<f64>,
    /// Allowed shift residual relative to the factor norm.
    #[arg(long, global = true)]
    pub shift_tol: Option<f64>,
    /// Allowed negative eigenvalue of the operator hyponormality blocks.
    #[arg(long, global = true)]
    pub hypo_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract an atomic measure from a moment sequence file.
    Extract {
        input: PathBuf,
        /// Extraction order (defaults to the order of the data).
        #[arg(long)]
        order: Option<u32>,
        /// Order gap d_K used for flatness and hyponormality.
        #[arg(long, default_value_t = 1)]
        dk: u32,
    },
    /// Solve the moment relaxation of a problem file and extract minimizers.
    Solve {
        input: PathBuf,
        /// Relaxation order (defaults to the smallest admissible order).
        #[arg(long)]
        order: Option<u32>,
        /// Add joint hyponormality blocks to the relaxation.
        #[arg(long)]
        enforce_hypo: bool,
        /// Solver iteration limit.
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Recover an exponential sum from grid samples.
    Interpolate {
        /// Hankel-mode sample file.
        #[arg(required_unless_present = "model", conflicts_with = "model")]
        input: Option<PathBuf>,
        /// Sample this model instead of reading samples.
        #[arg(long, requires = "sample")]
        model: Option<PathBuf>,
        /// Grid order used with --model.
        #[arg(long)]
        sample: Option<u32>,
        /// Largest order tried.
        #[arg(long)]
        d_max: Option<u32>,
    },
    /// Sample an exponential-sum model on the grid |alpha| <= 2d.
    Sample {
        model: PathBuf,
        #[arg(long)]
        order: u32,
    },
    /// Tabulate an exponential-sum model on a real grid.
    Signal {
        model: PathBuf,
        /// One `lo:hi` range per variable.
        #[arg(long = "range", required = true, allow_hyphen_values = true)]
        ranges: Vec<String>,
        /// One point count per variable.
        #[arg(long = "steps", required = true)]
        steps: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Part::Real)]
        part: Part,
    },
    /// Read-only diagnostics of a moment sequence file.
    Check {
        input: PathBuf,
        /// Order to inspect (defaults to the order of the data).
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, default_value_t = 1)]
        dk: u32,
    },
    /// Write the real SDP relaxation of a problem in sparse SDPA format.
    ExportSdpa {
        input: PathBuf,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        enforce_hypo: bool,
    },
    /// Map an external solver's variable vector back to a moment sequence.
    ImportSolution {
        problem: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        enforce_hypo: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::run(&cli);
    let code = commands::finish(&cli.global, outcome);
    ExitCode::from(code as u8)
}
