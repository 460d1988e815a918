use num_complex::Complex64;
use serde::Serialize;

use super::diag::simultaneous_diagonalize;
use super::shifts::shift_basis;
use super::{
    check_flatness, check_hyponormality, compute_shifts, AtomicMeasure, ExtractionError, Mode,
    ShiftFamily, Tolerances,
};
use crate::linalg::{c, hermitian_eig, psd_root_factor_with, takagi, CMatrix};
use crate::moment::{
    classify_structure, hyponormality_block, moment_matrix, MomentSequence, MultiIndex,
    SequenceMode, Structure, DEFAULT_STRUCTURE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Truncation order used for extraction (must not exceed the data order).
    pub d: u32,
    /// Order gap `d_K` of the constraint set (1 when unconstrained).
    pub dk: u32,
    /// `None` picks conjugate-transpose for paired data and transpose for
    /// Hankel data.
    pub mode: Option<Mode>,
    pub seed: u64,
    pub tol: Tolerances,
}

impl ExtractConfig {
    pub fn new(d: u32) -> Self {
        Self {
            d,
            dk: 1,
            mode: None,
            seed: 0,
            tol: Tolerances::default(),
        }
    }

    pub fn with_dk(mut self, dk: u32) -> Self {
        self.dk = dk;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Certified,
    RankPreservedUncertified,
    Failed,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Certified => "certified",
            Certification::RankPreservedUncertified => "rank_preserved_uncertified",
            Certification::Failed => "failed",
        }
    }
}

/// Hyponormality spectra for one variable pair (or a single variable when
/// `n = 1`). Variables are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSpectrum {
    pub vars: Vec<usize>,
    pub operator_spectrum: Option<Vec<f64>>,
    pub data_spectrum: Option<Vec<f64>>,
}

impl PairSpectrum {
    pub fn operator_min(&self) -> Option<f64> {
        self.operator_spectrum.as_ref().and_then(|s| s.first().copied())
    }

    pub fn data_min(&self) -> Option<f64> {
        self.data_spectrum.as_ref().and_then(|s| s.first().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionReport {
    pub mode: Mode,
    pub n: usize,
    pub d: u32,
    pub dk: u32,
    pub structure: Structure,
    /// `ranks[j]` is the numeric rank of the order-`j` leading block.
    pub ranks: Vec<usize>,
    pub flat_dk: bool,
    pub flat_1: bool,
    /// Smallest eigenvalue of `M_d` (conjugate-transpose mode).
    pub moment_min_eigenvalue: Option<f64>,
    /// Takagi values of `H_d` (transpose mode).
    pub takagi_values: Option<Vec<f64>>,
    pub basis: Vec<String>,
    pub shift_residual: Option<f64>,
    pub hyponormality: Vec<PairSpectrum>,
    /// Smallest eigenvalue over all operator blocks.
    pub hypo_min_eigenvalue: Option<f64>,
    pub commutator_norm: Option<f64>,
    /// `max_k ||T_k^* T_k − I||_F`.
    pub unitary_defect: Option<f64>,
    /// `max_k ||T_k − T_k^T||_F`.
    pub symmetric_defect: Option<f64>,
    /// Largest imaginary part of a shift entry.
    pub shift_imag: Option<f64>,
    pub diag_offdiag: Option<f64>,
    pub diag_attempts: Option<usize>,
    pub combination: Option<Vec<f64>>,
    pub reconstruction_residual: Option<f64>,
    pub certification: Certification,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl ExtractionReport {
    fn new(mode: Mode, n: usize, d: u32, dk: u32) -> Self {
        Self {
            mode,
            n,
            d,
            dk,
            structure: Structure::default(),
            ranks: Vec::new(),
            flat_dk: false,
            flat_1: false,
            moment_min_eigenvalue: None,
            takagi_values: None,
            basis: Vec::new(),
            shift_residual: None,
            hyponormality: Vec::new(),
            hypo_min_eigenvalue: None,
            commutator_norm: None,
            unitary_defect: None,
            symmetric_defect: None,
            shift_imag: None,
            diag_offdiag: None,
            diag_attempts: None,
            combination: None,
            reconstruction_residual: None,
            certification: Certification::Failed,
            notes: Vec::new(),
            error: None,
        }
    }

    /// Smallest eigenvalue over all data-level hyponormality blocks.
    pub fn data_min_eigenvalue(&self) -> Option<f64> {
        self.hyponormality
            .iter()
            .filter_map(PairSpectrum::data_min)
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub measure: AtomicMeasure,
    pub report: ExtractionReport,
    pub shifts: ShiftFamily,
    /// Factor `X` with `M_d = X^• X`; columns follow graded lex order.
    pub factor: CMatrix,
}

#[derive(Debug, Clone)]
pub struct ExtractionFailure {
    pub error: ExtractionError,
    pub report: Box<ExtractionReport>,
}

impl std::fmt::Display for ExtractionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for ExtractionFailure {}

/// Runs the full extraction pipeline on `seq` at order `config.d`.
///
/// On failure the partially filled report is returned alongside the error.
pub fn extract_measure(
    seq: &MomentSequence,
    config: &ExtractConfig,
) -> Result<Extraction, ExtractionFailure> {
    let mode = config.mode.unwrap_or(match seq.mode() {
        SequenceMode::Paired => Mode::ConjugateTranspose,
        SequenceMode::Hankel => Mode::Transpose,
    });
    let mut report = ExtractionReport::new(mode, seq.n(), config.d, config.dk);
    match run(seq, config, mode, &mut report) {
        Ok((measure, shifts, factor)) => Ok(Extraction {
            measure,
            report,
            shifts,
            factor,
        }),
        Err(error) => {
            report.certification = Certification::Failed;
            report.error = Some(error.to_string());
            Err(ExtractionFailure {
                error,
                report: Box::new(report),
            })
        }
    }
}

fn run(
    seq: &MomentSequence,
    config: &ExtractConfig,
    mode: Mode,
    report: &mut ExtractionReport,
) -> Result<(AtomicMeasure, ShiftFamily, CMatrix), ExtractionError> {
    let tol = &config.tol;
    let d = config.d;
    if d == 0 || d > seq.d() {
        return Err(ExtractionError::OrderTooSmall { d });
    }
    let n = seq.n();
    let mm = moment_matrix(seq, d)?;
    let m = &mm.matrix;
    let labels = mm.row_labels.clone();
    report.structure = classify_structure(&mm, DEFAULT_STRUCTURE_TOL);

    let flat = check_flatness(m, n, d, config.dk, mode, tol.rank)?;
    report.ranks = flat.ranks.clone();
    report.flat_1 = flat.flat_1;
    report.flat_dk = flat.flat_dk;

    let x = match mode {
        Mode::ConjugateTranspose => {
            let eig = hermitian_eig(m, tol.psd.max(1e-9))?;
            report.moment_min_eigenvalue = Some(eig.min());
            if eig.min() < -tol.psd * m.norm_fro() {
                return Err(ExtractionError::NotPsd {
                    min_eigenvalue: eig.min(),
                });
            }
            if !flat.flat_1 {
                return Err(not_flat(&flat.ranks));
            }
            psd_root_factor_with(m, tol.rank, tol.psd)?
        }
        Mode::Transpose => {
            let tk = takagi(m, tol.symmetry)?;
            let r = crate::linalg::numeric_rank(&tk.values, tol.rank);
            report.takagi_values = Some(tk.values.clone());
            if !flat.flat_1 {
                return Err(not_flat(&flat.ranks));
            }
            CMatrix::from_fn(r, m.cols(), |i, j| tk.u[(j, i)] * tk.values[i].sqrt())
        }
    };
    let r = x.rows();

    let basis = shift_basis(&x, &labels, d, tol.rank.sqrt());
    report.basis = basis.iter().map(|&j| labels[j].monomial("z")).collect();
    if basis.len() != r {
        return Err(ExtractionError::BasisDegenerate {
            found: basis.len(),
            rank: r,
        });
    }
    let family = match compute_shifts(&x, &labels, &basis, mode, tol.shift) {
        Ok(f) => f,
        Err(e) => {
            if let ExtractionError::ShiftInconsistent { residual } = e {
                report.shift_residual = Some(residual);
            }
            return Err(e);
        }
    };
    report.shift_residual = Some(family.residual);
    report.unitary_defect = Some(family.unitary_defect());
    report.symmetric_defect = Some(family.symmetric_defect());
    report.shift_imag = Some(family.max_imag());

    let mut data_ok = true;
    if mode == Mode::ConjugateTranspose {
        let hypo = check_hyponormality(&family, tol.hyponormal)?;
        report.hypo_min_eigenvalue = (!hypo.spectra.is_empty()).then_some(hypo.min_eigenvalue);
        report.commutator_norm = Some(hypo.commutator_norm);
        let pairs: Vec<Vec<usize>> = if n == 1 {
            vec![vec![0]]
        } else {
            hypo.spectra.iter().map(|((i, j), _)| vec![*i, *j]).collect()
        };
        for vars in pairs {
            let operator_spectrum = hypo
                .spectra
                .iter()
                .find(|((i, j), _)| vars == [*i, *j])
                .map(|(_, s)| s.clone());
            let data_spectrum = data_block_spectrum(seq, d, config.dk, &vars);
            if let Some(s) = &data_spectrum {
                let scale = s.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
                data_ok &= s.first().is_none_or(|v| *v >= -tol.hyponormal * scale);
            } else {
                data_ok = false;
            }
            report.hyponormality.push(PairSpectrum {
                vars: vars.iter().map(|v| v + 1).collect(),
                operator_spectrum,
                data_spectrum,
            });
        }
        if !hypo.pass {
            return Err(ExtractionError::NotHyponormal {
                min_eigenvalue: hypo.min_eigenvalue,
                commutator_norm: hypo.commutator_norm,
            });
        }
    }

    let diag = simultaneous_diagonalize(&family, config.seed, tol.separation)?;
    report.diag_offdiag = Some(diag.offdiag);
    report.diag_attempts = Some(diag.attempts);
    report.combination = Some(diag.t.clone());

    let x0 = x.col(0);
    let mut atoms = Vec::with_capacity(r);
    let mut weights = Vec::with_capacity(r);
    for j in 0..r {
        let p = diag.p.col(j);
        let w = match mode {
            Mode::ConjugateTranspose => c(crate::linalg::dot_c(&x0, &p).norm_sqr(), 0.0),
            Mode::Transpose => {
                let s = crate::linalg::dot_t(&x0, &p);
                s * s
            }
        };
        atoms.push((0..n).map(|k| diag.coords[k][j]).collect::<Vec<_>>());
        weights.push(w);
    }
    let mut measure = AtomicMeasure {
        mode,
        atoms,
        weights,
    };
    merge_duplicates(&mut measure, tol.dedup);
    if mode == Mode::ConjugateTranspose {
        let y00 = seq.mass()?.re;
        let floor = tol.weight_floor * y00.abs();
        let before = measure.len();
        let keep: Vec<bool> = measure.weights.iter().map(|w| w.re >= floor).collect();
        let mut it = keep.iter();
        measure.atoms.retain(|_| *it.next().unwrap_or(&true));
        let mut it = keep.iter();
        measure.weights.retain(|_| *it.next().unwrap_or(&true));
        if measure.len() < before {
            report
                .notes
                .push(format!("dropped {} atom(s) below the weight floor", before - measure.len()));
        }
    }
    measure.sort_canonical();
    let residual = verify_measure(&measure, &seq.truncate(d));
    report.reconstruction_residual = Some(residual);

    report.certification = match mode {
        Mode::ConjugateTranspose => {
            let structured = report.structure.hermitian
                && (report.structure.toeplitz || report.structure.hankel);
            if flat.flat_dk && (data_ok || structured) {
                Certification::Certified
            } else {
                Certification::RankPreservedUncertified
            }
        }
        Mode::Transpose => {
            if flat.flat_dk {
                Certification::Certified
            } else {
                Certification::RankPreservedUncertified
            }
        }
    };
    if report.certification == Certification::RankPreservedUncertified {
        report
            .notes
            .push("only rank M_d = rank M_(d-1) holds; check feasibility of the atoms".into());
    }
    if mode == Mode::ConjugateTranspose {
        report
            .notes
            .push("localizing conditions and the ball constraint are not checked here".into());
    }
    Ok((measure, family, x))
}

fn not_flat(ranks: &[usize]) -> ExtractionError {
    let k = ranks.len();
    ExtractionError::NotFlat {
        r_d: ranks[k - 1],
        r_prev: if k >= 2 { ranks[k - 2] } else { 0 },
    }
}

fn data_block_spectrum(seq: &MomentSequence, d: u32, dk: u32, vars: &[usize]) -> Option<Vec<f64>> {
    let gap = dk.max(1);
    let b = hyponormality_block(seq, d, gap, vars).ok()?;
    hermitian_eig(&b.matrix, 1e-6).ok().map(|e| e.eigenvalues)
}

fn merge_duplicates(m: &mut AtomicMeasure, tol: f64) {
    let mut atoms: Vec<Vec<Complex64>> = Vec::new();
    let mut weights: Vec<Complex64> = Vec::new();
    for (a, w) in m.atoms.iter().zip(&m.weights) {
        let hit = atoms.iter().position(|b| {
            let dist: f64 = a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum();
            dist.sqrt() <= tol
        });
        match hit {
            Some(k) => weights[k] += w,
            None => {
                atoms.push(a.clone());
                weights.push(*w);
            }
        }
    }
    m.atoms = atoms;
    m.weights = weights;
}

/// Largest absolute moment mismatch between `m` and the stored entries of
/// `seq`.
pub fn verify_measure(m: &AtomicMeasure, seq: &MomentSequence) -> f64 {
    let moment = |a: &MultiIndex, b: Option<&MultiIndex>| -> Complex64 {
        m.atoms
            .iter()
            .zip(&m.weights)
            .map(|(z, w)| match b {
                Some(b) => w * a.pow(z).conj() * b.pow(z),
                None => w * a.pow(z),
            })
            .sum()
    };
    match seq.mode() {
        SequenceMode::Paired => seq
            .pairs()
            .map(|((a, b), y)| (moment(a, Some(b)) - y).norm())
            .fold(0.0, f64::max),
        SequenceMode::Hankel => seq
            .singles()
            .map(|(a, y)| (moment(a, None) - y).norm())
            .fold(0.0, f64::max),
    }
}
