use super::{resample_residual, ExpSumModel, ExpTerm, InterpError, ATOM_ZERO_TOL};
use crate::extraction::{extract_measure, ExtractConfig, ExtractionReport, Tolerances};
use crate::linalg::{numeric_rank, takagi};
use crate::moment::{hankel_matrix, MomentSequence, SequenceMode};

#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub struct InterpConfig {
    /// Largest order tried; `None` uses the order of the grid.
    pub d_max: Option<u32>,
    pub seed: u64,
    pub tol: Tolerances,
}


#[derive(Debug, Clone)]
pub struct Interpolation {
    pub model: ExpSumModel,
    pub report: ExtractionReport,
    /// Order at which the rank stabilized.
    pub d: u32,
    /// `rank H_0, ..., rank H_d`.
    pub ranks: Vec<usize>,
    /// Largest `|f(α) − y_α|` over the whole grid.
    pub residual: f64,
    /// `||H_d − U D U^T||_F / ||H_d||_F`.
    pub takagi_residual: f64,
}

/// Recovers an exponential sum from a Hankel-mode sample grid.
///
/// The order is raised from 1 until `rank H_d = rank H_{d−1}`; atoms are
/// then extracted in transpose mode and mapped to frequencies by the
/// principal logarithm, so imaginary parts are only determined modulo 2π.
pub fn interpolate(seq: &MomentSequence, config: &InterpConfig) -> Result<Interpolation, InterpError> {
    if seq.mode() != SequenceMode::Hankel {
        return Err(InterpError::Invalid("interpolation needs a hankel-mode sample grid".into()));
    }
    seq.check_coverage()?;
    let d_max = config.d_max.unwrap_or(seq.d()).min(seq.d());
    let tol = &config.tol;

    let rank_of = |d: u32| -> Result<(usize, f64), InterpError> {
        let h = hankel_matrix(seq, d)?.matrix;
        let t = takagi(&h, tol.symmetry)?;
        let norm = h.norm_fro();
        let resid = (&h - &t.reconstruct()).norm_fro() / norm.max(f64::MIN_POSITIVE);
        Ok((numeric_rank(&t.values, tol.rank), resid))
    };
    let mut ranks = vec![rank_of(0)?.0];
    let mut stable = None;
    for d in 1..=d_max {
        let (r, resid) = rank_of(d)?;
        ranks.push(r);
        if r == ranks[d as usize - 1] {
            stable = Some((d, resid));
            break;
        }
    }
    let (d, takagi_residual) = stable.ok_or(InterpError::RankNotStabilized {
        d_max,
        ranks: ranks.clone(),
    })?;

    let cfg = ExtractConfig::new(d).with_seed(config.seed).with_tol(*tol);
    let ext = extract_measure(seq, &cfg)?;
    let mut terms = Vec::with_capacity(ext.measure.len());
    for (k, (atom, w)) in ext.measure.atoms.iter().zip(&ext.measure.weights).enumerate() {
        if atom.iter().any(|a| a.norm() < ATOM_ZERO_TOL) {
            return Err(InterpError::AtomAtZero { index: k });
        }
        terms.push(ExpTerm {
            weight: *w,
            frequency: atom.iter().map(|a| a.ln()).collect(),
        });
    }
    let model = ExpSumModel::new(seq.n(), terms)?;
    let residual = resample_residual(&model, seq);
    Ok(Interpolation {
        model,
        report: ext.report,
        d,
        ranks,
        residual,
        takagi_residual,
    })
}
