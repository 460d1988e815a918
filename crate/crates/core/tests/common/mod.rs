//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use momex::extraction::{extract_measure, ExtractConfig, Extraction, ExtractionFailure, Tolerances};
use momex::hierarchy::{assemble_relaxation, parse_problem, PolynomialProblem};
use momex::moment::io::parse_sequence;
use momex::moment::MomentSequence;
use momex::sdp::{solve, SolveOptions, Solution};
use num_complex::Complex64;
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    let p = fixture_path(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn sequence(name: &str) -> MomentSequence {
    parse_sequence(&fixture(name)).expect("fixture parses")
}

pub fn problem(name: &str) -> PolynomialProblem {
    parse_problem(&fixture(name)).expect("fixture parses")
}

/// Thresholds for matrices printed with four decimals: entries carry
/// rounding errors up to 5e-5, so numerically zero eigenvalues sit near 1e-4.
pub fn printed_tolerances() -> Tolerances {
    Tolerances {
        rank: 1e-4,
        psd: 1e-4,
        shift: 1e-3,
        hyponormal: 1e-3,
        ..Tolerances::default()
    }
}

pub fn extract_printed(seq: &MomentSequence, dk: u32) -> Result<Extraction, ExtractionFailure> {
    let cfg = ExtractConfig::new(seq.d()).with_dk(dk).with_tol(printed_tolerances());
    extract_measure(seq, &cfg)
}

/// One relaxation solved and post-processed.
pub struct Run {
    pub problem: PolynomialProblem,
    pub d: u32,
    pub solution: Solution,
    pub seq: MomentSequence,
    pub extraction: Result<Extraction, ExtractionFailure>,
}

pub fn run_relaxation(problem_file: &str, d: u32, enforce: bool) -> Run {
    let problem = problem(problem_file);
    let (sdp, map) = assemble_relaxation(&problem, d, enforce).expect("relaxation assembles");
    let solution = solve(&sdp, &SolveOptions::default()).expect("solver runs");
    let seq = map.to_sequence(&solution.variables).expect("moments map back");
    let cfg = ExtractConfig::new(d).with_dk(problem.dk());
    let extraction = extract_measure(&seq, &cfg);
    Run {
        problem,
        d,
        solution,
        seq,
        extraction,
    }
}

pub fn cdist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest atom and weight error after matching every expected atom to its
/// nearest recovered one; `None` if the counts differ or two expected atoms
/// claim the same recovered one.
pub fn measure_error(
    atoms: &[Vec<Complex64>],
    weights: &[Complex64],
    want_atoms: &[Vec<Complex64>],
    want_weights: &[Complex64],
) -> Option<f64> {
    if atoms.len() != want_atoms.len() {
        return None;
    }
    let mut used = vec![false; atoms.len()];
    let mut err = 0.0_f64;
    for (wa, ww) in want_atoms.iter().zip(want_weights) {
        let (k, d) = atoms
            .iter()
            .enumerate()
            .map(|(k, a)| (k, cdist(a, wa)))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        if used[k] {
            return None;
        }
        used[k] = true;
        err = err.max(d).max((weights[k] - ww).norm());
    }
    Some(err)
}

pub fn crand(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::new(rng.random_range(lo..hi), rng.random_range(lo..hi))
}

/// `r` points of `C^n` in the box `[-1.5, 1.5]^2` per coordinate with
/// pairwise distance at least `sep`.
pub fn separated_points(rng: &mut impl Rng, n: usize, r: usize, sep: f64) -> Vec<Vec<Complex64>> {
    let mut pts: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    while pts.len() < r {
        let p: Vec<Complex64> = (0..n).map(|_| crand(rng, -1.5, 1.5)).collect();
        let far = pts.iter().all(|q| {
            p.iter().zip(q).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() >= sep
        });
        if far {
            pts.push(p);
        }
    }
    pts
}

pub mod props {
    //! Randomized invariant checks driven by a seed. Each returns the
    //! measured error (or a description of the failure).

    use super::*;
    use momex::extraction::{extract_measure, ExtractConfig, Mode};
    use momex::interp::{interpolate, sample_grid, ExpSumModel, ExpTerm, InterpConfig};
    use momex::linalg::{eig_general, hermitian_eig, numeric_rank, CMatrix};
    use momex::moment::{
        classify_structure, enumerate_indices, index_count, moment_matrix, MomentSequence,
        SequenceMode, DEFAULT_STRUCTURE_TOL,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Smallest order `d` with `index_count(n, d - 1) >= r`, so generic
    /// `r`-atomic data is flat at `d`.
    pub fn flat_order(n: usize, r: usize) -> u32 {
        let mut d = 1;
        while index_count(n, d - 1) < r {
            d += 1;
        }
        d
    }

    pub fn positive_weights(rng: &mut impl Rng, r: usize) -> Vec<Complex64> {
        (0..r).map(|_| Complex64::new(rng.random_range(0.2..1.0), 0.0)).collect()
    }

    /// Atomic measure -> paired moments -> extraction, at `n <= 3`, `r <= 4`.
    pub fn measure_round_trip(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=3);
        let r = rng.random_range(1..=4);
        let atoms = separated_points(&mut rng, n, r, 0.3);
        let weights = positive_weights(&mut rng, r);
        let d = flat_order(n, r);
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, d, &atoms, &weights);
        let ex = extract_measure(&seq, &ExtractConfig::new(d).with_seed(seed))
            .map_err(|f| format!("n={n} r={r} d={d}: {}", f.error))?;
        measure_error(&ex.measure.atoms, &ex.measure.weights, &atoms, &weights)
            .ok_or_else(|| format!("n={n} r={r}: recovered {} atoms", ex.measure.len()))
    }

    pub fn random_model(rng: &mut impl Rng, n: usize, terms: usize) -> ExpSumModel {
        // nodes exp(f) kept apart so the sample grid is well conditioned
        let mut out: Vec<ExpTerm> = Vec::with_capacity(terms);
        while out.len() < terms {
            let frequency: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-2.5..2.5)))
                .collect();
            let node: Vec<Complex64> = frequency.iter().map(|f| f.exp()).collect();
            let far = out.iter().all(|t| cdist(&t.node(), &node) >= 0.3);
            if far {
                let weight = Complex64::from_polar(
                    rng.random_range(0.3..1.0),
                    rng.random_range(-3.0..3.0),
                );
                out.push(ExpTerm { weight, frequency });
            }
        }
        ExpSumModel::new(n, out).expect("valid model")
    }

    /// Exponential sum -> grid samples -> interpolation, at `n <= 2` and at
    /// most 4 terms.
    pub fn expsum_round_trip(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=2);
        let terms = rng.random_range(1..=4);
        let model = random_model(&mut rng, n, terms);
        let seq = sample_grid(&model, terms as u32);
        let cfg = InterpConfig {
            seed,
            ..InterpConfig::default()
        };
        let r = interpolate(&seq, &cfg).map_err(|e| format!("n={n} terms={terms}: {e}"))?;
        r.model
            .distance(&model)
            .ok_or_else(|| format!("n={n} terms={terms}: recovered {} terms", r.model.len()))
    }

    /// Largest atom/weight change across ten combination seeds.
    pub fn seed_spread(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let atoms = separated_points(&mut rng, 2, 3, 0.3);
        let weights = positive_weights(&mut rng, 3);
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, 2, &atoms, &weights);
        let base = extract_measure(&seq, &ExtractConfig::new(2)).map_err(|f| f.error.to_string())?;
        let mut spread = 0.0_f64;
        for s in 1..10 {
            let ex = extract_measure(&seq, &ExtractConfig::new(2).with_seed(s)).map_err(|f| f.error.to_string())?;
            let e = measure_error(&ex.measure.atoms, &ex.measure.weights, &base.measure.atoms, &base.measure.weights)
                .ok_or("atom count changed with the seed")?;
            spread = spread.max(e);
        }
        Ok(spread)
    }

    /// Atoms with unimodular coordinates give Toeplitz data and unitary
    /// shifts; returns `max ||T^* T − I||`.
    pub fn toeplitz_unitary(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=2);
        let r = rng.random_range(1..=3);
        let mut atoms: Vec<Vec<Complex64>> = Vec::new();
        while atoms.len() < r {
            let p: Vec<Complex64> = (0..n)
                .map(|_| Complex64::from_polar(1.0, rng.random_range(-3.1..3.1)))
                .collect();
            if atoms.iter().all(|q| cdist(q, &p) >= 0.3) {
                atoms.push(p);
            }
        }
        let weights = positive_weights(&mut rng, r);
        let d = flat_order(n, r);
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, d, &atoms, &weights);
        let m = moment_matrix(&seq, d).map_err(|e| e.to_string())?;
        if !classify_structure(&m, DEFAULT_STRUCTURE_TOL).toeplitz {
            return Err("data is not Toeplitz".into());
        }
        let ex = extract_measure(&seq, &ExtractConfig::new(d)).map_err(|f| f.error.to_string())?;
        Ok(ex.shifts.unitary_defect())
    }

    /// Real atoms with positive weights give Hankel data and real symmetric
    /// shifts; returns `max(||T − T^T||, max |Im T|)`.
    pub fn hankel_real_symmetric(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=3);
        let r = rng.random_range(1..=4);
        let mut atoms: Vec<Vec<Complex64>> = Vec::new();
        while atoms.len() < r {
            let p: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.5..1.5), 0.0)).collect();
            if atoms.iter().all(|q| cdist(q, &p) >= 0.3) {
                atoms.push(p);
            }
        }
        let weights = positive_weights(&mut rng, r);
        let d = flat_order(n, r);
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, d, &atoms, &weights);
        let m = moment_matrix(&seq, d).map_err(|e| e.to_string())?;
        if !classify_structure(&m, DEFAULT_STRUCTURE_TOL).hankel {
            return Err("data is not Hankel".into());
        }
        let ex = extract_measure(&seq, &ExtractConfig::new(d)).map_err(|f| f.error.to_string())?;
        Ok(ex.shifts.symmetric_defect().max(ex.shifts.max_imag()))
    }

    /// Complex Hankel data in transpose mode gives complex symmetric shifts;
    /// returns `max ||T − T^T||`.
    pub fn transpose_symmetric(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=2);
        let terms = rng.random_range(1..=3);
        let model = random_model(&mut rng, n, terms);
        let seq = sample_grid(&model, flat_order(n, terms));
        let d = seq.d();
        let ex = extract_measure(&seq, &ExtractConfig::new(d)).map_err(|f| f.error.to_string())?;
        if ex.shifts.mode != Mode::Transpose {
            return Err("expected transpose mode".into());
        }
        // the defect is relative to the size of the shifts
        let scale = ex.shifts.shifts.iter().map(CMatrix::norm_fro).fold(1.0, f64::max);
        Ok(ex.shifts.symmetric_defect() / scale)
    }

    /// Vandermonde independence: `d` distinct points give a `d x
    /// index_count(n, d − 1)` matrix `(z_k^α)` of rank `d`.
    pub fn vandermonde_rank(seed: u64) -> Result<(), String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=3);
        let d = rng.random_range(1..=5);
        let pts = separated_points(&mut rng, n, d, 0.2);
        let idx = enumerate_indices(n, d as u32 - 1);
        let v = CMatrix::from_fn(d, idx.len(), |k, j| idx[j].pow(&pts[k]));
        let g = &v * &v.adjoint();
        let e = hermitian_eig(&g.hermitian_part(), 1e-12).map_err(|e| e.to_string())?;
        // Gram eigenvalues are squared singular values
        let rank = numeric_rank(&e.eigenvalues, 1e-12);
        if rank == d {
            Ok(())
        } else {
            Err(format!("n={n} d={d}: rank {rank}"))
        }
    }

    /// Range of rank-one sums: for independent `u_i` and nonzero `c_i`, both
    /// `Σ c_i u_i u_i^T` and `Σ c_i u_i u_i^*` have range `span{u_i}`.
    /// Returns the largest projection residual.
    pub fn rank_one_range(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=n);
        let u: Vec<Vec<Complex64>> = (0..d).map(|_| (0..n).map(|_| crand(&mut rng, -1.0, 1.0)).collect()).collect();
        let cs: Vec<Complex64> = (0..d)
            .map(|_| Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0)))
            .collect();
        let umat = CMatrix::from_fn(n, d, |i, k| u[k][i]);
        let mut worst = 0.0_f64;
        for transpose in [true, false] {
            let a = CMatrix::from_fn(n, n, |i, j| {
                (0..d)
                    .map(|k| cs[k] * u[k][i] * if transpose { u[k][j] } else { u[k][j].conj() })
                    .sum()
            });
            // orthonormal basis of the range from the eigenvectors of A A^*
            let g = (&a * &a.adjoint()).hermitian_part();
            let e = hermitian_eig(&g, 1e-12).map_err(|e| e.to_string())?;
            let rank = numeric_rank(&e.eigenvalues, 1e-12);
            if rank != d {
                return Err(format!("n={n} d={d}: rank {rank}"));
            }
            let q = e.vectors.select_cols(&((n - rank)..n).collect::<Vec<_>>());
            let proj = &q * &q.adjoint();
            // span{u} inside the range, and the range inside span{u}
            let r1 = (&(&proj * &umat) - &umat).norm_fro() / umat.norm_fro();
            let qu = orthonormal_columns(&umat);
            let pu = &qu * &qu.adjoint();
            let r2 = (&(&pu * &a) - &a).norm_fro() / a.norm_fro();
            worst = worst.max(r1).max(r2);
        }
        Ok(worst)
    }

    fn orthonormal_columns(m: &CMatrix) -> CMatrix {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for j in 0..m.cols() {
            let mut v = m.col(j);
            for _ in 0..2 {
                for q in &cols {
                    let p: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= p * y;
                    }
                }
            }
            let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.iter().map(|z| z / nrm).collect());
        }
        CMatrix::from_fn(m.rows(), cols.len(), |i, j| cols[j][i])
    }

    /// The eigenvalues of each shift `T_k` are the `k`-th coordinates of the
    /// atoms; returns the largest distance.
    pub fn shifts_have_atom_spectra(seed: u64) -> Result<f64, String> {
        let mut rng = rng(seed);
        let r = rng.random_range(1..=3);
        let atoms = separated_points(&mut rng, 2, r, 0.3);
        let weights = positive_weights(&mut rng, r);
        let d = flat_order(2, r);
        let seq = MomentSequence::from_atoms(SequenceMode::Paired, d, &atoms, &weights);
        let ex = extract_measure(&seq, &ExtractConfig::new(d)).map_err(|f| f.error.to_string())?;
        let mut worst = 0.0_f64;
        for (k, t) in ex.shifts.shifts.iter().enumerate() {
            let eig = eig_general(t).map_err(|e| e.to_string())?;
            for a in &atoms {
                let near = eig.values.iter().map(|l| (l - a[k]).norm()).fold(f64::INFINITY, f64::min);
                worst = worst.max(near);
            }
        }
        Ok(worst)
    }
}
