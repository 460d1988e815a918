//! Extraction on the printed moment matrices in `fixtures/`.

mod common;

use common::*;
use momex::extraction::{
    compute_shifts, extract_measure, Certification, ExtractConfig, ExtractionError, Mode,
};
use momex::interp::{interpolate, InterpConfig};
use momex::linalg::{c, hermitian_eig, psd_root_factor, CMatrix};
use momex::moment::{classify_structure, enumerate_indices, moment_matrix, DEFAULT_STRUCTURE_TOL};
use num_complex::Complex64;

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).max_abs()
}

#[test]
fn no_shift_spectrum_and_factor() {
    let seq = sequence("no_shift_sequence.txt");
    let m = moment_matrix(&seq, 2).unwrap();
    let e = hermitian_eig(&m.matrix, 1e-12).unwrap();
    for (got, want) in e.eigenvalues.iter().zip([0.0, 0.0, 6.0]) {
        assert!((got - want).abs() < 1e-9, "{:?}", e.eigenvalues);
    }
    let x = psd_root_factor(&m.matrix, 1e-9).unwrap();
    assert_eq!(x.rows(), 1);
    let phase = x[(0, 0)] / x[(0, 0)].norm();
    for (j, want) in [1.0, 1.0, 2.0].iter().enumerate() {
        assert!((x[(0, j)] / phase - c(*want, 0.0)).norm() < 1e-9);
    }
}

#[test]
fn no_shift_extraction_is_inconsistent() {
    let seq = sequence("no_shift_sequence.txt");
    let err = extract_measure(&seq, &ExtractConfig::new(2)).unwrap_err();
    match err.error {
        ExtractionError::ShiftInconsistent { residual } => assert!(residual > 0.1),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.report.flat_1);
}

#[test]
fn non_hyponormal_spectra() {
    let seq = sequence("non_hyponormal_sequence.txt");
    let f = extract_printed(&seq, 1).unwrap_err();
    assert!(matches!(f.error, ExtractionError::NotHyponormal { .. }), "{:?}", f.error);
    assert_eq!(f.report.ranks, vec![1, 3, 3]);
    let pair = &f.report.hyponormality[0];
    let op = pair.operator_spectrum.as_ref().unwrap();
    let data = pair.data_spectrum.as_ref().unwrap();
    let want_op = [-18.4798, -4.4504, -2.9400, 0.9867, 3.9620, 5.4116, 13.3779, 20.0161, 30.3167];
    let want_data = [-27.0712, -15.5635, -9.5314, 7.1774, 9.9912, 18.8951, 19.0130, 27.9900, 45.6814];
    for (g, w) in op.iter().zip(want_op) {
        assert!((g - w).abs() < 1e-2, "operator spectrum {op:?}");
    }
    for (g, w) in data.iter().zip(want_data) {
        assert!((g - w).abs() < 1e-2, "data spectrum {data:?}");
    }
}

#[test]
fn non_hyponormal_shifts_match_printed() {
    let seq = sequence("non_hyponormal_sequence.txt");
    let m = moment_matrix(&seq, 2).unwrap();
    let x = momex::linalg::psd_root_factor_with(&m.matrix, 1e-4, 1e-4).unwrap();
    let labels = enumerate_indices(2, 2);
    let fam = compute_shifts(&x, &labels, &[0, 1, 2], Mode::ConjugateTranspose, 1e-3).unwrap();
    let t1 = CMatrix::from_rows(&[
        vec![c(0.2836, 0.2671), c(-2.1888, 0.4064), c(1.2431, 1.9399)],
        vec![c(0.5589, 0.0), c(-0.6777, -0.1789), c(1.1608, 0.7396)],
        vec![c(0.0, 0.0), c(0.4084, -0.0496), c(-0.5517, -0.6200)],
    ]);
    let t2 = CMatrix::from_rows(&[
        vec![c(-0.5687, -0.0169), c(2.7130, 2.2286), c(0.0913, 2.8438)],
        vec![c(-0.3672, -0.1821), c(0.9844, 1.2690), c(-1.1607, 0.7277)],
        vec![c(0.5136, 0.0), c(-1.0521, -0.9157), c(0.3364, -1.8803)],
    ]);
    // the printed factor reproduces the transpose of the printed matrix, so
    // its shifts are the complex conjugates of ours
    assert!(max_diff(&fam.shifts[0], &t1.conj()) < 5e-3);
    assert!(max_diff(&fam.shifts[1], &t2.conj()) < 5e-3);
}

#[test]
fn ellipse_atoms_and_shifts() {
    let seq = sequence("ellipse_sequence.txt");
    let ex = extract_printed(&seq, 2).unwrap();
    assert_eq!(ex.report.ranks, vec![1, 2, 2, 2]);
    assert_eq!(ex.report.certification, Certification::Certified);
    let want = vec![
        vec![c(-1.3934, -0.1396), c(1.0193, 0.0)],
        vec![c(1.3934, -0.1396), c(1.0193, 0.0)],
    ];
    let err = measure_error(&ex.measure.atoms, &ex.measure.weights, &want, &[c(0.5, 0.0); 2]).unwrap();
    assert!(err < 5e-3, "{err}");
    let t1 = CMatrix::from_rows(&[vec![c(0.0, -0.1396), c(1.3934, 0.0)], vec![c(1.3934, 0.0), c(0.0, -0.1396)]]);
    let t2 = CMatrix::diag_real(&[1.0193, 1.0193]);
    assert!(max_diff(&ex.shifts.shifts[0], &t1) < 5e-3);
    assert!(max_diff(&ex.shifts.shifts[1], &t2) < 5e-3);
}

#[test]
fn enforced_ellipse_has_one_atom() {
    let seq = sequence("ellipse_hypo_sequence.txt");
    let ex = extract_printed(&seq, 2).unwrap();
    assert_eq!(ex.report.ranks, vec![1, 1, 1]);
    let want = vec![vec![c(0.0, -0.8165), c(1.5275, 0.0)]];
    let err = measure_error(&ex.measure.atoms, &ex.measure.weights, &want, &[c(1.0, 0.0)]).unwrap();
    assert!(err < 5e-3, "{err}");
}

#[test]
fn torus_is_toeplitz_with_unitary_shift() {
    let seq = sequence("torus_sequence.txt");
    let m = moment_matrix(&seq, 3).unwrap();
    let s = classify_structure(&m, DEFAULT_STRUCTURE_TOL);
    assert!(s.hermitian && s.toeplitz && !s.hankel);
    let ex = extract_measure(&seq, &ExtractConfig::new(3).with_dk(3)).unwrap();
    assert_eq!(ex.report.ranks, vec![1, 2, 2, 2]);
    assert!(ex.report.flat_1 && !ex.report.flat_dk);
    assert_eq!(ex.report.certification, Certification::RankPreservedUncertified);
    assert!(ex.shifts.unitary_defect() < 1e-8);
    let t = CMatrix::from_rows(&[
        vec![c(0.25, 0.4330), c(0.4330, -0.75)],
        vec![c(0.8660, 0.0), c(0.25, 0.4330)],
    ]);
    assert!(max_diff(&ex.shifts.shifts[0], &t) < 1e-3);
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let want = vec![vec![w], vec![c(1.0, 0.0)]];
    let err = measure_error(&ex.measure.atoms, &ex.measure.weights, &want, &[c(0.5, 0.0); 2]).unwrap();
    assert!(err < 1e-9, "{err}");
}

#[test]
fn triangle_is_hankel_with_real_symmetric_shifts() {
    let seq = sequence("triangle_sequence.txt");
    let m = moment_matrix(&seq, 2).unwrap();
    let s = classify_structure(&m, DEFAULT_STRUCTURE_TOL);
    assert!(s.hermitian && s.hankel);
    let ex = extract_printed(&seq, 1).unwrap();
    assert_eq!(ex.report.ranks, vec![1, 3, 3]);
    assert!(ex.shifts.max_imag() < 1e-12);
    assert!(ex.shifts.symmetric_defect() < 1e-3);
    let t1 = CMatrix::from_real_rows(&[
        vec![1.4150, -0.4927, 0.0],
        vec![-0.4927, 1.5850, 0.0],
        vec![0.0, 0.0, 2.0],
    ]);
    let t2 = CMatrix::from_real_rows(&[
        vec![2.1182, -0.1403, 0.2907],
        vec![-0.1403, 2.1666, -0.3452],
        vec![0.2907, -0.3452, 2.7152],
    ]);
    // the printed factor has a negative second diagonal entry
    let flip = CMatrix::diag_real(&[1.0, -1.0, 1.0]);
    let similar = |t: &CMatrix| &(&flip * t) * &flip;
    assert!(max_diff(&similar(&ex.shifts.shifts[0]), &t1) < 5e-3);
    assert!(max_diff(&similar(&ex.shifts.shifts[1]), &t2) < 5e-3);
    let want = vec![
        vec![c(1.0, 0.0), c(2.0, 0.0)],
        vec![c(2.0, 0.0), c(2.0, 0.0)],
        vec![c(2.0, 0.0), c(3.0, 0.0)],
    ];
    let weights = [c(0.5850, 0.0), c(0.2968, 0.0), c(0.1182, 0.0)];
    let err = measure_error(&ex.measure.atoms, &ex.measure.weights, &want, &weights).unwrap();
    assert!(err < 5e-3, "{err}");
}

#[test]
fn expsum_samples_recover_the_model() {
    let seq = sequence("expsum_samples.txt");
    let model = momex::interp::io::parse_model(&fixture("expsum_model.txt")).unwrap();
    let r = interpolate(&seq, &InterpConfig::default()).unwrap();
    assert_eq!(r.ranks, vec![1, 2, 2]);
    assert!(r.model.distance(&model).unwrap() < 1e-8);
    assert!(r.residual < 1e-10);
}

#[test]
fn printed_prony_factor_gives_printed_shift() {
    // X with H_2 = X^T X and basis {1, z1}
    let x = CMatrix::from_rows(&[
        vec![c(-0.1052, 0.4615), c(0.0369, 0.6628), c(-0.0704, 0.3889), c(0.1866, 0.7691), c(0.1864, 0.5507), c(-0.1207, 0.3990)],
        vec![c(-0.2274, -0.1285), c(0.0626, -0.2136), c(-0.3707, 0.2060), c(0.3184, -0.2545), c(-0.1736, -0.0412), c(-0.1935, 0.5926)],
    ]);
    let labels = enumerate_indices(2, 2);
    let fam = compute_shifts(&x, &labels, &[0, 1], Mode::Transpose, 1e-2).unwrap();
    let t1 = CMatrix::from_rows(&[vec![c(1.1490, -0.3385), c(-0.1879, -0.3204)], vec![c(-0.1879, -0.3204), c(0.6524, 0.3376)]]);
    let t2 = CMatrix::from_rows(&[vec![c(0.9246, -0.1751), c(0.2857, 0.0858)], vec![c(0.2857, 0.0858), c(0.8470, -0.8444)]]);
    assert!(max_diff(&fam.shifts[0], &t1) < 5e-3);
    assert!(max_diff(&fam.shifts[1], &t2) < 5e-3);
    // T_2 maps the z1 column onto the z1 z2 column
    let img = fam.shifts[1].mul_vec(&x.col(1));
    assert!(cdist(&img, &x.col(4)) < 5e-3);
}
