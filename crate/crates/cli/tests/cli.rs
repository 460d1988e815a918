use std::path::PathBuf;
use std::process::{Command, Output};

use momex::interp::io::parse_model;

const PRINTED: [&str; 8] = [
    "--rank-tol", "1e-4", "--psd-tol", "1e-4", "--shift-tol", "1e-3", "--hypo-tol", "1e-3",
];

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn momex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn shift_inconsistency_exits_11() {
    let o = momex(&["extract", &fixture("no_shift_sequence.txt")]);
    assert_eq!(o.status.code(), Some(11));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shift"));
}

#[test]
fn non_hyponormal_data_exits_12() {
    let input = fixture("non_hyponormal_sequence.txt");
    let mut args: Vec<&str> = PRINTED.to_vec();
    args.extend(["extract", "--dk", "1", &input]);
    let o = momex(&args);
    assert_eq!(o.status.code(), Some(12));
    assert!(stdout(&o).contains("operator min -1.8479"), "{}", stdout(&o));
}

#[test]
fn ellipse_fixture_extracts_two_atoms() {
    let input = fixture("ellipse_sequence.txt");
    let out = scratch("ellipse_measure.txt");
    let out_s = out.to_string_lossy().into_owned();
    let mut args: Vec<&str> = PRINTED.to_vec();
    args.extend(["extract", "--dk", "2", &input, "--out", &out_s]);
    let o = momex(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("atoms: 2"));
    let m = momex::extraction::io::parse_measure(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(m.len(), 2);
}

#[test]
fn enforced_relaxation_reaches_the_true_minimum() {
    let o = momex(&["solve", "--order", "2", "--enforce-hypo", &fixture("ellipse_hypo_problem.txt")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("objective: 0.4281"), "{s}");
    assert!(s.contains("atoms: 1"), "{s}");
}

#[test]
fn sample_then_interpolate_recovers_the_model() {
    let model = fixture("expsum_model.txt");
    let samples = scratch("samples.txt").to_string_lossy().into_owned();
    let recovered = scratch("recovered.txt").to_string_lossy().into_owned();
    assert_eq!(momex(&["sample", &model, "--order", "2", "--out", &samples]).status.code(), Some(0));
    assert_eq!(momex(&["interpolate", &samples, "--out", &recovered]).status.code(), Some(0));
    let a = parse_model(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let b = parse_model(&std::fs::read_to_string(&recovered).unwrap()).unwrap();
    assert!(a.distance(&b).unwrap() < 1e-10);
}

#[test]
fn signal_table_is_finite() {
    let o = momex(&[
        "signal", &fixture("expsum_model.txt"), "--range", "0:2", "--range", "-1:1", "--steps", "5", "--steps", "3",
        "--part", "abs",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("z1,z2,abs"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15);
    for row in rows {
        for v in row.split(',') {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn check_reports_structure_and_ranks() {
    let o = momex(&["check", &fixture("torus_sequence.txt"), "--order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("toeplitz=yes"), "{s}");
    assert!(s.contains("ranks: [1, 2, 2, 2]"), "{s}");
    // check never fails on a numerical verdict
    let o = momex(&["check", &fixture("no_shift_sequence.txt")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["--format", "structured", "solve", "--order", "3", &fixture("torus_problem.txt")];
    let a = momex(&args);
    let b = momex(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["command"], "solve");
}

#[test]
fn missing_file_and_bad_flags() {
    assert_eq!(momex(&["extract", "/nonexistent/file.txt"]).status.code(), Some(3));
    assert_eq!(momex(&["extract"]).status.code(), Some(2));
    let o = momex(&["--rank-tol", "-1", "extract", &fixture("torus_sequence.txt")]);
    assert_eq!(o.status.code(), Some(2));
    let bad = scratch("bad.txt");
    std::fs::write(&bad, "version 1\nn x\n").unwrap();
    assert_eq!(momex(&["extract", &bad.to_string_lossy()]).status.code(), Some(4));
}

#[test]
fn help_lists_exit_codes() {
    let s = stdout(&momex(&["--help"]));
    assert!(s.contains("Exit codes"));
    for code in ["10", "11", "12", "17", "18"] {
        assert!(s.contains(&format!("  {code}  ")), "{code}");
    }
}

#[test]
fn sdpa_export_then_import() {
    let problem = fixture("torus_problem.txt");
    let o = momex(&["export-sdpa", &problem, "--order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let sdp = momex::hierarchy::parse_sdpa(&text).unwrap();
    let sol = momex::sdp::solve(&sdp, &Default::default()).unwrap();
    let y: Vec<String> = sol.variables.iter().map(|v| format!("{v:?}")).collect();
    let path = scratch("solution.txt");
    std::fs::write(&path, y.join("\n")).unwrap();
    let o = momex(&["import-solution", &problem, &path.to_string_lossy(), "--order", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let seq = momex::moment::io::parse_sequence(&stdout(&o)).unwrap();
    assert_eq!(seq.d(), 3);
}
