//! Text and JSON rendering of reports.

use std::fmt::Write as _;

use momex::extraction::{AtomicMeasure, ExtractionReport, FeasibilityReport};
use momex::interp::ExpSumModel;
use num_complex::Complex64;
use serde_json::{json, Value};

pub fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn measure_json(m: &AtomicMeasure) -> Value {
    let atoms: Vec<Value> = m
        .atoms
        .iter()
        .zip(&m.weights)
        .map(|(a, w)| {
            json!({
                "weight": cjson(*w),
                "point": a.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "mode": m.mode.as_str(), "n": m.n(), "atoms": atoms })
}

pub fn model_json(m: &ExpSumModel) -> Value {
    let terms: Vec<Value> = m
        .terms
        .iter()
        .map(|t| {
            json!({
                "weight": cjson(t.weight),
                "frequency": t.frequency.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "n": m.n, "terms": terms })
}

pub fn fc(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.6}{sign}{:.6}i", z.re, z.im.abs())
}

fn fe(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

pub fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn report_text(r: &ExtractionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode: {}  n: {}  d: {}  dk: {}", r.mode.as_str(), r.n, r.d, r.dk);
    let _ = writeln!(
        s,
        "structure: hermitian={} hankel={} toeplitz={}",
        yes(r.structure.hermitian),
        yes(r.structure.hankel),
        yes(r.structure.toeplitz)
    );
    let _ = writeln!(s, "ranks: {:?}  flat(dk): {}  flat(1): {}", r.ranks, yes(r.flat_dk), yes(r.flat_1));
    if let Some(v) = r.moment_min_eigenvalue {
        let _ = writeln!(s, "moment matrix min eigenvalue: {v:.6e}");
    }
    if let Some(t) = &r.takagi_values {
        let vals: Vec<String> = t.iter().map(|v| format!("{v:.6e}")).collect();
        let _ = writeln!(s, "takagi values: {}", vals.join(" "));
    }
    if !r.basis.is_empty() {
        let _ = writeln!(s, "basis: {}", r.basis.join(" "));
    }
    if r.shift_residual.is_some() {
        let _ = writeln!(s, "shift residual: {}", fe(r.shift_residual));
    }
    for p in &r.hyponormality {
        let vars: Vec<String> = p.vars.iter().map(|v| format!("z{v}")).collect();
        let _ = writeln!(
            s,
            "hyponormality ({}): operator min {}  data min {}",
            vars.join(","),
            fe(p.operator_min()),
            fe(p.data_min())
        );
    }
    let extras = [
        ("commutator norm", r.commutator_norm),
        ("unitary defect", r.unitary_defect),
        ("symmetric defect", r.symmetric_defect),
        ("max imaginary shift entry", r.shift_imag),
        ("diagonalization off-diagonal", r.diag_offdiag),
        ("reconstruction residual", r.reconstruction_residual),
    ];
    for (name, v) in extras {
        if v.is_some() {
            let _ = writeln!(s, "{name}: {}", fe(v));
        }
    }
    let _ = writeln!(s, "certification: {}", r.certification.as_str());
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    if let Some(e) = &r.error {
        let _ = writeln!(s, "error: {e}");
    }
    s
}

pub fn measure_text(m: &AtomicMeasure) -> String {
    let mut s = format!("atoms: {}\n", m.len());
    for (k, (a, w)) in m.atoms.iter().zip(&m.weights).enumerate() {
        let pts: Vec<String> = a.iter().map(|z| fc(*z)).collect();
        let _ = writeln!(s, "  [{k}] weight {}  at ({})", fc(*w), pts.join(", "));
    }
    s
}

pub fn model_text(m: &ExpSumModel) -> String {
    let mut s = format!("terms: {}\n", m.len());
    for (k, t) in m.terms.iter().enumerate() {
        let f: Vec<String> = t.frequency.iter().map(|z| fc(*z)).collect();
        let _ = writeln!(
            s,
            "  [{k}] weight {} (|w| {:.6}, arg {:.6})  frequency ({})",
            fc(t.weight),
            t.weight.norm(),
            t.weight.arg(),
            f.join(", ")
        );
    }
    s
}

pub fn feasibility_text(f: &FeasibilityReport) -> String {
    let mut s = format!("feasible: {}\n", yes(f.feasible));
    for c in &f.constraints {
        let vals: Vec<String> = c.values.iter().map(|v| format!("{v:.3e}")).collect();
        let expected = c.expected_zero_count.map_or_else(|| "-".into(), |v| v.to_string());
        let _ = writeln!(
            s,
            "  constraint {} ({}): values [{}]  zeros {} (expected {expected})",
            c.index + 1,
            c.kind.as_str(),
            vals.join(", "),
            c.zero_count
        );
    }
    s
}
