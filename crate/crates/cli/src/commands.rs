use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use momex::extraction::io::write_measure;
use momex::extraction::{
    check_flatness, extract_measure, feasibility_report, verify_measure, ExtractConfig, Mode,
    Tolerances,
};
use momex::hierarchy::{
    assemble_relaxation, export_sdpa, import_solution, parse_problem, realify,
};
use momex::interp::io::{parse_model, write_model};
use momex::interp::{
    emit_signal, interpolate, sample_grid, GridSpec, InterpConfig, InterpError, SignalPart,
};
use momex::linalg::{hermitian_eig, numeric_rank, takagi};
use momex::moment::io::{parse_sequence, write_sequence};
use momex::moment::{
    classify_structure, hankel_matrix, hyponormality_block, moment_matrix, MomentSequence,
    SequenceMode, DEFAULT_STRUCTURE_TOL,
};
use momex::sdp::{solve, SolveOptions, Status};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::render::{
    feasibility_text, measure_json, measure_text, model_json, model_text, report_text, yes,
};
use crate::{Cli, Command, Format, GlobalOpts, Part};

/// Absolute tolerance on constraint values at extracted atoms; solver output
/// is accurate to roughly 1e-6.
const FEASIBILITY_TOL: f64 = 1e-5;

/// Result of one command: a report for stdout, an optional output file and
/// an optional error raised after the report was (partly) built.
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub artifact: Option<String>,
    /// Print the artifact on stdout when `--out` is absent.
    pub artifact_is_primary: bool,
    pub error: Option<CliError>,
}

impl Outcome {
    fn report(text: String, json: Value) -> Self {
        Self {
            text,
            json,
            artifact: None,
            artifact_is_primary: false,
            error: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn tolerances(g: &GlobalOpts) -> Result<Tolerances, CliError> {
    let mut t = Tolerances::default();
    for (name, v, slot) in [
        ("rank-tol", g.rank_tol, &mut t.rank),
        ("psd-tol", g.psd_tol, &mut t.psd),
        ("shift-tol", g.shift_tol, &mut t.shift),
        ("hypo-tol", g.hypo_tol, &mut t.hyponormal),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("--{name} must be a positive number")));
            }
            *slot = v;
        }
    }
    Ok(t)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    match &cli.command {
        Command::Extract { input, order, dk } => cmd_extract(input, *order, *dk, g.seed, tol),
        Command::Solve {
            input,
            order,
            enforce_hypo,
            max_iter,
        } => cmd_solve(input, *order, *enforce_hypo, *max_iter, g.seed, tol),
        Command::Interpolate {
            input,
            model,
            sample,
            d_max,
        } => cmd_interpolate(input.as_deref(), model.as_deref(), *sample, *d_max, g.seed, tol),
        Command::Sample { model, order } => cmd_sample(model, *order),
        Command::Signal {
            model,
            ranges,
            steps,
            part,
        } => cmd_signal(model, ranges, steps, *part),
        Command::Check { input, order, dk } => cmd_check(input, *order, *dk, g.seed, tol),
        Command::ExportSdpa {
            input,
            order,
            enforce_hypo,
        } => cmd_export(input, *order, *enforce_hypo),
        Command::ImportSolution {
            problem,
            solution,
            order,
            enforce_hypo,
        } => cmd_import(problem, solution, *order, *enforce_hypo),
    }
}

/// Prints the outcome, writes the output file and returns the exit code.
pub fn finish(g: &GlobalOpts, outcome: Result<Outcome, CliError>) -> i32 {
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut print_report = true;
    if let Some(art) = &outcome.artifact {
        match &g.out {
            Some(path) => {
                if let Err(source) = fs::write(path, art) {
                    let e = CliError::Io {
                        path: PathBuf::from(path),
                        source,
                    };
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            None if outcome.artifact_is_primary => {
                emit(art);
                print_report = false;
            }
            None => {}
        }
    }
    if print_report {
        match g.format {
            Format::Text => emit(&outcome.text),
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(&outcome.json).expect("report serializes");
                s.push('\n');
                emit(&s);
            }
        }
    }
    match outcome.error {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None => 0,
    }
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

fn load_sequence(path: &Path) -> Result<MomentSequence, CliError> {
    Ok(parse_sequence(&read(path)?)?)
}

fn cmd_extract(input: &Path, order: Option<u32>, dk: u32, seed: u64, tol: Tolerances) -> Result<Outcome, CliError> {
    let seq = load_sequence(input)?;
    let d = order.unwrap_or(seq.d());
    let cfg = ExtractConfig::new(d).with_dk(dk).with_seed(seed).with_tol(tol);
    Ok(match extract_measure(&seq, &cfg) {
        Ok(ex) => {
            let residual = verify_measure(&ex.measure, &seq);
            let text = format!(
                "{}{}moment residual: {residual:.6e}\n",
                report_text(&ex.report),
                measure_text(&ex.measure)
            );
            let json = json!({
                "command": "extract",
                "report": ex.report,
                "measure": measure_json(&ex.measure),
                "moment_residual": residual,
            });
            let mut o = Outcome::report(text, json);
            o.artifact = Some(write_measure(&ex.measure));
            o
        }
        Err(f) => {
            let json = json!({ "command": "extract", "report": *f.report, "measure": Value::Null });
            let mut o = Outcome::report(report_text(&f.report), json);
            o.error = Some(f.into());
            o
        }
    })
}

fn cmd_solve(
    input: &Path,
    order: Option<u32>,
    enforce: bool,
    max_iter: usize,
    seed: u64,
    tol: Tolerances,
) -> Result<Outcome, CliError> {
    let p = parse_problem(&read(input)?)?;
    let d = order.unwrap_or_else(|| p.min_order());
    let (sdp, map) = assemble_relaxation(&p, d, enforce)?;
    let opts = SolveOptions {
        max_iterations: max_iter,
        ..SolveOptions::default()
    };
    let sol = solve(&sdp, &opts)?;
    let violation = sol.weak_duality_violation(opts.feasibility_tolerance, 10.0 * opts.gap_tolerance);
    let solver_json = json!({
        "status": sol.status,
        "iterations": sol.iterations,
        "primal_objective": sol.primal_objective,
        "dual_objective": sol.dual_objective,
        "min_block_eigenvalue": sol.min_block_eigenvalue,
        "equality_residual": sol.equality_residual,
        "weak_duality_violation": violation,
    });
    let mut text = format!(
        "relaxation order: {d}  dk: {}  enforce hyponormality: {}\nblocks: {:?}  variables: {}\n\
         solver: {} after {} iterations\nobjective: {:.8}  (dual {:.8})\n\
         min block eigenvalue: {:.3e}  equality residual: {:.3e}\n",
        p.dk(),
        if enforce { "yes" } else { "no" },
        sdp.block_sizes(),
        sdp.num_vars,
        sol.status.as_str(),
        sol.iterations,
        sol.primal_objective,
        sol.dual_objective,
        sol.min_block_eigenvalue,
        sol.equality_residual,
    );
    let mut json = json!({
        "command": "solve",
        "order": d,
        "dk": p.dk(),
        "enforce_hyponormality": enforce,
        "solver": solver_json,
    });
    if sol.status == Status::InfeasibleSuspected {
        let mut o = Outcome::report(text, json);
        o.error = Some(CliError::SolverStatus(sol.status.as_str()));
        return Ok(o);
    }
    let seq = map.to_sequence(&sol.variables)?;
    let cfg = ExtractConfig::new(d).with_dk(p.dk()).with_seed(seed).with_tol(tol);
    Ok(match extract_measure(&seq, &cfg) {
        Ok(ex) => {
            let feas = feasibility_report(&ex.measure, &p, Some((&seq, d)), FEASIBILITY_TOL, tol.rank);
            text.push_str(&report_text(&ex.report));
            text.push_str(&measure_text(&ex.measure));
            text.push_str(&feasibility_text(&feas));
            json["report"] = serde_json::to_value(&ex.report).expect("report serializes");
            json["measure"] = measure_json(&ex.measure);
            json["feasibility"] = serde_json::to_value(&feas).expect("report serializes");
            let mut o = Outcome::report(text, json);
            o.artifact = Some(write_measure(&ex.measure));
            o
        }
        Err(f) => {
            text.push_str(&report_text(&f.report));
            json["report"] = serde_json::to_value(&*f.report).expect("report serializes");
            json["measure"] = Value::Null;
            let mut o = Outcome::report(text, json);
            o.error = Some(f.into());
            o
        }
    })
}

fn cmd_interpolate(
    input: Option<&Path>,
    model: Option<&Path>,
    sample: Option<u32>,
    d_max: Option<u32>,
    seed: u64,
    tol: Tolerances,
) -> Result<Outcome, CliError> {
    let seq = match (input, model) {
        (Some(path), _) => load_sequence(path)?,
        (None, Some(path)) => {
            let m = parse_model(&read(path)?)?;
            let d = sample.ok_or_else(|| CliError::Usage("--model needs --sample <order>".into()))?;
            sample_grid(&m, d)
        }
        (None, None) => return Err(CliError::Usage("give a sample file or --model".into())),
    };
    let cfg = InterpConfig { d_max, seed, tol };
    Ok(match interpolate(&seq, &cfg) {
        Ok(r) => {
            let text = format!(
                "stable order: {}  ranks: {:?}\n{}resampling residual: {:.6e}\ntakagi residual: {:.6e}\n",
                r.d,
                r.ranks,
                model_text(&r.model),
                r.residual,
                r.takagi_residual
            );
            let json = json!({
                "command": "interpolate",
                "order": r.d,
                "ranks": r.ranks,
                "model": model_json(&r.model),
                "resampling_residual": r.residual,
                "takagi_residual": r.takagi_residual,
                "report": r.report,
            });
            let mut o = Outcome::report(text, json);
            o.artifact = Some(write_model(&r.model));
            o
        }
        Err(e) => {
            let (text, report) = match &e {
                InterpError::Extraction(f) => (report_text(&f.report), serde_json::to_value(&*f.report).expect("report serializes")),
                InterpError::RankNotStabilized { ranks, .. } => (format!("ranks: {ranks:?}\n"), Value::Null),
                _ => (String::new(), Value::Null),
            };
            let mut o = Outcome::report(text, json!({ "command": "interpolate", "report": report, "model": Value::Null }));
            o.error = Some(e.into());
            o
        }
    })
}

fn artifact_only(command: &str, artifact: String) -> Outcome {
    let text = format!("{command}: {} bytes\n", artifact.len());
    let mut o = Outcome::report(text, json!({ "command": command, "bytes": artifact.len() }));
    o.artifact = Some(artifact);
    o.artifact_is_primary = true;
    o
}

fn cmd_sample(model: &Path, order: u32) -> Result<Outcome, CliError> {
    let m = parse_model(&read(model)?)?;
    Ok(artifact_only("sample", write_sequence(&sample_grid(&m, order))))
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("range '{s}' must look like lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_signal(model: &Path, ranges: &[String], steps: &[usize], part: Part) -> Result<Outcome, CliError> {
    let m = parse_model(&read(model)?)?;
    let grid = GridSpec {
        ranges: ranges.iter().map(|r| parse_range(r)).collect::<Result<_, _>>()?,
        steps: steps.to_vec(),
    };
    let which = match part {
        Part::Real => SignalPart::Real,
        Part::Imag => SignalPart::Imag,
        Part::Abs => SignalPart::Abs,
    };
    Ok(artifact_only("signal", emit_signal(&m, &grid, which)?))
}

fn cmd_export(input: &Path, order: u32, enforce: bool) -> Result<Outcome, CliError> {
    let p = parse_problem(&read(input)?)?;
    let (sdp, _) = assemble_relaxation(&p, order, enforce)?;
    Ok(artifact_only("export-sdpa", export_sdpa(&realify(&sdp))?))
}

fn cmd_import(problem: &Path, solution: &Path, order: u32, enforce: bool) -> Result<Outcome, CliError> {
    let p = parse_problem(&read(problem)?)?;
    let (_, map) = assemble_relaxation(&p, order, enforce)?;
    let seq = import_solution(&read(solution)?, &map)?;
    Ok(artifact_only("import-solution", write_sequence(&seq)))
}

/// Pairs of variables inspected for hyponormality.
fn variable_pairs(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(vec![i, j]);
        }
    }
    out
}

fn cmd_check(input: &Path, order: Option<u32>, dk: u32, seed: u64, tol: Tolerances) -> Result<Outcome, CliError> {
    let seq = load_sequence(input)?;
    let d = order.unwrap_or(seq.d()).min(seq.d());
    let n = seq.n();
    let (m, mode) = match seq.mode() {
        SequenceMode::Paired => (moment_matrix(&seq, d)?, Mode::ConjugateTranspose),
        SequenceMode::Hankel => (hankel_matrix(&seq, d)?, Mode::Transpose),
    };
    let structure = classify_structure(&m, DEFAULT_STRUCTURE_TOL);
    let mut text = format!(
        "n: {n}  d: {d}  mode: {}\nstructure: hermitian={} hankel={} toeplitz={}\n",
        seq.mode().as_str(),
        yes(structure.hermitian),
        yes(structure.hankel),
        yes(structure.toeplitz)
    );
    let mut json = json!({ "command": "check", "n": n, "d": d, "mode": seq.mode().as_str(), "structure": structure });
    let mut notes: Vec<String> = Vec::new();

    match check_flatness(&m.matrix, n, d, dk, mode, tol.rank) {
        Ok(f) => {
            text.push_str(&format!("ranks: {:?}  flat(dk): {}  flat(1): {}\n", f.ranks, yes(f.flat_dk), yes(f.flat_1)));
            json["flatness"] = serde_json::to_value(&f).expect("report serializes");
        }
        Err(e) => notes.push(format!("flatness: {e}")),
    }

    match mode {
        Mode::ConjugateTranspose => {
            if let Ok(e) = hermitian_eig(&m.matrix.hermitian_part(), 1e-9) {
                let vals: Vec<String> = e.eigenvalues.iter().map(|v| format!("{v:.6e}")).collect();
                text.push_str(&format!("moment matrix eigenvalues: {}\n", vals.join(" ")));
                json["moment_eigenvalues"] = json!(e.eigenvalues);
            }
            let mut spectra = Vec::new();
            if d >= dk && d > 0 {
                for vars in variable_pairs(n) {
                    let label: Vec<String> = vars.iter().map(|v| format!("z{}", v + 1)).collect();
                    match hyponormality_block(&seq, d, dk, &vars)
                        .map_err(CliError::from)
                        .and_then(|b| Ok(hermitian_eig(&b.matrix.hermitian_part(), 1e-9).map_err(momex::moment::MomentError::from)?))
                    {
                        Ok(e) => {
                            text.push_str(&format!(
                                "data hyponormality block ({}): min eigenvalue {:.6e}\n",
                                label.join(","),
                                e.min()
                            ));
                            spectra.push(json!({ "vars": vars.iter().map(|v| v + 1).collect::<Vec<_>>(), "spectrum": e.eigenvalues }));
                        }
                        Err(e) => notes.push(format!("hyponormality block ({}): {e}", label.join(","))),
                    }
                }
            }
            json["data_hyponormality"] = json!(spectra);
        }
        Mode::Transpose => {
            if let Ok(t) = takagi(&m.matrix, tol.symmetry) {
                let rank = numeric_rank(&t.values, tol.rank);
                let vals: Vec<String> = t.values.iter().map(|v| format!("{v:.6e}")).collect();
                text.push_str(&format!("takagi values: {}  (rank {rank})\n", vals.join(" ")));
                json["takagi_values"] = json!(t.values);
            }
        }
    }

    let cfg = ExtractConfig::new(d).with_dk(dk).with_seed(seed).with_tol(tol);
    let (status, report) = match extract_measure(&seq, &cfg) {
        Ok(ex) => (format!("ok, {} atoms ({})", ex.measure.len(), ex.report.certification.as_str()), ex.report),
        Err(f) => (format!("failed: {}", f.error), *f.report),
    };
    text.push_str(&format!("extraction: {status}\n"));
    json["extraction"] = json!({ "status": status, "report": report });
    for n in &notes {
        text.push_str(&format!("note: {n}\n"));
    }
    json["notes"] = json!(notes);
    Ok(Outcome::report(text, json))
}
