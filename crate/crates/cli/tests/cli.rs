use std::fs;
use std::process::Command;

use bdfoa_cli::{figure1_sfo_rows, run, ReportDocument, EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK};
use bdfoa_core::lower::stationarity_residual;
use bdfoa_core::problems::solve_y0;
use bdfoa_core::builtin;

fn y0() -> String {
    solve_y0().to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(run(["bdfoa", "--help"]).code, EXIT_OK);
    assert_eq!(run(["bdfoa", "--version"]).code, EXIT_OK);
    assert_eq!(run(["bdfoa", "certify"]).code, EXIT_ERROR);
    assert_eq!(run(["bdfoa", "solve-lower", "--builtin", "nope"]).code, EXIT_ERROR);
    assert_eq!(run(["bdfoa", "solve-lower", "--builtin", "toy-convex", "--point", "1", "2", "3"]).code, EXIT_ERROR);
    assert_eq!(run(["bdfoa", "verify-equivalence", "--builtin", "mirrlees", "--eps", "-1"]).code, EXIT_ERROR);
    assert_eq!(run(["bdfoa", "reproduce", "nope"]).code, EXIT_ERROR);
    assert_eq!(run(["bdfoa", "certify", "--builtin", "modified-mirrlees"]).code, EXIT_OK);
    assert_eq!(run(["bdfoa", "certify", "--builtin", "mirrlees", "--point", "1", &y0()]).code, EXIT_NEGATIVE);
}

#[test]
fn binary_reports_exit_code_and_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_bdfoa"))
        .args(["certify", "--builtin", "mirrlees", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NEGATIVE));
    let doc = ReportDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(doc.summary["finding"], "no critical direction");
    assert_eq!(doc.exit_code, EXIT_NEGATIVE);

    let out = Command::new(env!("CARGO_BIN_EXE_bdfoa")).args(["solve-lower"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert!(!out.stderr.is_empty());
}

#[test]
fn json_round_trips_and_is_deterministic() {
    let args = ["bdfoa", "certify", "--builtin", "modified-mirrlees", "--json"];
    let a = run(args);
    let b = run(args);
    assert_eq!(a.stdout, b.stdout);
    let doc = ReportDocument::from_json(&a.stdout).unwrap();
    assert_eq!(doc.to_json(), a.stdout);
    assert_eq!(&doc, a.report.as_ref().unwrap());
    let nu = doc.summary["nu_bar"][0].as_f64().unwrap();
    assert!((nu - 0.5 * (1.0 + solve_y0()).powi(2).exp()).abs() <= 1e-9);
}

#[test]
fn out_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/loc.json");
    let o = run(["bdfoa", "check-localization", "--builtin", "toy-convex", "--out", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let doc = ReportDocument::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.summary["certified"], true);
}

#[test]
fn csv_outputs_have_headers() {
    let dir = tempfile::tempdir().unwrap();
    let vf = dir.path().join("v.csv");
    let o = run(["bdfoa", "value-function", "--builtin", "toy-convex", "--steps", "5", "--out", vf.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let text = fs::read_to_string(&vf).unwrap();
    assert!(text.starts_with("x1,V\n"), "{text}");
    assert_eq!(text.lines().count(), 6);

    let o = run([
        "bdfoa", "plot-data", "--builtin", "mirrlees", "--point", "0.5", "--direction", "1", "--range", "0", "1", "--steps",
        "11", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    for f in ["mirrlees_sfo.csv", "mirrlees_solution.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.starts_with("s,x1,y1\n"), "{f}: {text}");
    }
    // Two global minimizers only at the jump x = 1 (s = 0.5).
    let sol = fs::read_to_string(dir.path().join("mirrlees_solution.csv")).unwrap();
    assert_eq!(sol.lines().count(), 1 + 11 + 1);
}

#[test]
fn figure1_surface_matches_closed_form() {
    let prob = builtin("mirrlees").unwrap();
    let rows = figure1_sfo_rows(&prob, 401).unwrap();
    assert_eq!(rows.len(), 400);
    for (y, x) in rows {
        let closed = (1.0 - y) * (4.0 * y).exp() / (1.0 + y);
        assert!((x - closed).abs() <= 1e-9 * closed.abs().max(1.0), "y={y}: {x} vs {closed}");
        assert!(stationarity_residual(&prob, &[x], &[y]).unwrap() <= 1e-8 * x.abs().max(1.0));
    }
}

#[test]
fn reproduce_figure1_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(["bdfoa", "reproduce", "figure1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let sfo = fs::read_to_string(dir.path().join("figure1_sfo.csv")).unwrap();
    assert!(sfo.starts_with("y,x\n"));
    assert_eq!(sfo.lines().count(), 401);
    let sol = fs::read_to_string(dir.path().join("figure1_solution.csv")).unwrap();
    assert!(sol.starts_with("x,y\n"));
    let doc = ReportDocument::from_json(&fs::read_to_string(dir.path().join("figure1_report.json")).unwrap()).unwrap();
    assert!(doc.summary["jump_error"].as_f64().unwrap() <= 1e-9);

    // Same inputs, same bytes.
    let again = run(["bdfoa", "reproduce", "figure1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(again.code, EXIT_OK);
    assert_eq!(fs::read_to_string(dir.path().join("figure1_sfo.csv")).unwrap(), sfo);
}

#[test]
fn problem_file_is_loaded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(&path, builtin("toy-convex").unwrap().to_config().to_string()).unwrap();
    let o = run(["bdfoa", "solve-lower", "--problem", path.to_str().unwrap(), "--point", "0.25", "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let doc = ReportDocument::from_json(&o.stdout).unwrap();
    assert_eq!(doc.summary["minimizers"][0][0].as_f64(), Some(0.25));

    fs::write(&path, "{\"n\": 1}").unwrap();
    assert_eq!(run(["bdfoa", "solve-lower", "--problem", path.to_str().unwrap()]).code, EXIT_ERROR);
    let missing = dir.path().join("missing.json");
    assert_eq!(run(["bdfoa", "solve-lower", "--problem", missing.to_str().unwrap()]).code, EXIT_ERROR);
}

#[test]
fn short_y_snaps_to_stationary_point() {
    let o = run(["bdfoa", "certify", "--builtin", "mirrlees", "--point", "1", "0.957", "--json"]);
    assert_eq!(o.code, EXIT_NEGATIVE);
    let doc = ReportDocument::from_json(&o.stdout).unwrap();
    assert_eq!(doc.summary["snapped_from_y"][0].as_f64(), Some(0.957));
    // Too far from any stationary point: kept as given and rejected.
    assert_eq!(run(["bdfoa", "certify", "--builtin", "mirrlees", "--point", "1", "0.5"]).code, EXIT_ERROR);
}

#[test]
fn solve_lower_flags_escaping_minimizers() {
    let o = run(["bdfoa", "solve-lower", "--builtin", "example-xy-1", "--point", "0.01", "--json"]);
    assert_eq!(o.code, EXIT_OK);
    let doc = ReportDocument::from_json(&o.stdout).unwrap();
    assert_eq!(doc.summary["boundary_flag"], true);
}
