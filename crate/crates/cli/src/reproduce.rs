use bdfoa_core::format::g12;
use bdfoa_core::lower::{solve_lower, GridSpec};
use bdfoa_core::problems::{solve_y0, DEFAULT_WINDOW};
use bdfoa_core::regularity::{check_inf_compactness, check_localization, inner_semicontinuity_report};
use bdfoa_core::verify::{detect_classical_foa_failure, verify_bilevel_local_min, NeighborhoodSpec};
use bdfoa_core::{builtin, BilevelProblem, EvalPoint, Result as CoreResult};
use serde_json::json;

use crate::args::ReproduceArgs;
use crate::commands::{certify_pipeline, run_equivalence};
use crate::report::{write_file, ReportDocument};
use crate::{CliError, DEFAULT_DELTA, DEFAULT_EPS_X, DEFAULT_EPS_Y, EXIT_OK};

pub const NAMES: [&str; 6] = ["mirrlees", "modified-mirrlees", "figure1", "example-xy-1", "example-xy3", "principal-agent-2"];

const FOA_RADIUS: f64 = 0.05;
const LOCAL_MIN_SAMPLES: usize = 10_000;

pub fn run(a: &ReproduceArgs, doc: &mut ReportDocument) -> Result<i32, CliError> {
    if !NAMES.contains(&a.name.as_str()) {
        return Err(CliError::Usage(format!("unknown example `{}`; expected one of {}", a.name, NAMES.join(", "))));
    }
    let grid_for = |p: &BilevelProblem| {
        let g = GridSpec::for_problem(p);
        a.grid.map_or(g.clone(), |r| g.with_resolution(r))
    };
    match a.name.as_str() {
        "figure1" => figure1(a, doc, &grid_for(&builtin("mirrlees")?))?,
        "example-xy-1" => example_xy_1(doc, &grid_for(&builtin("example-xy-1")?))?,
        "example-xy3" => example_xy3(doc, &grid_for(&builtin("example-xy3")?))?,
        name => {
            let prob = builtin(name)?;
            let pt = prob.reference.clone().expect("built-in examples carry a reference point");
            let grid = grid_for(&prob);
            doc.set_problem(prob.to_config());
            analysis(&prob, &pt, &grid, doc)?;
            if name == "principal-agent-2" {
                constraint_activity(&prob, &pt, doc)?;
                best_contract(&prob, &grid, doc)?;
            }
        }
    }
    let path = a.out.join(format!("{}_report.json", a.name));
    doc.note("report", path.display().to_string());
    write_file(&path, &doc.to_json())?;
    Ok(EXIT_OK)
}

/// Admissible directions → localization → equivalence → critical
/// direction → CQ → certificate, then the classical-FOA comparison.
fn analysis(prob: &BilevelProblem, pt: &EvalPoint, grid: &GridSpec, doc: &mut ReportDocument) -> Result<(), CliError> {
    doc.add("point", pt);
    let isc = inner_semicontinuity_report(prob, pt, None, grid)?;
    doc.note("solution_set", &isc.solution_set);
    doc.note("admissible_normals", &isc.admissible.normals);
    doc.note("admissible_witness", &isc.admissible.witness);
    doc.note("inf_compactness", isc.inf_compactness.verdict);
    let loc = check_localization(prob, pt)?;
    doc.note("localization_certified_by", &loc.certified_by);
    doc.add("localization", &loc);

    let moduli = (DEFAULT_EPS_X, DEFAULT_EPS_Y, DEFAULT_DELTA);
    let u = if isc.admissible.is_full() { vec![0.0; prob.n] } else { isc.admissible.witness.clone().unwrap_or(vec![0.0; prob.n]) };
    doc.note("direction", &u);
    run_equivalence(prob, pt, &u, moduli, grid, doc, "equivalence")?;
    if u.iter().any(|v| *v != 0.0) {
        let back: Vec<f64> = u.iter().map(|v| -v).collect();
        run_equivalence(prob, pt, &back, moduli, grid, doc, "equivalence_opposite")?;
    }
    doc.add("inner_semicontinuity", &isc);

    let code = certify_pipeline(prob, pt, None, grid, false, doc)?;
    doc.note("certified", code == EXIT_OK);

    let foa = detect_classical_foa_failure(prob, pt, FOA_RADIUS, grid)?;
    doc.note("classical_foa_fails", foa.foa_fails);
    doc.note("classical_foa_margin", foa.margin);
    doc.add("foa_failure", &foa);
    let lm = verify_bilevel_local_min(prob, pt, &NeighborhoodSpec::ball(FOA_RADIUS, LOCAL_MIN_SAMPLES), grid)?;
    doc.note("bilevel_local_min", lm.verdict);
    doc.add("local_min", &lm);
    Ok(())
}

fn constraint_activity(prob: &BilevelProblem, pt: &EvalPoint, doc: &mut ReportDocument) -> Result<(), CliError> {
    let rows = prob
        .constraints
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let v = g.evaluate(pt)?;
            Ok(json!({"index": i + 1, "expr": g.to_string(), "value": v, "active": v.abs() <= 1e-8}))
        })
        .collect::<CoreResult<Vec<_>>>()?;
    doc.add("constraints", &rows);
    Ok(())
}

/// Optimistic best contract over a grid on the wage window: for each wage
/// vector the agent's best responses are computed and the one the principal
/// prefers is kept, subject to IR.
fn best_contract(prob: &BilevelProblem, grid: &GridSpec, doc: &mut ReportDocument) -> Result<(), CliError> {
    const PER_AXIS: usize = 61;
    let Some(win) = prob.x_window.clone() else { return Ok(()) };
    let mut xs: Vec<Vec<f64>> = vec![vec![]];
    for &(lo, hi) in &win {
        xs = xs
            .into_iter()
            .flat_map(|p| {
                (0..PER_AXIS).map(move |k| {
                    let mut q = p.clone();
                    q.push(lo + (hi - lo) * k as f64 / (PER_AXIS - 1) as f64);
                    q
                })
            })
            .collect();
    }
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for x in &xs {
        for y in solve_lower(prob, x, grid)?.minimizers {
            if prob.constraints.iter().any(|g| g.eval_xy(x, &y).map_or(true, |v| v > 1e-9)) {
                continue;
            }
            let f = prob.upper.eval_xy(x, &y)?;
            if best.as_ref().is_none_or(|b| f < b.0) {
                best = Some((f, x.clone(), y));
            }
        }
    }
    if let Some((f, x, y)) = best {
        let reference = prob.reference.as_ref().map(|r| prob.upper.evaluate(r)).transpose()?;
        doc.note("window_best_upper_value", f);
        doc.note("reference_upper_value", reference);
        doc.add("window_best_contract", &json!({"x": x, "y": y, "upper_value": f, "grid_per_axis": PER_AXIS}));
    }
    Ok(())
}

fn example_xy_1(doc: &mut ReportDocument, grid: &GridSpec) -> Result<(), CliError> {
    let prob = builtin("example-xy-1")?;
    doc.set_problem(prob.to_config());
    let ic = check_inf_compactness(&prob, &[0.0], DEFAULT_WINDOW, 0.5)?;
    doc.note("inf_compactness_at_0", ic.verdict);
    doc.add("inf_compactness", &ic);
    let mut rows = Vec::new();
    for x in [-2.0, -1.0, -0.1, -0.01, 0.0, 0.01, 0.1, 0.5, 1.0, 2.0] {
        let s = solve_lower(&prob, &[x], grid)?;
        let closed = if x == 0.0 { 0.0 } else { 1.0 / x };
        rows.push(json!({"x": x, "minimizers": s.minimizers, "closed_form": closed, "boundary_flag": s.boundary_flag}));
    }
    doc.add("solution_map", &rows);
    Ok(())
}

fn example_xy3(doc: &mut ReportDocument, grid: &GridSpec) -> Result<(), CliError> {
    let prob = builtin("example-xy3")?;
    doc.set_problem(prob.to_config());
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let x = -2.0 + 0.2 * k as f64;
        let s = solve_lower(&prob, &[x], grid)?;
        let closed = -(x / 4.0).signum() * (x.abs() / 4.0).powf(1.0 / 9.0);
        if x.abs() > 1e-12 {
            worst = worst.max((s.minimizers[0][0] - closed).abs());
        }
        rows.push(json!({"x": x, "minimizers": s.minimizers, "closed_form": closed}));
    }
    doc.note("max_error_vs_closed_form", worst);
    doc.add("solution_map", &rows);
    Ok(())
}

/// Points (y, x) of the mirrlees stationary surface over y ∈ [−2, 2]. f is
/// affine in x, so f_y(x, y) = 0 is solved exactly from two evaluations;
/// y = −1, where the surface runs off to infinity, is skipped.
pub fn figure1_sfo_rows(prob: &BilevelProblem, count: usize) -> CoreResult<Vec<(f64, f64)>> {
    let mut rows = Vec::with_capacity(count);
    for k in 0..count {
        let y = -2.0 + 4.0 * k as f64 / (count - 1) as f64;
        let g0 = prob.lower.diff_y(&[0.0], &[y])?.gradient[0];
        let g1 = prob.lower.diff_y(&[1.0], &[y])?.gradient[0];
        if (g1 - g0).abs() <= 1e-300 || (1.0 + y).abs() < 1e-9 {
            continue;
        }
        rows.push((y, -g0 / (g1 - g0)));
    }
    Ok(rows)
}

/// Bisection on the sign of V₊(x) − V₋(x), the branch values on y ≥ 0 and y ≤ 0.
pub fn locate_jump(prob: &BilevelProblem, grid: &GridSpec, lo: f64, hi: f64) -> CoreResult<f64> {
    let w = DEFAULT_WINDOW / 2.0;
    let (pos, neg) = (grid.around(&[w], w), grid.around(&[-w], w));
    let gap = |x: f64| -> CoreResult<f64> { Ok(solve_lower(prob, &[x], &pos)?.value - solve_lower(prob, &[x], &neg)?.value) };
    let (mut a, mut b) = (lo, hi);
    let ga = gap(a)?;
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if (gap(mid)? < 0.0) == (ga < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn figure1(a: &ReproduceArgs, doc: &mut ReportDocument, grid: &GridSpec) -> Result<(), CliError> {
    let prob = builtin("mirrlees")?;
    doc.set_problem(prob.to_config());
    let sfo = figure1_sfo_rows(&prob, 401)?;
    let mut text = String::from("y,x\n");
    for (y, x) in &sfo {
        text.push_str(&format!("{},{}\n", g12(*y), g12(*x)));
    }
    let p1 = a.out.join("figure1_sfo.csv");
    write_file(&p1, &text)?;

    let mut text = String::from("x,y\n");
    let mut rows = 0;
    for k in 0..=200 {
        let x = 0.01 * k as f64;
        for y in solve_lower(&prob, &[x], grid)?.minimizers {
            text.push_str(&format!("{},{}\n", g12(x), g12(y[0])));
            rows += 1;
        }
    }
    let p2 = a.out.join("figure1_solution.csv");
    write_file(&p2, &text)?;

    let jump = locate_jump(&prob, grid, 0.5, 1.5)?;
    let y0 = solve_y0();
    doc.note("sfo_csv", p1.display().to_string());
    doc.note("sfo_rows", sfo.len());
    doc.note("solution_csv", p2.display().to_string());
    doc.note("solution_rows", rows);
    doc.note("jump_x", jump);
    doc.note("jump_error", (jump - 1.0).abs());
    doc.note("y0", y0);
    Ok(())
}
