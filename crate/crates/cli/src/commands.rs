use bdfoa_core::format::g12;
use bdfoa_core::kkt::{
    affine_polyhedral_evidence, certify_directional_kkt, check_foscms, check_nnamcq, detect_affine_polyhedral,
    find_critical_direction, CqEvidence,
};
use bdfoa_core::lower::{localization_track, solve_lower, stationary_set, value_function, value_function_csv};
use bdfoa_core::regularity::{admissible_directions, check_localization, inner_semicontinuity_report};
use bdfoa_core::verify::{neighborhood_schedule, verify_equivalence, DEFAULT_DIRECTIONS, DEFAULT_T_COUNT};
use bdfoa_core::{BilevelProblem, Error, EvalPoint, GridSpec, SamplingSchedule};
use serde_json::json;

use crate::args::{CertifyArgs, Command, Common, SegmentArgs};
use crate::report::{write_file, ReportDocument};
use crate::{reproduce, CliError, RunConfig, EXIT_NEGATIVE, EXIT_OK};

/// Directions tried when the admissible cone is given as a whole.
pub const CONE_SCAN: usize = 21;

pub fn dispatch(cmd: &Command, doc: &mut ReportDocument) -> Result<i32, CliError> {
    match cmd {
        Command::SolveLower(c) => solve(c, doc),
        Command::ValueFunction(a) => segment(a, doc, false),
        Command::PlotData(a) => segment(a, doc, true),
        Command::CheckLocalization(c) => localization(c, doc),
        Command::Directions(c) => directions(c, doc),
        Command::VerifyEquivalence(c) => equivalence(c, doc),
        Command::Certify(a) => certify(a, doc),
        Command::Reproduce(a) => reproduce::run(a, doc),
    }
}

/// `--out` of the analysis commands receives the JSON report; segment
/// commands and `reproduce` write their own files.
pub fn write_report(cmd: &Command, doc: &ReportDocument) -> Result<(), CliError> {
    let out = match cmd {
        Command::SolveLower(c) | Command::CheckLocalization(c) | Command::Directions(c) | Command::VerifyEquivalence(c) => {
            c.out.as_ref()
        }
        Command::Certify(a) => a.common.out.as_ref(),
        _ => None,
    };
    match out {
        Some(path) => doc.write(path),
        None => Ok(()),
    }
}

fn start(c: &Common, doc: &mut ReportDocument) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::from_common(c)?;
    doc.set_problem(cfg.problem.to_config());
    Ok(cfg)
}

fn resolved_point(cfg: &RunConfig, doc: &mut ReportDocument) -> Result<EvalPoint, CliError> {
    let (pt, snapped) = cfg.point()?;
    doc.add("point", &pt);
    if let Some(y) = snapped {
        doc.note("snapped_from_y", y);
    }
    Ok(pt)
}

fn solve(c: &Common, doc: &mut ReportDocument) -> Result<i32, CliError> {
    let cfg = start(c, doc)?;
    let x = cfg.x()?;
    let s = solve_lower(&cfg.problem, &x, &cfg.grid)?;
    doc.add("solve_lower", &s);
    doc.note("minimizers", &s.minimizers);
    doc.note("value", s.value);
    doc.note("boundary_flag", s.boundary_flag);
    Ok(EXIT_OK)
}

fn segment_points(cfg: &RunConfig, a: &SegmentArgs) -> Result<Vec<(f64, Vec<f64>)>, CliError> {
    let n = cfg.problem.n;
    let base = match &cfg.point {
        Some(_) => cfg.x()?,
        None => vec![0.0; n],
    };
    let dir = cfg.direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    });
    if a.steps < 2 || a.range[0] >= a.range[1] {
        return Err(CliError::Usage("--range needs a < b and --steps at least 2".into()));
    }
    let (lo, hi) = (a.range[0], a.range[1]);
    Ok((0..a.steps)
        .map(|k| {
            let s = lo + (hi - lo) * k as f64 / (a.steps - 1) as f64;
            (s, base.iter().zip(&dir).map(|(b, d)| b + s * d).collect())
        })
        .collect())
}

fn segment(a: &SegmentArgs, doc: &mut ReportDocument, plot: bool) -> Result<i32, CliError> {
    let cfg = start(&a.common, doc)?;
    if cfg.problem.n == 0 {
        return Err(CliError::Usage("segments need n ≥ 1".into()));
    }
    let pts = segment_points(&cfg, a)?;
    let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.1.clone()).collect();
    if !plot {
        let rows = value_function(&cfg.problem, &xs, &cfg.grid)?;
        let csv = value_function_csv(&rows, cfg.problem.n);
        doc.note("rows", rows.len());
        emit_csv(&cfg, doc, "value_function", csv)?;
        return Ok(EXIT_OK);
    }
    let (m, n) = (cfg.problem.m, cfg.problem.n);
    let header = std::iter::once("s".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .chain((1..=m).map(|i| format!("y{i}")))
        .collect::<Vec<_>>()
        .join(",");
    let (mut sfo, mut sol) = (header.clone() + "\n", header + "\n");
    for (s, x) in &pts {
        let row = |y: &[f64]| {
            std::iter::once(*s).chain(x.iter().copied()).chain(y.iter().copied()).map(g12).collect::<Vec<_>>().join(",") + "\n"
        };
        for y in stationary_set(&cfg.problem, x, &cfg.grid)?.points() {
            sfo.push_str(&row(&y));
        }
        for y in solve_lower(&cfg.problem, x, &cfg.grid)?.minimizers {
            sol.push_str(&row(&y));
        }
    }
    let dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    let name = &cfg.problem.name;
    let (p1, p2) = (dir.join(format!("{name}_sfo.csv")), dir.join(format!("{name}_solution.csv")));
    write_file(&p1, &sfo)?;
    write_file(&p2, &sol)?;
    doc.note("sfo_csv", p1.display().to_string());
    doc.note("solution_csv", p2.display().to_string());
    Ok(EXIT_OK)
}

fn emit_csv(cfg: &RunConfig, doc: &mut ReportDocument, key: &str, csv: String) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            write_file(path, &csv)?;
            doc.note(&format!("{key}_csv"), path.display().to_string());
        }
        None => doc.add(key, &csv),
    }
    Ok(())
}

fn localization(c: &Common, doc: &mut ReportDocument) -> Result<i32, CliError> {
    let cfg = start(c, doc)?;
    let pt = resolved_point(&cfg, doc)?;
    let rep = check_localization(&cfg.problem, &pt)?;
    doc.add("localization", &rep);
    doc.note("certified", rep.certified);
    doc.note("certified_by", &rep.certified_by);
    if let Some(u) = &cfg.direction {
        let track = localization_track(&cfg.problem, &pt, u, &SamplingSchedule::default_for(u), cfg.eps_y, &cfg.grid)?;
        doc.note("track_single_valued", track.single_valued);
        doc.add("track", &track);
    }
    Ok(if rep.certified { EXIT_OK } else { EXIT_NEGATIVE })
}

fn directions(c: &Common, doc: &mut ReportDocument) -> Result<i32, CliError> {
    let cfg = start(c, doc)?;
    let pt = resolved_point(&cfg, doc)?;
    let rep = inner_semicontinuity_report(&cfg.problem, &pt, cfg.direction.as_deref(), &cfg.grid)?;
    doc.add("inner_semicontinuity", &rep);
    doc.note("singleton", rep.singleton);
    doc.note("admissible_full", rep.admissible.is_full());
    doc.note("admissible_normals", &rep.admissible.normals);
    doc.note("admissible_witness", &rep.admissible.witness);
    doc.note("inf_compactness", rep.inf_compactness.verdict);
    if let Some(e) = &rep.empirical {
        doc.note("empirical_inner_semicontinuity", e.verdict);
    }
    Ok(if rep.admissible.empty { EXIT_NEGATIVE } else { EXIT_OK })
}

/// `--direction`, or the admissible-cone witness when S(x̄) is not a singleton.
fn default_direction(cfg: &RunConfig, pt: &EvalPoint) -> Result<Vec<f64>, CliError> {
    if let Some(u) = &cfg.direction {
        return Ok(u.clone());
    }
    let cone = admissible_directions(&cfg.problem, &pt.x, &pt.y, &cfg.grid)?;
    match (&cone.witness, cone.is_full()) {
        (_, true) => Ok(vec![0.0; cfg.problem.n]),
        (Some(w), false) => Ok(w.clone()),
        (None, false) => Err(CliError::Usage("the admissible cone is empty; pass --direction".into())),
    }
}

pub fn run_equivalence(
    prob: &BilevelProblem,
    pt: &EvalPoint,
    u: &[f64],
    (eps_x, eps_y, delta): (f64, f64, f64),
    grid: &GridSpec,
    doc: &mut ReportDocument,
    key: &str,
) -> Result<bool, CliError> {
    let sched = neighborhood_schedule(u, eps_x, delta, DEFAULT_T_COUNT, DEFAULT_DIRECTIONS);
    let rep = verify_equivalence(prob, pt, u, eps_x, eps_y, delta, &sched, grid)?;
    doc.note(&format!("{key}_verdict"), rep.verdict);
    doc.note(&format!("{key}_samples"), rep.samples);
    doc.add(key, &rep);
    Ok(rep.verdict)
}

fn equivalence(c: &Common, doc: &mut ReportDocument) -> Result<i32, CliError> {
    let cfg = start(c, doc)?;
    let pt = resolved_point(&cfg, doc)?;
    let u = default_direction(&cfg, &pt)?;
    doc.note("direction", &u);
    let ok = run_equivalence(&cfg.problem, &pt, &u, (cfg.eps_x, cfg.eps_y, cfg.delta), &cfg.grid, doc, "equivalence")?;
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn certify(a: &CertifyArgs, doc: &mut ReportDocument) -> Result<i32, CliError> {
    let cfg = start(&a.common, doc)?;
    let pt = resolved_point(&cfg, doc)?;
    certify_pipeline(&cfg.problem, &pt, cfg.direction.as_deref(), &cfg.grid, a.assume_cq, doc)
}

/// Critical direction → constraint qualification → directional KKT
/// certificate. Every negative outcome is a finding (exit 2).
pub fn certify_pipeline(
    prob: &BilevelProblem,
    pt: &EvalPoint,
    direction: Option<&[f64]>,
    grid: &GridSpec,
    assume_cq: bool,
    doc: &mut ReportDocument,
) -> Result<i32, CliError> {
    let candidates = match direction {
        Some(u) => vec![u.to_vec()],
        None => {
            let cone = admissible_directions(prob, &pt.x, &pt.y, grid)?;
            doc.add("admissible", &cone);
            cone.scan(CONE_SCAN)
        }
    };
    let mut scan = Vec::new();
    let mut critical = None;
    for u in &candidates {
        match find_critical_direction(prob, pt, u) {
            Ok(c) => {
                scan.push(json!({"u": u, "critical": c.v.is_some(), "upper_derivative": c.upper_derivative, "reason": c.reason}));
                if critical.is_none() {
                    if let Some(v) = c.v {
                        critical = Some((u.clone(), v));
                    }
                }
            }
            Err(e @ Error::Singular(_)) => scan.push(json!({"u": u, "critical": false, "reason": e.to_string()})),
            Err(e) => return Err(e.into()),
        }
    }
    doc.note("directions_scanned", scan.len());
    doc.add("critical_scan", &scan);
    let Some((u, v)) = critical else {
        doc.note("finding", "no critical direction");
        return Ok(EXIT_NEGATIVE);
    };
    doc.note("critical_direction", json!({"u": u, "v": v}));

    let nnamcq = check_nnamcq(prob, pt)?;
    doc.note("nnamcq", nnamcq.verdict);
    doc.add("nnamcq", &nnamcq);
    let cq = if nnamcq.established() {
        nnamcq
    } else {
        match check_foscms(prob, pt, &u, &v) {
            Ok(ev) if ev.established() => ev,
            _ if detect_affine_polyhedral(prob) => affine_polyhedral_evidence(prob),
            _ if assume_cq => CqEvidence::assumed(),
            _ => {
                doc.note("finding", "constraint qualification not established");
                return Ok(EXIT_NEGATIVE);
            }
        }
    };
    doc.note("cq", cq.kind);
    match certify_directional_kkt(prob, pt, &u, &v, cq) {
        Ok(cert) => {
            doc.note("nu_bar", &cert.nu);
            doc.note("mu", &cert.mu);
            doc.note("beta", &cert.beta);
            doc.note("stationarity_residual", cert.residuals.stationarity);
            doc.note("finding", "directional KKT certificate");
            doc.add("certificate", &cert);
            Ok(EXIT_OK)
        }
        Err(Error::NoMultipliers(best)) => {
            doc.note("finding", "no multipliers");
            doc.note("best_residual", best);
            Ok(EXIT_NEGATIVE)
        }
        Err(e) => Err(e.into()),
    }
}
