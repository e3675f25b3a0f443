//! Library side of the `bdfoa` binary so that tests can drive it in-process.

mod args;
mod commands;
mod reproduce;
pub mod report;

use std::path::PathBuf;

use bdfoa_core::linalg::dist;
use bdfoa_core::lower::{solve_lower, stationarity_residual, stationary_in_ball};
use bdfoa_core::{builtin, load_problem, BilevelProblem, EvalPoint, GridSpec};
use clap::Parser;
use thiserror::Error;

pub use args::{Cli, Command};
pub use report::ReportDocument;
pub use reproduce::{figure1_sfo_rows, locate_jump};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

/// Default directional-neighborhood moduli.
pub const DEFAULT_EPS_X: f64 = 0.3;
pub const DEFAULT_EPS_Y: f64 = 0.4;
pub const DEFAULT_DELTA: f64 = 0.5;

/// A supplied ȳ this close to a stationary point is moved onto it.
pub const SNAP_RADIUS: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bdfoa_core::Error),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<ReportDocument>,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `argv` (program name first) and execute.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == EXIT_OK { (text, String::new()) } else { (String::new(), text) };
            return Outcome { code, report: None, stdout, stderr };
        }
    };
    let mut doc = ReportDocument::new(echo);
    doc.versions.insert("bdfoa-core".into(), bdfoa_core::VERSION.into());
    let json = match &cli.command {
        Command::Reproduce(a) => a.json,
        Command::Certify(a) => a.common.json,
        Command::ValueFunction(a) | Command::PlotData(a) => a.common.json,
        Command::CheckLocalization(c) | Command::Directions(c) | Command::VerifyEquivalence(c) | Command::SolveLower(c) => {
            c.json
        }
    };
    match commands::dispatch(&cli.command, &mut doc) {
        Ok(code) => {
            doc.exit_code = code;
            let mut stdout = if json { doc.to_json() } else { summary_text(&doc) };
            if let Err(e) = commands::write_report(&cli.command, &doc) {
                stdout.clear();
                return Outcome { code: EXIT_ERROR, report: Some(doc), stdout, stderr: format!("error: {e}\n") };
            }
            Outcome { code, report: Some(doc), stdout, stderr: String::new() }
        }
        Err(e) => {
            doc.exit_code = EXIT_ERROR;
            Outcome { code: EXIT_ERROR, report: Some(doc), stdout: String::new(), stderr: format!("error: {e}\n") }
        }
    }
}

fn summary_text(doc: &ReportDocument) -> String {
    let mut s = String::new();
    for (k, v) in &doc.summary {
        let v = match v {
            serde_json::Value::String(t) => t.clone(),
            other => serde_json::to_string(other).unwrap_or_default(),
        };
        s.push_str(&format!("{k}: {v}\n"));
    }
    s
}

/// Resolved command-line configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: BilevelProblem,
    pub point: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub eps_x: f64,
    pub eps_y: f64,
    pub delta: f64,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_common(c: &args::Common) -> Result<RunConfig, CliError> {
        let problem = match (&c.builtin, &c.problem) {
            (Some(name), None) => builtin(name)?,
            (None, Some(path)) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
                load_problem(&text)?
            }
            _ => return Err(CliError::Usage("exactly one of --builtin or --problem is required".into())),
        };
        let eps = c.eps.clone().unwrap_or_else(|| vec![DEFAULT_EPS_X, DEFAULT_EPS_Y]);
        let eps_x = eps[0];
        let eps_y = eps.get(1).copied().unwrap_or(eps_x);
        let delta = c.delta.unwrap_or(DEFAULT_DELTA);
        for (name, v) in [("eps", eps_x), ("eps", eps_y), ("delta", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("--{name} must be positive")));
            }
        }
        let mut grid = GridSpec::for_problem(&problem);
        if let Some(r) = c.grid {
            if r < 3 {
                return Err(CliError::Usage("--grid must be at least 3".into()));
            }
            grid = grid.with_resolution(r);
        }
        if let Some(d) = &c.direction {
            if d.len() != problem.n {
                return Err(CliError::Usage(format!("--direction needs {} values", problem.n)));
            }
        }
        Ok(RunConfig {
            problem,
            point: c.point.clone(),
            direction: c.direction.clone(),
            eps_x,
            eps_y,
            delta,
            grid,
            out: c.out.clone(),
        })
    }

    /// The upper-level point: `--point` (first n values) or the reference.
    pub fn x(&self) -> Result<Vec<f64>, CliError> {
        let n = self.problem.n;
        match (&self.point, &self.problem.reference) {
            (Some(p), _) if p.len() == n || p.len() == n + self.problem.m => Ok(p[..n].to_vec()),
            (Some(p), _) => Err(CliError::Usage(format!("--point needs {n} or {} values, got {}", n + self.problem.m, p.len()))),
            (None, Some(r)) => Ok(r.x.clone()),
            (None, None) => Err(CliError::Usage("--point is required (the problem has no reference point)".into())),
        }
    }

    /// The full point (x̄, ȳ). A ȳ given with few digits is snapped to the
    /// nearest stationary point within `SNAP_RADIUS`; a missing ȳ is taken
    /// from S(x̄), preferring the minimizer closest to the reference.
    pub fn point(&self) -> Result<(EvalPoint, Option<Vec<f64>>), CliError> {
        let prob = &self.problem;
        let x = self.x()?;
        let given = self.point.as_ref().filter(|p| p.len() == prob.n + prob.m).map(|p| p[prob.n..].to_vec());
        match given {
            Some(y) => {
                let pt = EvalPoint::new(x.clone(), y.clone());
                prob.check_point(&pt)?;
                let r = stationarity_residual(prob, &x, &y)?;
                if r <= 1e-8 {
                    return Ok((pt, None));
                }
                let near = stationary_in_ball(prob, &x, &self.grid.around(&y, SNAP_RADIUS), &y, SNAP_RADIUS)?.points();
                let best = near
                    .into_iter()
                    .min_by(|a, b| dist(a, &y).total_cmp(&dist(b, &y)))
                    .ok_or(bdfoa_core::Error::NotStationary(r))?;
                Ok((EvalPoint::new(x, best), Some(y)))
            }
            None if self.point.is_none() && prob.reference.is_some() => Ok((prob.reference.clone().unwrap(), None)),
            None => {
                let s = solve_lower(prob, &x, &self.grid)?;
                let target = prob.reference.as_ref().map(|r| r.y.clone());
                let y = s
                    .minimizers
                    .iter()
                    .min_by(|a, b| match &target {
                        Some(t) => dist(a, t).total_cmp(&dist(b, t)),
                        None => std::cmp::Ordering::Equal,
                    })
                    .cloned()
                    .ok_or_else(|| CliError::Usage("the lower level has no minimizer in the window".into()))?;
                Ok((EvalPoint::new(x, y), None))
            }
        }
    }
}
