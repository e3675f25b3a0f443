//! Brute-force oracles for the lower-level problem `min_{y∈Y} f(x, y)`:
//! solution set S(x), stationary set S_FO(x), value function V(x), and
//! their behaviour along directions.

mod multi;
mod one_d;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::EvalPoint;
use crate::format::g12;
use crate::geometry::BOUND_TOL;
use crate::linalg::{dist, norm};
use crate::problems::{BilevelProblem, BoxSet, DEFAULT_WINDOW};
use one_d::{golden, linspace, refine_min, slope_root, Lower1};

pub const DEFAULT_TIE_TOL: f64 = 1e-9;
pub const MERGE_RADIUS: f64 = 1e-6;
/// Residual accepted for a refined stationary point.
pub const STATIONARY_TOL: f64 = 1e-9;
pub const MAX_LOWER_DIM: usize = 3;
const ESCAPE_FACTOR: f64 = 100.0;
const ESCAPE_RESOLUTION: usize = 1001;
const MAX_CANDIDATES: usize = 256;

pub fn default_resolution(m: usize) -> usize {
    match m {
        1 => 4001,
        2 => 401,
        _ => 101,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Finite per-axis sampling window, already intersected with Y.
    pub window: Vec<(f64, f64)>,
    pub resolution: usize,
    pub refine: bool,
    pub tie_tol: f64,
}

impl GridSpec {
    pub fn for_problem(prob: &BilevelProblem) -> GridSpec {
        GridSpec {
            window: prob.y_box.window(DEFAULT_WINDOW),
            resolution: default_resolution(prob.m),
            refine: true,
            tie_tol: DEFAULT_TIE_TOL,
        }
    }

    pub fn with_resolution(mut self, r: usize) -> GridSpec {
        self.resolution = r.max(2);
        self
    }

    /// Same grid restricted to the box around `center` of half-width `radius`.
    pub fn around(&self, center: &[f64], radius: f64) -> GridSpec {
        let window = self
            .window
            .iter()
            .zip(center)
            .map(|(&(lo, hi), &c)| ((c - radius).max(lo), (c + radius).min(hi)))
            .collect();
        GridSpec { window, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub x: Vec<f64>,
    pub minimizers: Vec<Vec<f64>>,
    /// V(x) relative to the window.
    pub value: f64,
    /// The argmin touches a window edge that is not a bound of Y, or f keeps
    /// decreasing across such an edge: the true infimum may lie outside.
    pub boundary_flag: bool,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub y: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarySample {
    pub x: Vec<f64>,
    pub stationary_points: Vec<StationaryPoint>,
    pub ball: Option<(Vec<f64>, f64)>,
}

impl StationarySample {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.stationary_points.iter().map(|p| p.y.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSchedule {
    /// Strictly decreasing, ending at or below 1e-6.
    pub t_values: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl SamplingSchedule {
    pub fn new(t_values: Vec<f64>, directions: Vec<Vec<f64>>) -> Result<SamplingSchedule> {
        let ok = !t_values.is_empty()
            && t_values.iter().all(|t| *t > 0.0)
            && t_values.windows(2).all(|w| w[1] < w[0])
            && *t_values.last().unwrap() <= 1e-6;
        if !ok {
            return Err(Error::Schema("t-values must be positive, strictly decreasing and reach 1e-6".into()));
        }
        if directions.is_empty() {
            return Err(Error::Schema("schedule needs at least one direction".into()));
        }
        Ok(SamplingSchedule { t_values, directions })
    }

    /// `t_k = 2^{-k}`, k = 1..20, along `u` only.
    pub fn default_for(u: &[f64]) -> SamplingSchedule {
        SamplingSchedule { t_values: (1..=20).map(|k| 0.5f64.powi(k)).collect(), directions: vec![u.to_vec()] }
    }

    /// `u` plus `count - 1` seeded perturbations whose unit vectors stay
    /// within `delta` of `u/‖u‖`; lengths vary by up to ±25 %.
    pub fn with_cap(u: &[f64], delta: f64, count: usize, seed: u64) -> SamplingSchedule {
        let mut s = SamplingSchedule::default_for(u);
        s.directions = cap_directions(u, delta, count, seed);
        s
    }
}

/// Seeded directions d' with ‖d'/‖d'‖ − u/‖u‖‖ ≤ δ (just `u` when u = 0).
pub fn cap_directions(u: &[f64], delta: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = vec![u.to_vec()];
    let r = norm(u);
    if r == 0.0 {
        return out;
    }
    let uh: Vec<f64> = u.iter().map(|v| v / r).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut guard = 0;
    while out.len() < count && guard < 100 * count {
        guard += 1;
        let w: Vec<f64> = (0..u.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cand: Vec<f64> = uh.iter().zip(&w).map(|(a, b)| a + delta * b / (u.len() as f64).sqrt()).collect();
        let cn = norm(&cand);
        if cn == 0.0 {
            continue;
        }
        let unit: Vec<f64> = cand.iter().map(|v| v / cn).collect();
        if dist(&unit, &uh) > delta {
            continue;
        }
        let len = r * rng.gen_range(0.75..1.25);
        out.push(unit.iter().map(|v| v * len).collect());
    }
    out
}

fn check_dims(prob: &BilevelProblem, x: &[f64]) -> Result<()> {
    if x.len() != prob.n {
        return Err(Error::Dimension(format!("x has length {}, n = {}", x.len(), prob.n)));
    }
    if prob.m > MAX_LOWER_DIM {
        return Err(Error::DimensionTooLarge(prob.m, MAX_LOWER_DIM));
    }
    Ok(())
}

/// Tensor grid over `window` with `resolution` points per axis.
pub fn grid_points(window: &[(f64, f64)], resolution: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = window.iter().map(|&(lo, hi)| linspace(lo, hi, resolution)).collect();
    multi::tensor_grid(&axes)
}

/// `‖P‖∞` of the box-projected gradient: the violation of `0 ∈ g + N_Y(y)`.
pub fn stationarity_residual_grad(y_box: &BoxSet, y: &[f64], g: &[f64]) -> f64 {
    (0..y.len())
        .map(|i| {
            let (lo, hi) = (y_box.at_lower(i, y[i], BOUND_TOL), y_box.at_upper(i, y[i], BOUND_TOL));
            match (lo, hi) {
                (true, true) => 0.0,
                (true, false) => (-g[i]).max(0.0),
                (false, true) => g[i].max(0.0),
                (false, false) => g[i].abs(),
            }
        })
        .fold(0.0, f64::max)
}

pub fn stationarity_residual(prob: &BilevelProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = prob.lower.diff_y(x, y)?;
    let g: Vec<f64> = d.gradient.iter().copied().collect();
    Ok(stationarity_residual_grad(&prob.y_box, y, &g))
}

/// Sort lexicographically and merge points closer than `radius`, keeping the
/// one with the smaller score.
fn merge(mut pts: Vec<(Vec<f64>, f64)>, radius: f64) -> Vec<(Vec<f64>, f64)> {
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for p in pts {
        match out.iter_mut().find(|q| dist(&q.0, &p.0) <= radius) {
            Some(q) => {
                if p.1 < q.1 {
                    *q = p;
                }
            }
            None => out.push(p),
        }
    }
    out
}

fn lowest_candidates(idx: Vec<usize>, vals: &[f64]) -> Vec<usize> {
    let mut idx = idx;
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap().then(a.cmp(&b)));
    idx.truncate(MAX_CANDIDATES);
    idx
}

/// Global argmin of f(x, ·) over the grid window.
pub fn solve_lower(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<SolutionSample> {
    check_dims(prob, x)?;
    if prob.m == 1 {
        solve_lower_1d(prob, x, grid)
    } else {
        solve_lower_nd(prob, x, grid)
    }
}

fn finish_solution(
    prob: &BilevelProblem,
    x: &[f64],
    grid: &GridSpec,
    cands: Vec<(Vec<f64>, f64)>,
    mut boundary_flag: bool,
    method: &str,
) -> SolutionSample {
    let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let kept: Vec<(Vec<f64>, f64)> = cands.into_iter().filter(|c| c.1 <= best + grid.tie_tol).collect();
    let kept = merge(kept, MERGE_RADIUS);
    for (y, _) in &kept {
        for (i, v) in y.iter().enumerate() {
            let (lo, hi) = grid.window[i];
            let truncated_lo = lo > prob.y_box.lower[i];
            let truncated_hi = hi < prob.y_box.upper[i];
            if (truncated_lo && *v <= lo + BOUND_TOL) || (truncated_hi && *v >= hi - BOUND_TOL) {
                boundary_flag = true;
            }
        }
    }
    SolutionSample {
        x: x.to_vec(),
        minimizers: kept.into_iter().map(|c| c.0).collect(),
        value: best,
        boundary_flag,
        method: method.to_string(),
    }
}

fn solve_lower_1d(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<SolutionSample> {
    let l = Lower1 { f: &prob.lower, x };
    let (lo, hi) = grid.window[0];
    let ys = linspace(lo, hi, grid.resolution);
    let fs: Vec<f64> = ys.iter().map(|&y| l.value(y)).collect::<Result<_>>()?;
    let n = ys.len();
    let minima: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || fs[i] <= fs[i - 1]) && (i + 1 == n || fs[i] <= fs[i + 1]))
        .collect();
    let minima = lowest_candidates(minima, &fs);
    let mut cands = Vec::with_capacity(minima.len());
    for i in minima {
        let (y, v) = if grid.refine {
            refine_min(&l, ys[i.saturating_sub(1)], ys[(i + 1).min(n - 1)], ys[i])?
        } else {
            (ys[i], fs[i])
        };
        cands.push((vec![y], v));
    }
    // Decreasing across a truncated edge means lower values may lie outside.
    let mut flag = false;
    if lo > prob.y_box.lower[0] && l.slope(lo)? > 0.0 {
        flag = true;
    }
    if hi < prob.y_box.upper[0] && l.slope(hi)? < 0.0 {
        flag = true;
    }
    if !flag {
        let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        flag = lower_value_outside(&l, &prob.y_box, lo, hi, best - grid.tie_tol.max(1e-9 * best.abs()))?;
    }
    let method = format!("grid({n}){}", if grid.refine { "+newton" } else { "" });
    Ok(finish_solution(prob, x, grid, cands, flag, &method))
}

/// Outward probe past truncated window edges, up to `ESCAPE_FACTOR` times
/// the window: coarse grid plus golden refinement around its lowest point.
/// Catches minimizers that escape while f still increases at the edge.
fn lower_value_outside(l: &Lower1, y_box: &BoxSet, lo: f64, hi: f64, level: f64) -> Result<bool> {
    let half = 0.5 * (hi - lo);
    let c = 0.5 * (lo + hi);
    let reach = ESCAPE_FACTOR * half.max(1.0);
    let mut spans = Vec::new();
    if lo > y_box.lower[0] {
        spans.push(((c - reach).max(y_box.lower[0]), lo));
    }
    if hi < y_box.upper[0] {
        spans.push((hi, (c + reach).min(y_box.upper[0])));
    }
    for (a, b) in spans {
        if b <= a {
            continue;
        }
        let ys = linspace(a, b, ESCAPE_RESOLUTION);
        let fs: Vec<f64> = ys.iter().map(|&y| l.value(y)).collect::<Result<_>>()?;
        let i = (0..fs.len()).min_by(|&i, &j| fs[i].total_cmp(&fs[j])).unwrap();
        if fs[i] < level {
            return Ok(true);
        }
        let (ga, gb) = (ys[i.saturating_sub(1)], ys[(i + 1).min(ys.len() - 1)]);
        if golden(ga, gb, |y| l.value(y))?.1 < level {
            return Ok(true);
        }
    }
    Ok(false)
}

fn solve_lower_nd(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<SolutionSample> {
    let axes: Vec<Vec<f64>> = grid.window.iter().map(|&(lo, hi)| linspace(lo, hi, grid.resolution)).collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let pts = multi::tensor_grid(&axes);
    let fs: Vec<f64> = pts.par_iter().map(|y| prob.lower.eval_xy(x, y)).collect::<Result<_>>()?;
    let minima: Vec<usize> =
        (0..pts.len()).filter(|&i| multi::neighbors(i, &shape).iter().all(|&j| fs[i] <= fs[j])).collect();
    let minima = lowest_candidates(minima, &fs);
    let cands: Vec<(Vec<f64>, f64)> = minima
        .par_iter()
        .map(|&i| if grid.refine { multi::polish_min(&prob.lower, x, &pts[i], &grid.window) } else { Ok((pts[i].clone(), fs[i])) })
        .collect::<Result<_>>()?;
    let method = format!("grid({}^{}){}", grid.resolution, prob.m, if grid.refine { "+projected-newton" } else { "" });
    Ok(finish_solution(prob, x, grid, cands, false, &method))
}

/// All box-stationary points of f(x, ·) in the grid window.
pub fn stationary_set(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<StationarySample> {
    check_dims(prob, x)?;
    let pts = if prob.m == 1 { stationary_1d(prob, x, grid)? } else { stationary_nd(prob, x, grid)? };
    Ok(StationarySample {
        x: x.to_vec(),
        stationary_points: pts.into_iter().map(|(y, residual)| StationaryPoint { y, residual }).collect(),
        ball: None,
    })
}

/// Stationary points within the closed ball `B(center, radius)`.
pub fn stationary_in_ball(
    prob: &BilevelProblem,
    x: &[f64],
    grid: &GridSpec,
    center: &[f64],
    radius: f64,
) -> Result<StationarySample> {
    let local = grid.around(center, radius);
    let mut s = stationary_set(prob, x, &local)?;
    s.stationary_points.retain(|p| dist(&p.y, center) <= radius);
    s.ball = Some((center.to_vec(), radius));
    Ok(s)
}

fn stationary_1d(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    let l = Lower1 { f: &prob.lower, x };
    let (lo, hi) = grid.window[0];
    let ys = linspace(lo, hi, grid.resolution);
    let ds: Vec<f64> = ys.iter().map(|&y| l.slope(y)).collect::<Result<_>>()?;
    let n = ys.len();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        if ds[i] == 0.0 {
            roots.push(ys[i]);
        }
    }
    for i in 0..n.saturating_sub(1) {
        if ds[i] * ds[i + 1] < 0.0 {
            roots.push(slope_root(&l, ys[i], ys[i + 1])?);
        }
    }
    // Zeros of f_y without a sign change (e.g. inflection points).
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (ds[i - 1], ds[i], ds[i + 1]);
        if a * b > 0.0 && b * c > 0.0 && b.abs() <= a.abs() && b.abs() <= c.abs() {
            let (y, r) = golden(ys[i - 1], ys[i + 1], |y| Ok(l.slope(y)?.abs()))?;
            if r <= STATIONARY_TOL {
                roots.push(y);
            }
        }
    }
    let y_box = &prob.y_box;
    if y_box.lower[0].is_finite() && lo == y_box.lower[0] && ds[0] >= -STATIONARY_TOL {
        roots.push(lo);
    }
    if y_box.upper[0].is_finite() && hi == y_box.upper[0] && ds[n - 1] <= STATIONARY_TOL {
        roots.push(hi);
    }
    let mut out = Vec::with_capacity(roots.len());
    for y in roots {
        let g = l.slope(y)?;
        out.push((vec![y], stationarity_residual_grad(y_box, &[y], &[g])));
    }
    Ok(merge(out, MERGE_RADIUS))
}

fn stationary_nd(prob: &BilevelProblem, x: &[f64], grid: &GridSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    let axes: Vec<Vec<f64>> = grid.window.iter().map(|&(lo, hi)| linspace(lo, hi, grid.resolution)).collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let pts = multi::tensor_grid(&axes);
    let rs: Vec<f64> = pts.par_iter().map(|y| stationarity_residual(prob, x, y)).collect::<Result<_>>()?;
    let minima: Vec<usize> =
        (0..pts.len()).filter(|&i| multi::neighbors(i, &shape).iter().all(|&j| rs[i] <= rs[j])).collect();
    let minima = lowest_candidates(minima, &rs);
    let polished: Vec<(Vec<f64>, f64)> = minima
        .par_iter()
        .map(|&i| multi::polish_stationary(&prob.lower, x, &pts[i], &prob.y_box, &grid.window))
        .collect::<Result<_>>()?;
    Ok(merge(polished.into_iter().filter(|p| p.1 <= STATIONARY_TOL).collect(), MERGE_RADIUS))
}

/// `(x, V(x))` rows.
pub fn value_function(prob: &BilevelProblem, xs: &[Vec<f64>], grid: &GridSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    xs.par_iter().map(|x| Ok((x.clone(), solve_lower(prob, x, grid)?.value))).collect()
}

/// CSV with header `x1,..,xn,V`.
pub fn value_function_csv(rows: &[(Vec<f64>, f64)], n: usize) -> String {
    let mut s: String = (1..=n).map(|i| format!("x{i},")).collect::<String>() + "V\n";
    for (x, v) in rows {
        for xi in x {
            s += &g12(*xi);
            s.push(',');
        }
        s += &g12(*v);
        s.push('\n');
    }
    s
}

/// Cluster points of S(x̄ + t d') along the schedule, taken over the
/// smallest quarter of the t-values and merged at radius 1e-3. Each cluster
/// is represented by its member at the smallest t.
pub fn directional_solution_set(
    prob: &BilevelProblem,
    xbar: &[f64],
    u: &[f64],
    sched: &SamplingSchedule,
    grid: &GridSpec,
) -> Result<Vec<Vec<f64>>> {
    check_dims(prob, xbar)?;
    if u.len() != prob.n {
        return Err(Error::Dimension("direction length differs from n".into()));
    }
    let k = sched.t_values.len();
    let tail = &sched.t_values[k - (k / 4).max(1)..];
    let mut jobs = Vec::new();
    for (ti, &t) in tail.iter().enumerate() {
        for d in &sched.directions {
            jobs.push((ti, xbar.iter().zip(d).map(|(a, b)| a + t * b).collect::<Vec<f64>>()));
        }
    }
    let samples: Vec<(usize, SolutionSample)> =
        jobs.par_iter().map(|(ti, x)| Ok((*ti, solve_lower(prob, x, grid)?))).collect::<Result<_>>()?;
    // Latest (smallest t) first so cluster representatives are the most accurate.
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for (_, s) in samples.iter().rev() {
        for y in &s.minimizers {
            if !pts.iter().any(|p| dist(p, y) <= 1e-3) {
                pts.push(y.clone());
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackStep {
    pub t: f64,
    pub x: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationTrack {
    pub steps: Vec<TrackStep>,
    /// Exactly one stationary point in the ball at every step.
    pub single_valued: bool,
    /// First t at which the ball contained no stationary point.
    pub lost_at: Option<f64>,
    /// Largest ‖y(t) − y(t')‖ / ‖x(t) − x(t')‖ over consecutive single-valued steps.
    pub lipschitz: f64,
}

/// Follow `S_FO(x̄ + t u) ∩ B(ȳ, radius)` along the schedule.
pub fn localization_track(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: &[f64],
    sched: &SamplingSchedule,
    radius: f64,
    grid: &GridSpec,
) -> Result<LocalizationTrack> {
    prob.check_point(point)?;
    let r0 = stationarity_residual(prob, &point.x, &point.y)?;
    if r0 > 1e-8 {
        return Err(Error::NotStationary(r0));
    }
    let local = grid.around(&point.y, radius);
    let steps: Vec<TrackStep> = sched
        .t_values
        .par_iter()
        .map(|&t| {
            let x: Vec<f64> = point.x.iter().zip(u).map(|(a, b)| a + t * b).collect();
            let s = stationary_in_ball(prob, &x, &local, &point.y, radius)?;
            Ok(TrackStep { t, x, points: s.points() })
        })
        .collect::<Result<_>>()?;
    let single_valued = steps.iter().all(|s| s.points.len() == 1);
    let lost_at = steps.iter().find(|s| s.points.is_empty()).map(|s| s.t);
    let mut lipschitz: f64 = 0.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = Some((point.x.clone(), point.y.clone()));
    for s in &steps {
        if s.points.len() == 1 {
            if let Some((px, py)) = &prev {
                let dx = dist(px, &s.x);
                if dx > 0.0 {
                    lipschitz = lipschitz.max(dist(py, &s.points[0]) / dx);
                }
            }
            prev = Some((s.x.clone(), s.points[0].clone()));
        } else {
            prev = None;
        }
    }
    Ok(LocalizationTrack { steps, single_valued, lost_at, lipschitz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, solve_y0};

    #[test]
    fn mirrlees_two_global_minimizers() {
        let p = builtin("mirrlees").unwrap();
        let s = solve_lower(&p, &[1.0], &GridSpec::for_problem(&p)).unwrap();
        let y0 = solve_y0();
        assert_eq!(s.minimizers.len(), 2);
        assert!((s.minimizers[0][0] + y0).abs() < 1e-9 && (s.minimizers[1][0] - y0).abs() < 1e-9);
        assert!(!s.boundary_flag);
        let v = -(-(1.0 + y0).powi(2)).exp() - (-(1.0 - y0).powi(2)).exp();
        assert!((s.value - v).abs() < 1e-14);
    }

    #[test]
    fn mirrlees_three_stationary_points() {
        let p = builtin("mirrlees").unwrap();
        let s = stationary_set(&p, &[1.0], &GridSpec::for_problem(&p)).unwrap();
        let ys: Vec<f64> = s.stationary_points.iter().map(|q| q.y[0]).collect();
        assert_eq!(ys.len(), 3, "{ys:?}");
        assert!(ys[1].abs() < 1e-12);
        assert!(s.stationary_points.iter().all(|q| q.residual <= STATIONARY_TOL));
    }

    #[test]
    fn closed_form_minimizers() {
        let p = builtin("example-xy-1").unwrap();
        let g = GridSpec::for_problem(&p);
        assert!((solve_lower(&p, &[2.0], &g).unwrap().minimizers[0][0] - 0.5).abs() < 1e-9);
        let s0 = solve_lower(&p, &[0.0], &g).unwrap();
        assert_eq!(s0.minimizers, vec![vec![0.0]]);
        assert!(!s0.boundary_flag);
        assert!(solve_lower(&p, &[0.05], &g).unwrap().boundary_flag);
        assert!(solve_lower(&p, &[-0.1], &g).unwrap().boundary_flag);
        let q = builtin("example-xy3").unwrap();
        let s = solve_lower(&q, &[4.0], &GridSpec::for_problem(&q)).unwrap();
        assert!((s.minimizers[0][0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_examples() {
        let t = builtin("toy-convex").unwrap();
        let s = stationary_set(&t, &[0.7], &GridSpec::for_problem(&t)).unwrap();
        assert_eq!(s.points().len(), 1);
        assert!((s.points()[0][0] - 0.7).abs() < 1e-12);
        let e = builtin("example-xy-1").unwrap();
        let s = stationary_set(&e, &[0.0], &GridSpec::for_problem(&e)).unwrap();
        assert_eq!(s.points(), vec![vec![0.0]]);
    }

    #[test]
    fn inflection_point_is_stationary() {
        let p = BilevelProblem::new("cubic", 1, 1, "0", "y1^3", &[], BoxSet::unbounded(1)).unwrap();
        let s = stationary_set(&p, &[0.0], &GridSpec::for_problem(&p)).unwrap();
        assert_eq!(s.points().len(), 1);
        assert!(s.points()[0][0].abs() < 1e-4);
    }

    #[test]
    fn bound_stationarity() {
        let p = BilevelProblem::new("b", 1, 1, "0", "(y1 - x1)^2", &[], BoxSet::interval(0.0, 1.0).unwrap()).unwrap();
        let g = GridSpec::for_problem(&p);
        let s = stationary_set(&p, &[-0.5], &g).unwrap();
        assert_eq!(s.points(), vec![vec![0.0]]);
        let m = solve_lower(&p, &[2.0], &g).unwrap();
        assert_eq!(m.minimizers, vec![vec![1.0]]);
        assert!(!m.boundary_flag);
    }

    #[test]
    fn two_dimensional_lower_level() {
        let p = BilevelProblem::new(
            "q2",
            1,
            2,
            "0",
            "(y1 - x1)^2 + (y2 + 1)^2 + y1*y2",
            &[],
            BoxSet::new(vec![-2.0, 0.0], vec![2.0, 2.0]).unwrap(),
        )
        .unwrap();
        let g = GridSpec::for_problem(&p).with_resolution(81);
        // Minimizer with y2 on its lower bound: y1 = x1 (since y2 = 0).
        let s = solve_lower(&p, &[0.5], &g).unwrap();
        assert_eq!(s.minimizers.len(), 1);
        assert!((s.minimizers[0][0] - 0.5).abs() < 1e-8 && s.minimizers[0][1].abs() < 1e-12);
        let st = stationary_set(&p, &[0.5], &g).unwrap();
        assert!(st.points().iter().any(|y| dist(y, &s.minimizers[0]) < 1e-8));
    }

    #[test]
    fn mirrlees_directional_limits() {
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let y0 = solve_y0();
        let left = directional_solution_set(&p, &[1.0], &[-1.0], &SamplingSchedule::default_for(&[-1.0]), &g).unwrap();
        assert_eq!(left.len(), 1);
        assert!((left[0][0] - y0).abs() < 1e-3);
        let right = directional_solution_set(&p, &[1.0], &[1.0], &SamplingSchedule::default_for(&[1.0]), &g).unwrap();
        assert_eq!(right.len(), 1);
        assert!((right[0][0] + y0).abs() < 1e-3);
    }

    #[test]
    fn track_single_valued_on_both_sides() {
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let pt = p.reference.clone().unwrap();
        for u in [-1.0, 1.0] {
            let tr = localization_track(&p, &pt, &[u], &SamplingSchedule::default_for(&[u]), 0.4, &g).unwrap();
            assert!(tr.single_valued && tr.lost_at.is_none());
            assert!(tr.lipschitz > 0.0 && tr.lipschitz < 1.0);
        }
        let flat = BilevelProblem::new("flat", 1, 1, "0", "0*y1", &[], BoxSet::unbounded(1)).unwrap();
        let tr = localization_track(&flat, &EvalPoint::new(vec![0.0], vec![0.0]), &[1.0],
            &SamplingSchedule::default_for(&[1.0]), 0.4, &g).unwrap();
        assert!(!tr.single_valued);
    }

    #[test]
    fn value_function_csv_header() {
        let p = builtin("toy-convex").unwrap();
        let rows = value_function(&p, &[vec![0.0], vec![1.5]], &GridSpec::for_problem(&p)).unwrap();
        assert!(rows.iter().all(|r| r.1.abs() < 1e-15));
        assert!(value_function_csv(&rows, 1).starts_with("x1,V\n0,0\n"));
    }
}
