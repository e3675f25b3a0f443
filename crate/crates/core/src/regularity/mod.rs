//! Sufficient conditions for a single-valued localization of S_FO and for
//! directional inner semicontinuity of S.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::EvalPoint;
use crate::geometry::{critical_cone, PolyCone, SignedCoordinateCone, Tag};
use crate::linalg::{combinations, dist, dot, norm, normalized};
use crate::lower::{
    grid_points, solve_lower, stationarity_residual, GridSpec, SamplingSchedule, SolutionSample,
};
use crate::problems::BilevelProblem;

/// Residual accepted for "ȳ is stationary" preconditions.
pub const POINT_STATIONARY_TOL: f64 = 1e-8;
/// Slack for the strict inequalities defining admissible directions.
pub const STRICT_SLACK: f64 = 1e-8;
pub const MAX_FACE_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

struct LowerSecondOrder {
    gradient: Vec<f64>,
    hessian: DMatrix<f64>,
}

fn second_order(prob: &BilevelProblem, point: &EvalPoint) -> Result<LowerSecondOrder> {
    prob.check_point(point)?;
    let d = prob.lower.diff_y(&point.x, &point.y)?;
    Ok(LowerSecondOrder { gradient: d.gradient.iter().copied().collect(), hessian: d.hessian })
}

fn require_stationary(prob: &BilevelProblem, point: &EvalPoint) -> Result<()> {
    prob.check_point(point)?;
    if !prob.y_box.contains(&point.y, 1e-12) {
        return Err(Error::NotInBox(format!("{:?}", point.y)));
    }
    let r = stationarity_residual(prob, &point.x, &point.y)?;
    if r > POINT_STATIONARY_TOL {
        return Err(Error::NotStationary(r));
    }
    Ok(())
}

fn require_small(m: usize) -> Result<()> {
    if m > MAX_FACE_DIM {
        return Err(Error::DimensionTooLarge(m, MAX_FACE_DIM));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorCheck {
    pub verdict: Verdict,
    pub interior: bool,
    pub min_singular_value: f64,
    pub hessian_norm: f64,
}

/// ȳ ∈ int Y and ∇²_yy f(x̄, ȳ) nonsingular.
pub fn check_interior_nonsingular(prob: &BilevelProblem, point: &EvalPoint) -> Result<InteriorCheck> {
    require_stationary(prob, point)?;
    let so = second_order(prob, point)?;
    let sv = so.hessian.clone().singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hnorm = sv.iter().copied().fold(0.0, f64::max);
    let interior = prob.y_box.interior(&point.y, 1e-9);
    let nonsingular = smin >= 1e-8 * hnorm.max(1.0);
    Ok(InteriorCheck {
        verdict: Verdict::from_bool(interior && nonsingular),
        interior,
        min_singular_value: smin,
        hessian_norm: hnorm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub verdict: Verdict,
    /// Smallest eigenvalue on span(Y − Y); `None` when the span is {0}
    /// (the inequality is vacuous, μ = +∞).
    pub mu: Option<f64>,
    /// Coordinates with a_i < b_i.
    pub span_coordinates: Vec<usize>,
    /// The Hessian is taken at the point only; with Y unbounded the
    /// inequality over all of Y − Y cannot be sampled.
    pub pointwise_only: bool,
}

pub fn check_strong_monotonicity(prob: &BilevelProblem, point: &EvalPoint) -> Result<MonotonicityCheck> {
    let so = second_order(prob, point)?;
    let span: Vec<usize> = (0..prob.m).filter(|&i| prob.y_box.lower[i] < prob.y_box.upper[i]).collect();
    let pointwise_only = !prob.y_box.is_bounded();
    if span.is_empty() {
        return Ok(MonotonicityCheck { verdict: Verdict::Holds, mu: None, span_coordinates: span, pointwise_only });
    }
    let sub = so.hessian.select_rows(&span).select_columns(&span);
    let mu = SymmetricEigen::new(sub).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MonotonicityCheck { verdict: Verdict::from_bool(mu > 1e-8), mu: Some(mu), span_coordinates: span, pointwise_only })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoscCheck {
    pub verdict: Verdict,
    pub critical_cone: SignedCoordinateCone,
    /// Minimum of ⟨w, ∇²_yy f w⟩ over unit w ∈ K (`None` when K = {0}).
    pub min_curvature: Option<f64>,
    pub worst_direction: Option<Vec<f64>>,
}

fn sign_ok(tag: Tag, v: f64) -> bool {
    match tag {
        Tag::NonNeg => v >= -1e-12,
        Tag::NonPos => v <= 1e-12,
        Tag::Free => true,
        Tag::Zero => v == 0.0,
    }
}

/// Minimum of the quadratic form of `h` over the unit vectors of `k`.
///
/// The minimizer lies in the relative interior of some face; there the sign
/// constraints are inactive, so it is an eigenvector of the principal
/// submatrix on the face's support. Enumerating supports is exact.
pub fn min_quadratic_on_cone(h: &DMatrix<f64>, k: &SignedCoordinateCone) -> Option<(f64, Vec<f64>)> {
    let coords: Vec<usize> = (0..k.dim()).filter(|&i| k.tags[i] != Tag::Zero).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for size in 1..=coords.len() {
        for pick in combinations(coords.len(), size) {
            let s: Vec<usize> = pick.iter().map(|&j| coords[j]).collect();
            let eig = SymmetricEigen::new(h.select_rows(&s).select_columns(&s));
            for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
                for sign in [1.0, -1.0] {
                    let v: Vec<f64> = eig.eigenvectors.column(c).iter().map(|x| sign * x).collect();
                    if !s.iter().zip(&v).all(|(&i, &vi)| sign_ok(k.tags[i], vi)) {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| lambda < b.0) {
                        let mut w = vec![0.0; k.dim()];
                        for (&i, &vi) in s.iter().zip(&v) {
                            w[i] = vi;
                        }
                        best = Some((lambda, w));
                    }
                }
            }
        }
    }
    best
}

/// Positive curvature of ∇²_yy f over the critical cone K \ {0}.
pub fn check_sosc_box(prob: &BilevelProblem, point: &EvalPoint) -> Result<SoscCheck> {
    require_small(prob.m)?;
    require_stationary(prob, point)?;
    let so = second_order(prob, point)?;
    let k = critical_cone(&prob.y_box, &point.y, &so.gradient)?;
    let tol = 1e-10 * so.hessian.norm().max(1.0);
    Ok(match min_quadratic_on_cone(&so.hessian, &k) {
        None => SoscCheck { verdict: Verdict::Holds, critical_cone: k, min_curvature: None, worst_direction: None },
        Some((val, w)) => SoscCheck {
            verdict: Verdict::from_bool(val > tol),
            critical_cone: k,
            min_curvature: Some(val),
            worst_direction: Some(w),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvbCheck {
    pub verdict: Verdict,
    pub critical_cone: SignedCoordinateCone,
    /// Nonzero w ∈ K with −∇²_yy f w ∈ N_K(w), if one exists.
    pub witness: Option<Vec<f64>>,
    pub supports_examined: usize,
}

/// Nonzero solutions of `w ∈ K, −H w ∈ N_K(w)` for a signed coordinate cone K.
///
/// For each set S of sign-constrained coordinates allowed to be nonzero the
/// solutions form a polyhedral cone; any nonzero element of any of them is a
/// witness (coordinates in S that happen to vanish still satisfy (Hw)_i = 0).
pub fn normal_map_kernel(h: &DMatrix<f64>, k: &SignedCoordinateCone) -> Result<(Option<Vec<f64>>, usize)> {
    let m = k.dim();
    let signed: Vec<usize> = (0..m).filter(|&i| matches!(k.tags[i], Tag::NonNeg | Tag::NonPos)).collect();
    let row = |i: usize| -> Vec<f64> { h.row(i).iter().copied().collect() };
    let e = |i: usize, s: f64| -> Vec<f64> {
        let mut v = vec![0.0; m];
        v[i] = s;
        v
    };
    let mut examined = 0;
    for size in 0..=signed.len() {
        for pick in combinations(signed.len(), size) {
            examined += 1;
            let s: Vec<usize> = pick.iter().map(|&j| signed[j]).collect();
            let mut eqs = Vec::new();
            let mut halves = Vec::new();
            for i in 0..m {
                match k.tags[i] {
                    Tag::Zero => eqs.push(e(i, 1.0)),
                    Tag::Free => eqs.push(row(i)),
                    tag => {
                        let sgn = if tag == Tag::NonNeg { 1.0 } else { -1.0 };
                        if s.contains(&i) {
                            eqs.push(row(i));
                            halves.push(e(i, -sgn));
                        } else {
                            eqs.push(e(i, 1.0));
                            halves.push(row(i).iter().map(|v| -sgn * v).collect());
                        }
                    }
                }
            }
            let cone = PolyCone::from_halfspaces(m, halves, eqs)?;
            if let Some(g) = cone.generators.iter().find(|g| norm(g) > 1e-12) {
                return Ok((normalized(g), examined));
            }
        }
    }
    Ok((None, examined))
}

/// The curvature condition in its normal-map form over the critical cone.
pub fn check_condition_ivb(prob: &BilevelProblem, point: &EvalPoint) -> Result<IvbCheck> {
    require_small(prob.m)?;
    require_stationary(prob, point)?;
    let so = second_order(prob, point)?;
    let k = critical_cone(&prob.y_box, &point.y, &so.gradient)?;
    let (witness, supports_examined) = normal_map_kernel(&so.hessian, &k)?;
    Ok(IvbCheck { verdict: Verdict::from_bool(witness.is_none()), critical_cone: k, witness, supports_examined })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub interior_nonsingular: InteriorCheck,
    pub strong_monotonicity: MonotonicityCheck,
    pub sosc: SoscCheck,
    pub condition_ivb: IvbCheck,
    /// Names of the conditions that hold.
    pub certified_by: Vec<String>,
    pub certified: bool,
}

pub fn check_localization(prob: &BilevelProblem, point: &EvalPoint) -> Result<LocalizationReport> {
    let interior_nonsingular = check_interior_nonsingular(prob, point)?;
    let strong_monotonicity = check_strong_monotonicity(prob, point)?;
    let sosc = check_sosc_box(prob, point)?;
    let condition_ivb = check_condition_ivb(prob, point)?;
    let mut certified_by = Vec::new();
    for (name, v) in [
        ("interior-nonsingular", interior_nonsingular.verdict),
        ("strong-monotonicity", strong_monotonicity.verdict),
        ("sosc", sosc.verdict),
        ("normal-map", condition_ivb.verdict),
    ] {
        if v.holds() {
            certified_by.push(name.to_string());
        }
    }
    Ok(LocalizationReport {
        certified: !certified_by.is_empty(),
        interior_nonsingular,
        strong_monotonicity,
        sosc,
        condition_ivb,
        certified_by,
    })
}

/// `{u : ⟨n_i, u⟩ > 0 ∀ i}`; the whole space when there are no normals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCone {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    /// The competing minimizer each normal comes from.
    pub competitors: Vec<Vec<f64>>,
    pub empty: bool,
    /// A unit direction with slack ≥ STRICT_SLACK, when one was found.
    pub witness: Option<Vec<f64>>,
}

impl DirectionCone {
    pub fn full(dim: usize) -> DirectionCone {
        let mut w = vec![0.0; dim];
        if dim > 0 {
            w[0] = 1.0;
        }
        DirectionCone { dim, normals: vec![], competitors: vec![], empty: false, witness: Some(w) }
    }

    pub fn is_full(&self) -> bool {
        self.normals.is_empty()
    }

    /// Smallest ⟨n_i, u⟩ (infinite for the full space).
    pub fn slack(&self, u: &[f64]) -> f64 {
        self.normals.iter().map(|n| dot(n, u)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim && self.slack(u) >= STRICT_SLACK
    }

    /// `count` directions spread over the cone. In one dimension the only
    /// unit directions are ±1, so magnitudes k·2/count are used instead.
    pub fn scan(&self, count: usize) -> Vec<Vec<f64>> {
        if self.empty || count == 0 {
            return vec![];
        }
        if self.dim == 1 {
            let signs: Vec<f64> = [1.0, -1.0].into_iter().filter(|s| self.contains(&[*s])).collect();
            let per = count.div_ceil(signs.len().max(1));
            return signs
                .iter()
                .flat_map(|s| (1..=per).map(move |k| vec![s * 2.0 * k as f64 / per as f64]))
                .take(count)
                .collect();
        }
        let inside: Vec<Vec<f64>> = sphere_samples(self.dim, 7).into_iter().filter(|u| self.contains(u)).collect();
        if inside.len() <= count {
            return inside;
        }
        (0..count).map(|k| inside[k * inside.len() / count].clone()).collect()
    }
}

fn sphere_samples(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    match dim {
        1 => out.extend([vec![1.0], vec![-1.0]]),
        2 => out.extend((0..720).map(|k| {
            let a = k as f64 * std::f64::consts::PI / 360.0;
            vec![a.cos(), a.sin()]
        })),
        3 => {
            // Fibonacci sphere.
            let n = 4000;
            let g = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..n {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                out.push(vec![r * (g * k as f64).cos(), r * (g * k as f64).sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..4000 {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if let Some(u) = normalized(&v) {
                    out.push(u);
                }
            }
        }
    }
    out
}

/// Strict feasibility of `⟨n_i, u⟩ > 0`, searched over unit vectors.
pub fn strict_cone(dim: usize, normals: Vec<Vec<f64>>, competitors: Vec<Vec<f64>>) -> DirectionCone {
    if normals.is_empty() {
        return DirectionCone::full(dim);
    }
    let mut cands = sphere_samples(dim, 7);
    let units: Vec<Vec<f64>> = normals.iter().filter_map(|n| normalized(n)).collect();
    cands.extend(units.iter().cloned());
    let sum: Vec<f64> = (0..dim).map(|j| units.iter().map(|u| u[j]).sum()).collect();
    if let Some(s) = normalized(&sum) {
        cands.push(s);
    }
    let score = |u: &Vec<f64>| normals.iter().map(|n| dot(n, u)).fold(f64::INFINITY, f64::min);
    let best = cands.iter().max_by(|a, b| score(a).partial_cmp(&score(b)).unwrap()).cloned();
    let witness = best.filter(|u| score(u) >= STRICT_SLACK);
    DirectionCone { dim, empty: witness.is_none(), normals, competitors, witness }
}

fn grad_x(prob: &BilevelProblem, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let d = prob.lower.diff_xy(x, y)?;
    Ok(d.gradient.iter().take(prob.n).copied().collect())
}

/// Distinct minimizers closer than this to ȳ are treated as ȳ itself.
const SAME_POINT: f64 = 1e-4;

fn require_minimizer(prob: &BilevelProblem, x: &[f64], y: &[f64], s: &SolutionSample) -> Result<()> {
    if !prob.y_box.contains(y, 1e-12) {
        return Err(Error::NotInBox(format!("{y:?}")));
    }
    let fy = prob.lower.eval_xy(x, y)?;
    let gap = fy - s.value;
    if gap > 1e-8 * s.value.abs().max(1.0) {
        return Err(Error::NotMinimizer(gap));
    }
    Ok(())
}

/// Directions u along which ȳ beats every other global minimizer to first order.
pub fn admissible_directions(prob: &BilevelProblem, xbar: &[f64], ybar: &[f64], grid: &GridSpec) -> Result<DirectionCone> {
    let s = solve_lower(prob, xbar, grid)?;
    require_minimizer(prob, xbar, ybar, &s)?;
    let gbar = grad_x(prob, xbar, ybar)?;
    let mut normals = Vec::new();
    let mut competitors = Vec::new();
    for y in s.minimizers.iter().filter(|y| dist(y, ybar) > SAME_POINT) {
        let g = grad_x(prob, xbar, y)?;
        normals.push(g.iter().zip(&gbar).map(|(a, b)| a - b).collect());
        competitors.push(y.clone());
    }
    Ok(strict_cone(prob.n, normals, competitors))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfCompactnessEvidence {
    pub verdict: Verdict,
    pub alpha: f64,
    /// Half-width of the window Ω the sublevel sets must stay inside.
    pub window: f64,
    /// Half-width of the larger probe window that is actually searched.
    pub probe_window: f64,
    pub margin: f64,
    pub samples: usize,
    /// Largest |y_i| seen in a sampled sublevel set.
    pub max_extent: f64,
    /// x whose sublevel set came closest to escaping.
    pub worst_x: Vec<f64>,
    pub heuristic: bool,
}

/// Probe window = this factor × evidence window.
pub const PROBE_FACTOR: f64 = 100.0;
pub const INF_COMPACT_BALL: f64 = 1e-2;

fn inf_compact_samples(xbar: &[f64]) -> Vec<Vec<f64>> {
    let n = xbar.len();
    let mut out = vec![xbar.to_vec()];
    for k in 0..4 {
        let r = INF_COMPACT_BALL * 0.5f64.powi(k);
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut x = xbar.to_vec();
                x[i] += s * r;
                out.push(x);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some(u) = normalized(&v) {
            let r = INF_COMPACT_BALL * rng.gen_range(0.0..1.0);
            out.push(xbar.iter().zip(&u).map(|(a, b)| a + r * b).collect());
        }
    }
    out
}

/// Heuristic evidence that `{y ∈ Y : f(x, y) ≤ α}` stays in one bounded
/// window for x near x̄, with α = V(x̄) + level_margin. Sublevel sets are
/// searched in a window `PROBE_FACTOR` times larger than `window`; the
/// evidence holds when every sampled set stays 10 % of `window` inside it.
pub fn check_inf_compactness(
    prob: &BilevelProblem,
    xbar: &[f64],
    window: f64,
    level_margin: f64,
) -> Result<InfCompactnessEvidence> {
    if xbar.len() != prob.n {
        return Err(Error::Dimension("x̄ length differs from n".into()));
    }
    let base = GridSpec::for_problem(prob);
    let base = GridSpec { window: prob.y_box.window(window), ..base };
    let alpha = solve_lower(prob, xbar, &base)?.value + level_margin;
    let probe = GridSpec { window: prob.y_box.window(window * PROBE_FACTOR), ..base.clone() };
    let margin = 0.1 * window;
    let pts = grid_points(&probe.window, probe.resolution);
    let samples = inf_compact_samples(xbar);
    let extents: Vec<(f64, Vec<f64>)> = samples
        .par_iter()
        .map(|x| {
            let mut ext: f64 = 0.0;
            for y in &pts {
                if prob.lower.eval_xy(x, y)? <= alpha {
                    ext = ext.max(y.iter().fold(0.0, |a, v| a.max(v.abs())));
                }
            }
            let s = solve_lower(prob, x, &probe)?;
            if s.value <= alpha {
                for y in &s.minimizers {
                    ext = ext.max(y.iter().fold(0.0, |a, v| a.max(v.abs())));
                }
            }
            if s.boundary_flag && s.value <= alpha {
                ext = f64::INFINITY;
            }
            Ok((ext, x.clone()))
        })
        .collect::<Result<_>>()?;
    let (max_extent, worst_x) = extents
        .into_iter()
        .fold((0.0, xbar.to_vec()), |acc, e| if e.0 > acc.0 { e } else { acc });
    // Coordinates bounded by Y itself never escape.
    let limit: f64 = (0..prob.m)
        .map(|i| {
            let (lo, hi) = (prob.y_box.lower[i], prob.y_box.upper[i]);
            if lo.is_finite() && hi.is_finite() {
                f64::INFINITY
            } else {
                window - margin
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok(InfCompactnessEvidence {
        verdict: Verdict::from_bool(max_extent <= limit),
        alpha,
        window,
        probe_window: window * PROBE_FACTOR,
        margin,
        samples: samples.len(),
        max_extent,
        worst_x,
        heuristic: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalInnerSemicont {
    pub verdict: Verdict,
    /// Per direction, `min_{y ∈ S(x̄ + t_k d')} ‖y − ȳ‖` for each t_k.
    pub distances: Vec<Vec<f64>>,
    pub final_distance: f64,
    pub max_distance: f64,
    pub samples: usize,
}

pub const ISC_TOL: f64 = 1e-3;

/// Along the schedule, is there always a lower-level solution converging to ȳ?
pub fn check_inner_semicontinuity_empirical(
    prob: &BilevelProblem,
    xbar: &[f64],
    ybar: &[f64],
    sched: &SamplingSchedule,
    grid: &GridSpec,
) -> Result<EmpiricalInnerSemicont> {
    let s0 = solve_lower(prob, xbar, grid)?;
    require_minimizer(prob, xbar, ybar, &s0)?;
    let distances: Vec<Vec<f64>> = sched
        .directions
        .par_iter()
        .map(|d| {
            sched
                .t_values
                .iter()
                .map(|t| {
                    let x: Vec<f64> = xbar.iter().zip(d).map(|(a, b)| a + t * b).collect();
                    let s = solve_lower(prob, &x, grid)?;
                    Ok(s.minimizers.iter().map(|y| dist(y, ybar)).fold(f64::INFINITY, f64::min))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let final_distance = distances.iter().map(|d| *d.last().unwrap()).fold(0.0, f64::max);
    let max_distance = distances.iter().flatten().copied().fold(0.0, f64::max);
    Ok(EmpiricalInnerSemicont {
        verdict: Verdict::from_bool(final_distance <= ISC_TOL),
        samples: distances.iter().map(Vec::len).sum(),
        distances,
        final_distance,
        max_distance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSemicontReport {
    pub solution_set: Vec<Vec<f64>>,
    pub singleton: bool,
    pub inf_compactness: InfCompactnessEvidence,
    pub admissible: DirectionCone,
    pub direction: Option<Vec<f64>>,
    pub empirical: Option<EmpiricalInnerSemicont>,
}

/// Solution set, inf-compactness evidence and admissible cone at (x̄, ȳ),
/// plus an empirical check along `u` when given.
pub fn inner_semicontinuity_report(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: Option<&[f64]>,
    grid: &GridSpec,
) -> Result<InnerSemicontReport> {
    prob.check_point(point)?;
    let s = solve_lower(prob, &point.x, grid)?;
    let admissible = admissible_directions(prob, &point.x, &point.y, grid)?;
    let inf_compactness = check_inf_compactness(prob, &point.x, crate::problems::DEFAULT_WINDOW, 0.5)?;
    let empirical = match u {
        Some(u) => Some(check_inner_semicontinuity_empirical(
            prob,
            &point.x,
            &point.y,
            &SamplingSchedule::default_for(u),
            grid,
        )?),
        None => None,
    };
    Ok(InnerSemicontReport {
        singleton: s.minimizers.len() == 1,
        solution_set: s.minimizers,
        inf_compactness,
        admissible,
        direction: u.map(<[f64]>::to_vec),
        empirical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, solve_y0, BoxSet};

    #[test]
    fn cone_scan_stays_inside() {
        let half = strict_cone(1, vec![vec![-1.0]], vec![vec![0.0]]);
        let s = half.scan(21);
        assert_eq!(s.len(), 21);
        assert!(s.iter().all(|u| u[0] < 0.0) && (s[20][0] + 2.0).abs() < 1e-12);
        assert_eq!(DirectionCone::full(1).scan(4), vec![vec![1.0], vec![2.0], vec![-1.0], vec![-2.0]]);
        let wedge = strict_cone(2, vec![vec![-1.0, -1.0]], vec![vec![0.0]]);
        let s = wedge.scan(21);
        assert_eq!(s.len(), 21);
        assert!(s.iter().all(|u| u[0] + u[1] < 0.0));
    }

    fn pt(x: f64, y: f64) -> EvalPoint {
        EvalPoint::new(vec![x], vec![y])
    }

    #[test]
    fn interior_nonsingular_examples() {
        let p = builtin("mirrlees").unwrap();
        let c = check_interior_nonsingular(&p, &pt(1.0, solve_y0())).unwrap();
        assert!(c.verdict.holds());
        assert!((c.min_singular_value - 1.70038).abs() < 1e-4);
        let t = builtin("toy-convex").unwrap();
        assert!((check_interior_nonsingular(&t, &pt(1.0, 1.0)).unwrap().min_singular_value - 2.0).abs() < 1e-12);
        let cubic = BilevelProblem::new("c", 1, 1, "0", "y1^3", &[], BoxSet::unbounded(1)).unwrap();
        assert_eq!(check_interior_nonsingular(&cubic, &pt(0.0, 0.0)).unwrap().verdict, Verdict::Fails);
        assert!(matches!(check_interior_nonsingular(&t, &pt(1.0, 2.0)), Err(Error::NotStationary(_))));
    }

    #[test]
    fn monotonicity_examples() {
        let t = builtin("toy-convex").unwrap();
        let c = check_strong_monotonicity(&t, &pt(1.0, 1.0)).unwrap();
        assert_eq!(c.mu, Some(2.0));
        assert!(c.pointwise_only);
        let single = BilevelProblem::new("s", 1, 1, "0", "-y1^2", &[], BoxSet::interval(0.0, 0.0).unwrap()).unwrap();
        let c = check_strong_monotonicity(&single, &pt(0.0, 0.0)).unwrap();
        assert!(c.verdict.holds() && c.mu.is_none() && !c.pointwise_only);
    }

    #[test]
    fn sosc_examples() {
        let p = builtin("mirrlees").unwrap();
        assert!(check_sosc_box(&p, &pt(1.0, solve_y0())).unwrap().verdict.holds());
        let neg = BilevelProblem::new("n", 1, 1, "0", "-y1^2", &[], BoxSet::interval(-1.0, 1.0).unwrap()).unwrap();
        let c = check_sosc_box(&neg, &pt(0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Fails);
        assert_eq!(c.worst_direction.unwrap()[0].abs(), 1.0);
    }

    #[test]
    fn copositivity_on_orthant_is_exact() {
        // Indefinite on ℝ² but copositive on ℝ²₊.
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let k = SignedCoordinateCone::new(vec![Tag::NonNeg, Tag::NonNeg]);
        let (v, w) = min_quadratic_on_cone(&h, &k).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v} {w:?}");
        let k = SignedCoordinateCone::new(vec![Tag::NonNeg, Tag::NonPos]);
        assert!((min_quadratic_on_cone(&h, &k).unwrap().0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ivb_examples() {
        // Vertex with both gradient components nonzero: K = {0}.
        let v = BilevelProblem::new(
            "v",
            1,
            2,
            "0",
            "y1 + y2 - y1*y2",
            &[],
            BoxSet::new(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let c = check_condition_ivb(&v, &EvalPoint::new(vec![0.0], vec![0.0, 0.0])).unwrap();
        assert!(c.critical_cone.is_zero() && c.verdict.holds());
        let t = builtin("toy-convex").unwrap();
        assert!(check_condition_ivb(&t, &pt(1.0, 1.0)).unwrap().verdict.holds());
        let cubic = BilevelProblem::new("c", 1, 1, "0", "y1^3", &[], BoxSet::unbounded(1)).unwrap();
        let c = check_condition_ivb(&cubic, &pt(0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Fails);
        assert_eq!(c.witness.unwrap()[0].abs(), 1.0);
        // Negative curvature with K = ℝ: −Hw ∈ N_K(w) = {0} forces w = 0.
        let neg = BilevelProblem::new("n", 1, 1, "0", "-y1^2", &[], BoxSet::unbounded(1)).unwrap();
        assert!(check_condition_ivb(&neg, &pt(0.0, 0.0)).unwrap().verdict.holds());
    }

    #[test]
    fn ivb_sign_constrained_witness() {
        // K = ℝ₊, H = 0 on it: w = 1 with −Hw = 0 ∈ N_K(1).
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 3.0]);
        let k = SignedCoordinateCone::new(vec![Tag::NonNeg, Tag::Zero]);
        let (w, _) = normal_map_kernel(&h, &k).unwrap();
        assert_eq!(w.unwrap(), vec![1.0, 0.0]);
        // H = 1 on ℝ₊: w > 0 gives Hw ≠ 0; w = 0 only.
        let h = DMatrix::from_row_slice(1, 1, &[1.0]);
        let (w, n) = normal_map_kernel(&h, &SignedCoordinateCone::new(vec![Tag::NonNeg])).unwrap();
        assert!(w.is_none() && n == 2);
    }

    #[test]
    fn admissible_examples() {
        let y0 = solve_y0();
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let c = admissible_directions(&p, &[1.0], &[y0], &g).unwrap();
        assert_eq!(c.normals.len(), 1);
        assert!(c.normals[0][0] < 0.0);
        assert!(c.contains(&[-1.0]) && !c.contains(&[1.0]));
        let mm = builtin("modified-mirrlees").unwrap();
        let c = admissible_directions(&mm, &[0.5, 0.5], &[y0], &GridSpec::for_problem(&mm)).unwrap();
        let n = &c.normals[0];
        assert!((n[0] - n[1]).abs() < 1e-12 && n[0] < 0.0);
        assert!(c.contains(&[-1.0, 0.5]) && !c.contains(&[1.0, -0.5]));
        let t = builtin("toy-convex").unwrap();
        assert!(admissible_directions(&t, &[1.0], &[1.0], &GridSpec::for_problem(&t)).unwrap().is_full());
        assert!(matches!(admissible_directions(&p, &[1.0], &[0.0], &g), Err(Error::NotMinimizer(_))));
    }

    #[test]
    fn empty_direction_cone() {
        let c = strict_cone(1, vec![vec![1.0], vec![-1.0]], vec![vec![0.0], vec![0.0]]);
        assert!(c.empty && c.witness.is_none());
        let c = strict_cone(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0]; 2]);
        assert!(!c.empty && c.contains(c.witness.as_ref().unwrap()));
    }

    #[test]
    fn inf_compactness_examples() {
        let p = builtin("mirrlees").unwrap();
        let e = check_inf_compactness(&p, &[1.0], 10.0, 0.5).unwrap();
        assert!(e.verdict.holds() && e.max_extent < 3.0, "{e:?}");
        let x = builtin("example-xy-1").unwrap();
        let e = check_inf_compactness(&x, &[0.0], 10.0, 0.5).unwrap();
        assert_eq!(e.verdict, Verdict::Fails, "{e:?}");
        let q = BilevelProblem::new("q", 1, 1, "0", "y1^2", &[], BoxSet::unbounded(1)).unwrap();
        assert!(check_inf_compactness(&q, &[0.0], 10.0, 0.5).unwrap().verdict.holds());
    }

    #[test]
    fn inner_semicontinuity_examples() {
        let y0 = solve_y0();
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let left = check_inner_semicontinuity_empirical(&p, &[1.0], &[y0], &SamplingSchedule::default_for(&[-1.0]), &g)
            .unwrap();
        assert!(left.verdict.holds());
        let right = check_inner_semicontinuity_empirical(&p, &[1.0], &[y0], &SamplingSchedule::default_for(&[1.0]), &g)
            .unwrap();
        assert_eq!(right.verdict, Verdict::Fails);
        assert!((right.final_distance - 2.0 * y0).abs() < 1e-3);
        let t = builtin("toy-convex").unwrap();
        let r = inner_semicontinuity_report(&t, &pt(0.0, 0.0), Some(&[1.0]), &GridSpec::for_problem(&t)).unwrap();
        assert!(r.singleton && r.admissible.is_full() && r.empirical.unwrap().verdict.holds());
    }
}
