//! Sampling verifiers: local equality of S_FO and S, failure of the classical
//! first-order approach, and local optimality for the bilevel program.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::EvalPoint;
use crate::geometry::DirectionalNeighborhood;
use crate::linalg::{dist, norm, normalized};
use crate::lower::{
    cap_directions, solve_lower, stationarity_residual, stationary_in_ball, GridSpec, SamplingSchedule,
    STATIONARY_TOL,
};
use crate::problems::BilevelProblem;

/// Two-sided Hausdorff tolerance for comparing clustered point sets.
pub const SET_TOL: f64 = 1e-4;
pub const DEFAULT_T_COUNT: usize = 40;
pub const DEFAULT_DIRECTIONS: usize = 16;
pub const IMPROVEMENT_TOL: f64 = 1e-9;

pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter().map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Seeded unit vectors in ℝⁿ, starting with ± coordinate axes.
fn unit_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    if n == 1 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Some(u) = normalized(&v) {
            out.push(u);
        }
    }
    out.truncate(count.max(2 * n).min(out.len()));
    out
}

/// Default schedule for a directional neighborhood: `count` geometric
/// t-values from just inside ε down to 1e-6, and `directions` perturbations
/// in the δ-cap (random unit vectors when u = 0).
pub fn neighborhood_schedule(u: &[f64], eps: f64, delta: f64, count: usize, directions: usize) -> SamplingSchedule {
    let dirs = if norm(u) == 0.0 {
        unit_directions(u.len(), directions, 5)
    } else {
        cap_directions(u, delta, directions, 3)
    };
    let longest = dirs.iter().map(|d| norm(d)).fold(0.0, f64::max).max(1e-300);
    let t_max = 0.95 * eps / longest;
    let t_min = 1e-6f64.min(t_max / 2.0);
    let ratio = (t_min / t_max).powf(1.0 / (count.max(2) - 1) as f64);
    let t_values = (0..count.max(2)).map(|k| t_max * ratio.powi(k as i32)).collect();
    SamplingSchedule { t_values, directions: dirs }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub x: Vec<f64>,
    pub solutions_in_ball: Vec<Vec<f64>>,
    pub stationary_in_ball: Vec<Vec<f64>>,
    pub hausdorff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub point: EvalPoint,
    pub u: Vec<f64>,
    pub eps_x: f64,
    pub eps_y: f64,
    pub delta: f64,
    pub samples: usize,
    /// Schedule points falling outside the directional neighborhood.
    pub skipped: usize,
    pub verdict: bool,
    pub max_hausdorff: Option<f64>,
    pub worst: Option<EquivalenceWitness>,
}

fn in_ball(pts: &[Vec<f64>], c: &[f64], r: f64) -> Vec<Vec<f64>> {
    pts.iter().filter(|y| dist(y, c) <= r).cloned().collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Does `S_FO(x) ∩ B(ȳ, ε_y) = S(x) ∩ B(ȳ, ε_y) ≠ ∅` on every sampled x in
/// `x̄ + V_{ε_x,δ}(u)`?
#[allow(clippy::too_many_arguments)]
pub fn verify_equivalence(
    prob: &BilevelProblem,
    point: &EvalPoint,
    u: &[f64],
    eps_x: f64,
    eps_y: f64,
    delta: f64,
    sched: &SamplingSchedule,
    grid: &GridSpec,
) -> Result<EquivalenceReport> {
    prob.check_point(point)?;
    if u.len() != prob.n {
        return Err(Error::Dimension("u must have n entries".into()));
    }
    let s0 = solve_lower(prob, &point.x, grid)?;
    if !s0.minimizers.iter().any(|y| dist(y, &point.y) <= 1e-6) {
        let gap = prob.lower.eval_xy(&point.x, &point.y)? - s0.value;
        return Err(Error::NotMinimizer(gap));
    }
    let nb = DirectionalNeighborhood::new(point.x.clone(), eps_x, delta, u.to_vec());
    let mut xs = Vec::new();
    let mut skipped = 0;
    for d in &sched.directions {
        for t in &sched.t_values {
            let x: Vec<f64> = point.x.iter().zip(d).map(|(a, b)| a + t * b).collect();
            if nb.contains(&x) {
                xs.push(x);
            } else {
                skipped += 1;
            }
        }
    }
    let results: Vec<(f64, EquivalenceWitness)> = xs
        .par_iter()
        .map(|x| {
            let s = solve_lower(prob, x, grid)?;
            let sol = in_ball(&s.minimizers, &point.y, eps_y);
            let st = stationary_in_ball(prob, x, grid, &point.y, eps_y)?.points();
            let h = hausdorff(&sol, &st);
            let h = if sol.is_empty() { f64::INFINITY } else { h };
            Ok((h, EquivalenceWitness { x: x.clone(), solutions_in_ball: sol, stationary_in_ball: st, hausdorff: finite(h) }))
        })
        .collect::<Result<_>>()?;
    let worst = results.iter().max_by(|a, b| a.0.partial_cmp(&b.0).unwrap()).cloned();
    let max_h = worst.as_ref().map_or(0.0, |w| w.0);
    let verdict = !results.is_empty() && max_h <= SET_TOL;
    Ok(EquivalenceReport {
        point: point.clone(),
        u: u.to_vec(),
        eps_x,
        eps_y,
        delta,
        samples: results.len(),
        skipped,
        verdict,
        max_hausdorff: finite(max_h),
        worst: if verdict { None } else { worst.map(|w| w.1) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoaWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub upper_value: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoaFailureReport {
    pub point: EvalPoint,
    pub radius: f64,
    pub reference_value: f64,
    pub witness: Option<FoaWitness>,
    /// `F(x̄, ȳ) − F(witness)`.
    pub margin: Option<f64>,
    pub foa_fails: bool,
    pub directions: usize,
    pub steps: usize,
    /// Some continuation track left its search ball (a fold of the surface).
    pub fold_detected: bool,
}

const TRACK_STEPS: usize = 50;
const TRACK_RESOLUTION: usize = 201;

/// Walk the stationary surface from (x̄, ȳ) along rays in x, looking for a
/// SCOP-feasible point inside the (x, y)-ball with a smaller upper value.
pub fn detect_classical_foa_failure(
    prob: &BilevelProblem,
    point: &EvalPoint,
    radius: f64,
    grid: &GridSpec,
) -> Result<FoaFailureReport> {
    prob.check_point(point)?;
    let r0 = stationarity_residual(prob, &point.x, &point.y)?;
    if r0 > 1e-8 {
        return Err(Error::NotStationary(r0));
    }
    let f_ref = prob.upper.evaluate(point)?;
    let count = match prob.n {
        1 => 2,
        2 => 64,
        _ => 200,
    };
    let dirs = if prob.n == 2 {
        (0..count)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        unit_directions(prob.n, count, 9)
    };
    let local = GridSpec { resolution: TRACK_RESOLUTION, ..grid.clone() };
    let step = radius / TRACK_STEPS as f64;
    let tracks: Vec<(Option<FoaWitness>, bool)> = dirs
        .par_iter()
        .map(|d| {
            let mut y = point.y.clone();
            let mut best: Option<FoaWitness> = None;
            let mut fold = false;
            for k in 1..=TRACK_STEPS {
                let x: Vec<f64> = point.x.iter().zip(d).map(|(a, b)| a + k as f64 * step * b).collect();
                let search = (radius / 5.0).max(1e-3);
                let pts = stationary_in_ball(prob, &x, &local, &y, search)?.points();
                let Some(next) = pts.into_iter().min_by(|a, b| dist(a, &y).partial_cmp(&dist(b, &y)).unwrap()) else {
                    fold = true;
                    break;
                };
                y = next;
                let dx = norm(&x.iter().zip(&point.x).map(|(a, b)| a - b).collect::<Vec<_>>());
                if (dx * dx + dist(&y, &point.y).powi(2)).sqrt() > radius {
                    break;
                }
                if prob.constraints.iter().any(|g| g.eval_xy(&x, &y).map_or(true, |v| v > 1e-9)) {
                    continue;
                }
                let fv = prob.upper.eval_xy(&x, &y)?;
                let res = stationarity_residual(prob, &x, &y)?;
                if res <= STATIONARY_TOL && fv < f_ref - IMPROVEMENT_TOL && best.as_ref().is_none_or(|b| fv < b.upper_value) {
                    best = Some(FoaWitness { x: x.clone(), y: y.clone(), upper_value: fv, residual: res });
                }
            }
            Ok((best, fold))
        })
        .collect::<Result<_>>()?;
    let fold_detected = tracks.iter().any(|t| t.1);
    let witness = tracks
        .into_iter()
        .filter_map(|t| t.0)
        .min_by(|a, b| a.upper_value.partial_cmp(&b.upper_value).unwrap());
    Ok(FoaFailureReport {
        point: point.clone(),
        radius,
        reference_value: f_ref,
        margin: witness.as_ref().map(|w| f_ref - w.upper_value),
        foa_fails: witness.is_some(),
        witness,
        directions: dirs.len(),
        steps: TRACK_STEPS,
        fold_detected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub radius: f64,
    /// `None` for the full ball.
    pub direction: Option<Vec<f64>>,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl NeighborhoodSpec {
    pub fn ball(radius: f64, samples: usize) -> NeighborhoodSpec {
        NeighborhoodSpec { radius, direction: None, delta: 1.0, samples, seed: 17 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMinReport {
    pub verdict: bool,
    pub samples: usize,
    /// Sampled (x, y*) with y* ∈ S(x) near ȳ.
    pub feasible_pairs: usize,
    /// Smallest `F(x, y*) − F(x̄, ȳ)` seen.
    pub min_gap: Option<f64>,
    pub worst: Option<FoaWitness>,
}

fn sample_neighborhood(center: &[f64], spec: &NeighborhoodSpec) -> Vec<Vec<f64>> {
    let n = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nb = spec
        .direction
        .as_ref()
        .map(|u| DirectionalNeighborhood::new(center.to_vec(), spec.radius, spec.delta, u.clone()));
    let mut out = Vec::with_capacity(spec.samples);
    let mut guard = 0usize;
    while out.len() < spec.samples && guard < 1000 * spec.samples.max(1) {
        guard += 1;
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * spec.radius).collect();
        if norm(&h) >= spec.radius {
            continue;
        }
        let x: Vec<f64> = center.iter().zip(&h).map(|(a, b)| a + b).collect();
        if nb.as_ref().is_none_or(|nb| nb.contains(&x)) {
            out.push(x);
        }
    }
    out
}

/// Sampled local optimality of (x̄, ȳ) for the bilevel program.
pub fn verify_bilevel_local_min(
    prob: &BilevelProblem,
    point: &EvalPoint,
    spec: &NeighborhoodSpec,
    grid: &GridSpec,
) -> Result<LocalMinReport> {
    prob.check_point(point)?;
    let f_ref = prob.upper.evaluate(point)?;
    let xs = sample_neighborhood(&point.x, spec);
    let found: Vec<Vec<(f64, FoaWitness)>> = xs
        .par_iter()
        .map(|x| {
            let s = solve_lower(prob, x, grid)?;
            let mut out = Vec::new();
            for y in s.minimizers.iter().filter(|y| dist(y, &point.y) <= spec.radius) {
                if prob.constraints.iter().any(|g| g.eval_xy(x, y).map_or(true, |v| v > 1e-9)) {
                    continue;
                }
                let fv = prob.upper.eval_xy(x, y)?;
                out.push((fv - f_ref, FoaWitness { x: x.clone(), y: y.clone(), upper_value: fv, residual: 0.0 }));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(f64, FoaWitness)> = found.into_iter().flatten().collect();
    let worst = pairs.iter().min_by(|a, b| a.0.partial_cmp(&b.0).unwrap()).cloned();
    let min_gap = worst.as_ref().map(|w| w.0);
    let verdict = !pairs.is_empty() && min_gap.is_some_and(|g| g >= -IMPROVEMENT_TOL);
    Ok(LocalMinReport {
        verdict,
        samples: xs.len(),
        feasible_pairs: pairs.len(),
        min_gap,
        worst: if verdict { None } else { worst.map(|w| w.1) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, solve_y0};

    #[test]
    fn mirrlees_equivalence_is_directional() {
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let pt = EvalPoint::new(vec![1.0], vec![solve_y0()]);
        let s = neighborhood_schedule(&[-1.0], 0.3, 0.5, 20, 4);
        let left = verify_equivalence(&p, &pt, &[-1.0], 0.3, 0.4, 0.5, &s, &g).unwrap();
        assert!(left.verdict && left.samples == 80, "{left:?}");
        let s = neighborhood_schedule(&[1.0], 0.3, 0.5, 20, 4);
        let right = verify_equivalence(&p, &pt, &[1.0], 0.3, 0.4, 0.5, &s, &g).unwrap();
        assert!(!right.verdict);
        let w = right.worst.unwrap();
        assert!(w.x[0] > 1.0 && w.solutions_in_ball.is_empty() && w.stationary_in_ball.len() == 1);
    }

    #[test]
    fn convex_equivalence_in_full_ball() {
        let t = builtin("toy-convex").unwrap();
        let g = GridSpec::for_problem(&t);
        let s = neighborhood_schedule(&[0.0], 0.5, 0.5, 10, 4);
        let r = verify_equivalence(&t, &EvalPoint::new(vec![1.0], vec![1.0]), &[0.0], 0.5, 1.0, 0.5, &s, &g).unwrap();
        assert!(r.verdict && r.samples == 20);
    }

    #[test]
    fn foa_failures() {
        let y0 = solve_y0();
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let r = detect_classical_foa_failure(&p, &EvalPoint::new(vec![1.0], vec![y0]), 0.1, &g).unwrap();
        assert!(r.foa_fails && r.witness.as_ref().unwrap().x[0] > 1.0);
        let mm = builtin("modified-mirrlees").unwrap();
        let r = detect_classical_foa_failure(&mm, &EvalPoint::new(vec![0.5, 0.5], vec![y0]), 0.05, &GridSpec::for_problem(&mm))
            .unwrap();
        let w = r.witness.expect("witness");
        assert!(w.y[0] < y0 && w.residual <= 1e-9);
        assert!(w.upper_value < r.reference_value - 1e-9);
        let t = builtin("toy-convex").unwrap();
        let r = detect_classical_foa_failure(&t, &EvalPoint::new(vec![1.0], vec![1.0]), 0.1, &GridSpec::for_problem(&t))
            .unwrap();
        assert!(!r.foa_fails);
    }

    #[test]
    fn local_min_sampling() {
        let y0 = solve_y0();
        let p = builtin("mirrlees").unwrap();
        let g = GridSpec::for_problem(&p);
        let r = verify_bilevel_local_min(&p, &EvalPoint::new(vec![1.0], vec![y0]), &NeighborhoodSpec::ball(0.05, 200), &g)
            .unwrap();
        assert!(r.verdict && r.feasible_pairs > 50, "{r:?}");
        // A point on the optimal branch that is not optimal.
        let s = solve_lower(&p, &[0.5], &g).unwrap();
        let bad = EvalPoint::new(vec![0.5], s.minimizers[0].clone());
        let r = verify_bilevel_local_min(&p, &bad, &NeighborhoodSpec::ball(0.05, 200), &g).unwrap();
        assert!(!r.verdict && r.worst.unwrap().x[0] > 0.5);
    }

    #[test]
    fn hausdorff_distance() {
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert!(hausdorff(&[vec![0.0]], &[]).is_infinite());
        assert_eq!(hausdorff(&[vec![0.0], vec![1.0]], &[vec![0.0]]), 1.0);
    }
}
