//! Sampling oracle for normal cones to the graph of N_[a,b], built straight
//! from the definition of Fréchet normals, plus the suites that compare the
//! closed-form cone calculus against it. Shared by the core property tests
//! and the acceptance run.
#![allow(dead_code)]

use bdfoa_core::geometry::{
    directional_graph_normal_interval, directional_normal_convex_box, graph_normal_box, graph_normal_box_pieces,
    graph_pieces_interval, limiting_graph_normal_interval, normal_cone_box, tangent_cone_box, PolyCone,
};
use bdfoa_core::BoxSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

fn d2(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Graph points at distance ≈ r from z, found by projecting a circle onto each piece.
fn graph_near(a: f64, b: f64, z: [f64; 2], r: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for piece in graph_pieces_interval(a, b) {
        for k in 0..64 {
            let th = TAU * k as f64 / 64.0;
            let (py, pxi) = piece.project(z[0] + r * th.cos(), z[1] + r * th.sin());
            let p = [py, pxi];
            let dd = d2(p, z);
            if dd > 1e-3 * r && dd <= 1.01 * r {
                out.push(p);
            }
        }
    }
    out
}

/// ⟨ζ, z' − z⟩ ≤ o(‖z' − z‖) on sampled graph points z' → z.
pub fn frechet(a: f64, b: f64, z: [f64; 2], zeta: [f64; 2]) -> bool {
    let nz = (zeta[0] * zeta[0] + zeta[1] * zeta[1]).sqrt();
    graph_near(a, b, z, 1e-6).iter().all(|p| {
        let d = [p[0] - z[0], p[1] - z[1]];
        let nd = (d[0] * d[0] + d[1] * d[1]).sqrt();
        (zeta[0] * d[0] + zeta[1] * d[1]) / nd <= 1e-7 * nz
    })
}

/// Union of Fréchet cones at z and at graph points near z.
pub fn limiting_oracle(a: f64, b: f64, z: [f64; 2], zeta: [f64; 2]) -> bool {
    frechet(a, b, z, zeta) || graph_near(a, b, z, 1e-4).into_iter().any(|p| frechet(a, b, p, zeta))
}

/// Union of Fréchet cones at graph points z + t w' with w' close to w.
pub fn directional_oracle(a: f64, b: f64, z: [f64; 2], w: [f64; 2], zeta: [f64; 2]) -> bool {
    let nw = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if nw == 0.0 {
        return limiting_oracle(a, b, z, zeta);
    }
    let t = 1e-4;
    let base = w[1].atan2(w[0]);
    for piece in graph_pieces_interval(a, b) {
        for k in -4..=4 {
            let th = base + 2.5e-3 * k as f64;
            let wp = [th.cos(), th.sin()];
            let (py, pxi) = piece.project(z[0] + t * wp[0], z[1] + t * wp[1]);
            let dir = [(py - z[0]) / t, (pxi - z[1]) / t];
            if d2(dir, wp) <= 1e-6 && frechet(a, b, [py, pxi], zeta) {
                return true;
            }
        }
    }
    false
}

pub fn test_vectors(rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut v = vec![
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [1.0, 1.0],
        [1.0, -1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
        [0.0, 0.0],
        [3.0, -0.25],
        [-0.25, 3.0],
    ];
    for _ in 0..8 {
        v.push([rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
        let s = rng.gen_range(-3.0..3.0);
        v.push(if rng.gen_bool(0.5) { [s, 0.0] } else { [0.0, s] });
    }
    v
}

/// The five locations on the graph of N_[a,b].
pub fn cases(a: f64, b: f64, rng: &mut ChaCha8Rng) -> Vec<(&'static str, [f64; 2])> {
    vec![
        ("flat", [a + (b - a) * rng.gen_range(0.1..0.9), 0.0]),
        ("vertical-a", [a, -rng.gen_range(0.1..2.0)]),
        ("vertical-b", [b, rng.gen_range(0.1..2.0)]),
        ("corner-a", [a, 0.0]),
        ("corner-b", [b, 0.0]),
    ]
}

pub type SuiteResult = Result<usize, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Limiting cones at the five kinds of graph points for `pairs` random intervals.
pub fn limiting_interval_suite(seed: u64, pairs: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for _ in 0..pairs {
        let a = rng.gen_range(-3.0..2.0);
        let b = a + rng.gen_range(0.1..3.0);
        for (name, z) in cases(a, b, &mut rng) {
            let ours = limiting_graph_normal_interval(a, b, z[0], z[1]).map_err(|e| e.to_string())?;
            for zeta in test_vectors(&mut rng) {
                let want = limiting_oracle(a, b, z, zeta);
                check(ours.contains(&zeta, 1e-9) == want, || format!("{name} a={a} b={b} ζ={zeta:?}: oracle {want}"))?;
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Directional cones for the eight compass directions at every case.
pub fn directional_interval_suite(seed: u64, pairs: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for _ in 0..pairs {
        let a = rng.gen_range(-3.0..2.0);
        let b = a + rng.gen_range(0.1..3.0);
        for (name, z) in cases(a, b, &mut rng) {
            for k in 0..8 {
                let th = TAU * k as f64 / 8.0;
                let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
                let w = [snap(th.cos()), snap(th.sin())];
                let ours = directional_graph_normal_interval(a, b, z[0], z[1], w).map_err(|e| e.to_string())?;
                for zeta in test_vectors(&mut rng) {
                    let want = directional_oracle(a, b, z, w, zeta);
                    check(ours.contains(&zeta, 1e-9) == want, || {
                        format!("{name} a={a} b={b} w={w:?} ζ={zeta:?}: oracle {want}")
                    })?;
                }
                count += 1;
            }
        }
    }
    Ok(count)
}

pub fn random_box_point(rng: &mut ChaCha8Rng) -> (BoxSet, Vec<f64>, Vec<f64>) {
    let m = rng.gen_range(1..=3);
    let (mut lo, mut hi, mut y, mut xi) = (vec![], vec![], vec![], vec![]);
    for _ in 0..m {
        let a = if rng.gen_bool(0.15) { f64::NEG_INFINITY } else { rng.gen_range(-2.0..0.0) };
        let b = if rng.gen_bool(0.15) { f64::INFINITY } else { rng.gen_range(0.5..2.0) };
        let (yi, xii) = match rng.gen_range(0..5) {
            0 | 1 if a.is_finite() => (a, if rng.gen_bool(0.5) { 0.0 } else { -rng.gen_range(0.1..1.0) }),
            2 | 3 if b.is_finite() => (b, if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.1..1.0) }),
            _ => (0.25, 0.0),
        };
        lo.push(a);
        hi.push(b);
        y.push(yi);
        xi.push(xii);
    }
    (BoxSet::new(lo, hi).unwrap(), y, xi)
}

/// On random boxes: directional ⊆ limiting, w = 0 gives the limiting cone,
/// and membership factorizes into the per-coordinate interval oracles.
pub fn box_product_suite(seed: u64, instances: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let (bx, y, xi) = random_box_point(&mut rng);
        let m = y.len();
        let w: Vec<f64> = (0..2 * m).map(|_| [-1.0, 0.0, 1.0][rng.gen_range(0..3)]).collect();
        let err = |e: bdfoa_core::Error| e.to_string();
        let lim = graph_normal_box(&bx, &y, &xi, None).map_err(err)?;
        let dir = graph_normal_box(&bx, &y, &xi, Some(&w)).map_err(err)?;
        let zero = graph_normal_box_pieces(&bx, &y, &xi, Some(&vec![0.0; 2 * m])).map_err(err)?;
        check(zero == graph_normal_box_pieces(&bx, &y, &xi, None).map_err(err)?, || format!("N(·;0) ≠ N at {y:?}"))?;
        check(lim.contains_union(&dir, 1e-12), || format!("directional ⊄ limiting at {y:?} w={w:?}"))?;
        for _ in 0..10 {
            let zeta: Vec<f64> = (0..2 * m).map(|_| [-1.0, 0.0, 0.5, 2.0][rng.gen_range(0..4)]).collect();
            let coord = |i: usize| [zeta[i], zeta[m + i]];
            let per_lim = (0..m).all(|i| limiting_oracle(bx.lower[i], bx.upper[i], [y[i], xi[i]], coord(i)));
            let per_dir =
                (0..m).all(|i| directional_oracle(bx.lower[i], bx.upper[i], [y[i], xi[i]], [w[i], w[m + i]], coord(i)));
            check(lim.contains(&zeta, 1e-9) == per_lim, || format!("limiting {bx:?} {y:?} {xi:?} ζ={zeta:?}"))?;
            check(dir.contains(&zeta, 1e-9) == per_dir, || format!("directional {bx:?} {y:?} {xi:?} w={w:?} ζ={zeta:?}"))?;
        }
    }
    Ok(instances)
}

/// Convex directional normal N_Y(ȳ; d) against N_Y(ȳ + t d) for small t and
/// against N_Y(ȳ) ∩ {d}^⊥.
pub fn convex_formula_suite(seed: u64, instances: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < instances {
        let (bx, y, _) = random_box_point(&mut rng);
        let m = y.len();
        let d: Vec<f64> = (0..m).map(|_| [-1.0, 0.0, 1.0, 0.5][rng.gen_range(0..4)]).collect();
        let err = |e: bdfoa_core::Error| e.to_string();
        let ours = directional_normal_convex_box(&bx, &y, &d).map_err(err)?;
        let tangent = tangent_cone_box(&bx, &y).map_err(err)?.contains(&d, 0.0);
        check(ours.is_some() == tangent, || format!("d ∈ T mismatch {bx:?} {y:?} {d:?}"))?;
        let Some(ours) = ours else { continue };
        let near: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + 1e-7 * b).collect();
        let oracle = normal_cone_box(&bx, &near).map_err(err)?;
        let base = normal_cone_box(&bx, &y).map_err(err)?;
        for _ in 0..20 {
            let z: Vec<f64> = (0..m).map(|_| [-1.0, 0.0, 1.0, 0.3][rng.gen_range(0..4)]).collect();
            let dot: f64 = z.iter().zip(&d).map(|(a, b)| a * b).sum();
            let mine = ours.contains(&z, 1e-12);
            check(mine == oracle.contains(&z, 0.0), || format!("nearby normal {bx:?} {y:?} d={d:?} z={z:?}"))?;
            check(mine == (base.contains(&z, 0.0) && dot.abs() < 1e-12), || format!("N∩d⊥ {bx:?} {y:?} d={d:?} z={z:?}"))?;
        }
        checked += 1;
    }
    Ok(checked)
}

pub fn polar_involution(dim: usize, gens: Vec<Vec<f64>>) -> Result<(), String> {
    let c = PolyCone::from_generators(dim, gens).map_err(|e| e.to_string())?;
    let p = c.polar().map_err(|e| e.to_string())?;
    let pp = p.polar().map_err(|e| e.to_string())?;
    check(pp.same_set(&c, 1e-8), || format!("C°° ≠ C for {c:?}"))?;
    for g in &c.generators {
        for h in &p.generators {
            let s: f64 = g.iter().zip(h).map(|(a, b)| a * b).sum();
            check(s <= 1e-9, || format!("polar generator not dual: {s}"))?;
        }
    }
    Ok(())
}

/// Random integer-generated cones in dimension 2–3.
pub fn polar_suite(seed: u64, cones: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cones {
        let dim = rng.gen_range(2..=3);
        let k = rng.gen_range(1..=5);
        let gens = (0..k).map(|_| (0..dim).map(|_| rng.gen_range(-3i32..=3) as f64).collect()).collect();
        polar_involution(dim, gens)?;
    }
    Ok(cones)
}
