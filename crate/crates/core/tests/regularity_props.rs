use bdfoa_core::lower::{localization_track, GridSpec, SamplingSchedule};
use bdfoa_core::problems::solve_y0;
use bdfoa_core::regularity::{
    admissible_directions, check_condition_ivb, check_localization, check_sosc_box, check_strong_monotonicity,
    Verdict,
};
use bdfoa_core::{builtin, BilevelProblem, BoxSet, EvalPoint};
use proptest::prelude::*;

/// f = ½ yᵀ H y − x₁ y₁ on a box, written out as an expression string.
fn quadratic(h: &[[f64; 2]; 2], bx: BoxSet) -> BilevelProblem {
    let f = format!(
        "0.5*({:?})*y1^2 + ({:?})*y1*y2 + 0.5*({:?})*y2^2 - x1*y1",
        h[0][0], h[0][1], h[1][1]
    );
    BilevelProblem::new("quad", 1, 2, "0", &f, &[], bx).unwrap()
}

fn grad(h: &[[f64; 2]; 2], x: f64, y: [f64; 2]) -> [f64; 2] {
    [h[0][0] * y[0] + h[0][1] * y[1] - x, h[1][0] * y[0] + h[1][1] * y[1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotonicity_modulus_bounds_sampled_pairs(
        a in 0.2f64..3.0, b in 0.2f64..3.0, c in -1.5f64..1.5, seed in 0u64..1000,
    ) {
        // H = Lᵀ L + small shift keeps it symmetric; may or may not be definite.
        let h = [[a * a - 0.5, a * c], [a * c, c * c + b * b - 0.5]];
        let bx = BoxSet::new(vec![-1.0, -2.0], vec![1.0, 0.5]).unwrap();
        let p = quadratic(&h, bx);
        let chk = check_strong_monotonicity(&p, &EvalPoint::new(vec![0.3], vec![0.0, 0.0])).unwrap();
        let mu = chk.mu.unwrap();
        prop_assert!(!chk.pointwise_only);
        prop_assert_eq!(chk.verdict == Verdict::Holds, mu > 1e-8);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut tightest = f64::INFINITY;
        for _ in 0..500 {
            let y: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..0.5)];
            let z: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..0.5)];
            let (gy, gz) = (grad(&h, 0.3, y), grad(&h, 0.3, z));
            let w = [y[0] - z[0], y[1] - z[1]];
            let nw2 = w[0] * w[0] + w[1] * w[1];
            let lhs = (gy[0] - gz[0]) * w[0] + (gy[1] - gz[1]) * w[1];
            prop_assert!(lhs >= mu * nw2 - 1e-9);
            tightest = tightest.min(lhs / nw2);
        }
        // The bound is attained along the bottom eigenvector, so sampling gets close.
        prop_assert!(tightest - mu <= 0.1 * (1.0 + mu.abs()));
    }
}

#[test]
fn degenerate_box_gives_vacuous_modulus() {
    let h = [[-1.0, 0.0], [0.0, -1.0]];
    let p = quadratic(&h, BoxSet::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap());
    let chk = check_strong_monotonicity(&p, &EvalPoint::new(vec![0.0], vec![0.0, 1.0])).unwrap();
    assert_eq!(chk.mu, None);
    assert_eq!(chk.verdict, Verdict::Holds);
}

fn compass(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..16)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 16.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
    }
}

#[test]
fn sosc_gives_single_valued_localization() {
    let y0 = solve_y0();
    let cases = [
        (builtin("toy-convex").unwrap(), EvalPoint::new(vec![1.0], vec![1.0])),
        (builtin("mirrlees").unwrap(), EvalPoint::new(vec![1.0], vec![y0])),
        (builtin("mirrlees").unwrap(), EvalPoint::new(vec![1.0], vec![-y0])),
        (builtin("modified-mirrlees").unwrap(), EvalPoint::new(vec![0.5, 0.5], vec![y0])),
    ];
    for (p, pt) in &cases {
        let sosc = check_sosc_box(p, pt).unwrap();
        assert_eq!(sosc.verdict, Verdict::Holds, "{} {pt:?}", p.name);
        assert!(check_localization(p, pt).unwrap().certified);
        let grid = GridSpec::for_problem(p);
        for u in compass(p.n) {
            // Small enough that the localized solution cannot leave the ball.
            let ts = (0..=16).map(|k| 0.05 * 0.5f64.powi(k)).collect();
            let sched = SamplingSchedule::new(ts, vec![u.clone()]).unwrap();
            let track = localization_track(p, pt, &u, &sched, 0.2, &grid).unwrap();
            assert!(track.single_valued, "{} u={u:?}: {:?}", p.name, track.steps.iter().map(|s| s.points.len()).collect::<Vec<_>>());
            assert!(track.lost_at.is_none());
            assert!(track.lipschitz.is_finite());
        }
    }
}

#[test]
fn ivb_fails_on_degenerate_cubic() {
    let p = BilevelProblem::new("cubic", 1, 1, "0", "y1^3", &[], BoxSet::unbounded(1)).unwrap();
    let chk = check_condition_ivb(&p, &EvalPoint::new(vec![0.0], vec![0.0])).unwrap();
    assert_eq!(chk.verdict, Verdict::Fails);
    assert_eq!(chk.witness.as_ref().map(|w| w[0].abs()), Some(1.0));
    // The strongly convex toy instance passes.
    let t = builtin("toy-convex").unwrap();
    assert_eq!(check_condition_ivb(&t, &EvalPoint::new(vec![1.0], vec![1.0])).unwrap().verdict, Verdict::Holds);
}

/// ∂f/∂x for the mirrlees lower level, by hand.
fn mirrlees_fx(y: f64) -> f64 {
    -(-(y + 1.0).powi(2)).exp()
}

#[test]
fn admissible_normals_are_gradient_differences() {
    let p = builtin("mirrlees").unwrap();
    let y0 = solve_y0();
    let grid = GridSpec::for_problem(&p);
    for ybar in [y0, -y0] {
        let cone = admissible_directions(&p, &[1.0], &[ybar], &grid).unwrap();
        assert_eq!(cone.normals.len(), 1);
        let want = mirrlees_fx(cone.competitors[0][0]) - mirrlees_fx(ybar);
        assert!((cone.normals[0][0] - want).abs() <= 1e-10, "{:?} vs {want}", cone.normals);
        assert!((cone.competitors[0][0] + ybar).abs() <= 1e-6);
        assert!(!cone.empty);
        // The upper branch y₀ is selected when x approaches 1 from below.
        let side = if ybar > 0.0 { -1.0 } else { 1.0 };
        assert!(cone.contains(&[side]) && !cone.contains(&[-side]));
    }
}

#[test]
fn singleton_solution_set_admits_every_direction() {
    let cases = [("toy-convex", vec![1.0], vec![1.0]), ("example-xy3", vec![4.0], vec![-1.0]), ("mirrlees", vec![2.0], vec![])];
    for (name, x, y) in cases {
        let p = builtin(name).unwrap();
        let grid = GridSpec::for_problem(&p);
        let y = if y.is_empty() { bdfoa_core::lower::solve_lower(&p, &x, &grid).unwrap().minimizers[0].clone() } else { y };
        let cone = admissible_directions(&p, &x, &y, &grid).unwrap();
        assert!(cone.is_full(), "{name}");
        for u in compass(p.n) {
            assert!(cone.contains(&u));
        }
    }
}
