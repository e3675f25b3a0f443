//! Graph-of-normal-cone calculus against the Fréchet sampling oracle.

mod common;

use common::cone_suite::*;
use bdfoa_core::geometry::limiting_graph_normal_interval;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn limiting_interval_cases_match_oracle() {
    assert_eq!(limiting_interval_suite(1, 20), Ok(100));
}

#[test]
fn degenerate_interval_is_a_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for z in [[0.5, -1.0], [0.5, 0.0], [0.5, 2.0]] {
        let ours = limiting_graph_normal_interval(0.5, 0.5, z[0], z[1]).unwrap();
        for zeta in test_vectors(&mut rng) {
            assert_eq!(ours.contains(&zeta, 1e-9), limiting_oracle(0.5, 0.5, z, zeta), "{z:?} {zeta:?}");
        }
    }
}

#[test]
fn directional_interval_cases_match_oracle() {
    let n = directional_interval_suite(2, 3).unwrap();
    assert!(n >= 40, "{n}");
}

#[test]
fn box_cones_are_products_of_interval_oracles() {
    assert_eq!(box_product_suite(3, 200), Ok(200));
}

#[test]
fn convex_directional_normal_matches_nearby_normals() {
    assert_eq!(convex_formula_suite(6, 200), Ok(200));
}

fn generators() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..=3).prop_flat_map(|dim| {
        (Just(dim), prop::collection::vec(prop::collection::vec(-3i32..=3, dim), 1..=5))
            .prop_map(|(d, g)| (d, g.into_iter().map(|v| v.into_iter().map(f64::from).collect()).collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn polar_is_an_involution((dim, gens) in generators()) {
        let r = polar_involution(dim, gens);
        prop_assert!(r.is_ok(), "{r:?}");
    }
}
