//! Randomized property suites for the divergence routines: structural
//! inequalities that must hold on every instance, checked on seeded random
//! two-qubit pairs with a uniform numerical slack.

mod common;

use common::*;
use hsd::divergence::{hs_classical, hs_measured, DivergenceQuery};
use hsd::MeasurementClass;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const INSTANCES: usize = 50;

#[test]
fn gamma_monotonicity_holds() {
    suite_gamma_monotonicity(11, INSTANCES).assert_clean();
}

#[test]
fn triangle_inequality_holds() {
    suite_triangle(12, INSTANCES).assert_clean();
}

#[test]
fn joint_convexity_holds() {
    suite_convexity(13, INSTANCES).assert_clean();
}

#[test]
fn gamma_reflection_matches_direct_low_gamma() {
    suite_reflection(14, INSTANCES).assert_clean();
}

#[test]
fn e1_bridge_holds() {
    suite_bridge(15, INSTANCES).assert_clean();
}

#[test]
fn dpi_under_local_unitaries() {
    suite_dpi_local_unitaries(16, INSTANCES).assert_clean();
}

#[test]
fn dpi_under_ancilla_trace() {
    suite_dpi_ancilla_trace(17, INSTANCES).assert_clean();
}

#[test]
fn contraction_bound_holds() {
    suite_contraction(18, INSTANCES).assert_clean();
}

#[test]
fn measurement_classes_are_ordered() {
    suite_class_ordering(19, INSTANCES).assert_clean();
}

#[test]
fn lo_star_meets_ppt_on_extreme_pairs() {
    lo_star_tight_on_extremes().assert_clean();
}

#[test]
fn diagonal_pairs_reduce_to_classical() {
    suite_classical_diagonal(20, 30).assert_clean();
}

#[test]
fn witness_replay_reproduces_values() {
    // The embedded measurement effect must reproduce the reported value
    // when replayed against the query, on every path that returns one.
    let mut rng = StdRng::seed_from_u64(21);
    for k in 0..20 {
        let shape = hsd::BipartiteShape { dim_a: 2, dim_b: 2 };
        let rho = random_density(&mut rng, 4, Some(shape));
        let sigma = random_density(&mut rng, 4, Some(shape));
        let class = if k % 2 == 0 { MeasurementClass::All } else { MeasurementClass::Ppt };
        for gamma in [0.6, 1.0, 1.8] {
            let query = DivergenceQuery::new(rho.clone(), sigma.clone(), gamma, class).unwrap();
            let result = hs_measured(&query).unwrap();
            let replayed = result
                .witness_value(&query)
                .unwrap()
                .expect("state paths always return a witness");
            let slack = if class == MeasurementClass::All { 1e-10 } else { 1e-6 };
            assert!(
                (replayed - result.value).abs() < slack,
                "witness replay {replayed} vs value {} (class {class:?}, gamma {gamma})",
                result.value
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scalar sanity for the classical divergence: bounded by the total
    /// variation shape, zero on identical inputs, monotone in gamma.
    #[test]
    fn classical_divergence_scalar_properties(
        raw_p in proptest::collection::vec(0.01f64..1.0, 4),
        raw_q in proptest::collection::vec(0.01f64..1.0, 4),
        gamma in 1.0f64..4.0,
    ) {
        let norm = |raw: &[f64]| {
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = norm(&raw_p);
        let q = norm(&raw_q);
        let at = |g: f64| hs_classical(&p, &q, g).unwrap();
        prop_assert!(at(gamma) >= -1e-15);
        prop_assert!(at(gamma) <= at(1.0) + 1e-12);
        prop_assert!(hs_classical(&p, &p, gamma).unwrap().abs() < 1e-12);
        prop_assert!(at(gamma + 0.5) <= at(gamma) + 1e-12);
    }

    /// Reflection identity for the classical formula on arbitrary scales.
    #[test]
    fn classical_reflection_identity(
        raw_p in proptest::collection::vec(0.01f64..1.0, 3),
        raw_q in proptest::collection::vec(0.01f64..1.0, 3),
        gamma in 0.1f64..0.99,
    ) {
        let norm = |raw: &[f64]| {
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = norm(&raw_p);
        let q = norm(&raw_q);
        let left = hs_classical(&p, &q, gamma).unwrap();
        let right = gamma * hs_classical(&q, &p, 1.0 / gamma).unwrap();
        prop_assert!((left - right).abs() < 1e-12);
    }
}
