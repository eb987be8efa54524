//! Property tests over randomized behaviors and expressions.

use bellpoly::expressions::{parse, render};
use bellpoly::polytopes::{enumerate_vertices, ModelClass};
use bellpoly::random_expression;
use bellpoly::scenario::{Behavior, NUMERIC_TOL};
use bellpoly::Scenario;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random normalized behavior (generally signaling).
fn arbitrary_behavior(n: usize) -> impl Strategy<Value = Behavior> {
    let sc = Scenario::new(n).unwrap();
    proptest::collection::vec(0.01..1.0f64, sc.table_len()).prop_map(move |mut raw| {
        for s in 0..sc.num_settings() {
            let sum: f64 = (0..sc.num_outcomes()).map(|o| raw[sc.index(s, o)]).sum();
            for o in 0..sc.num_outcomes() {
                raw[sc.index(s, o)] /= sum;
            }
        }
        Behavior::from_table(sc, raw, NUMERIC_TOL).unwrap()
    })
}

/// A random mixture of local vertices: no-signaling by construction.
fn local_mixture(n: usize) -> impl Strategy<Value = Behavior> {
    let vs = enumerate_vertices(ModelClass::Local, Scenario::new(n).unwrap()).unwrap();
    let count = vs.len();
    proptest::collection::vec(0.0..1.0f64, count).prop_map(move |weights| {
        let total: f64 = weights.iter().sum();
        let sc = vs.scenario;
        let mut table = vec![0.0; sc.table_len()];
        for (v, w) in vs.vertices().iter().zip(&weights) {
            for (slot, p) in table.iter_mut().zip(v.table()) {
                *slot += (w / total) * p;
            }
        }
        Behavior::from_table(sc, table, NUMERIC_TOL).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// render ∘ parse is the identity on the evaluation semantics; here the
    /// stronger statement that the coefficient vectors agree exactly.
    #[test]
    fn expression_text_round_trip(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let expr = random_expression(&mut rng, 3, "roundtrip");
        let back = parse(&render(&expr)).unwrap().with_scenario(3).unwrap();
        let a = expr.coefficient_vector();
        let b = back.coefficient_vector();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    /// Mixtures of local vertices are no-signaling, and marginalization
    /// commutes on them.
    #[test]
    fn local_mixtures_marginalize_consistently(b in local_mixture(3)) {
        let report = b.no_signaling_report(1e-9);
        prop_assert!(report.is_no_signaling, "deviation {}", report.max_deviation);
        let two_step = b.marginal(&[0, 1]).unwrap().marginal(&[1]).unwrap();
        let direct = b.marginal(&[1]).unwrap();
        for (x, y) in two_step.table().iter().zip(direct.table()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    /// Expression evaluation is linear in the behavior.
    #[test]
    fn evaluation_linear_in_behavior(
        b1 in arbitrary_behavior(3),
        b2 in arbitrary_behavior(3),
    ) {
        // Full-party terms only, so signaling behaviors evaluate too.
        let expr = bellpoly::expressions::builtin("S3", 3).unwrap();
        for q in [0.0, 0.25, 0.5, 1.0] {
            let mixed = b1.mix(&b2, q).unwrap();
            let lhs = expr.evaluate(&mixed).unwrap();
            let rhs = q * expr.evaluate(&b1).unwrap() + (1.0 - q) * expr.evaluate(&b2).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    /// Every local-mixture behavior is accepted by the Local membership LP.
    #[test]
    fn local_mixtures_are_local_members(b in local_mixture(2)) {
        let vs = enumerate_vertices(ModelClass::Local, b.scenario()).unwrap();
        let r = bellpoly::polytopes::membership_in(&b, &vs, 1e-7).unwrap();
        prop_assert!(r.member);
        prop_assert!(r.reconstruction_error.unwrap() <= 1e-9);
    }
}
