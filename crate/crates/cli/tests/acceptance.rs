//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Criteria and tolerances are pinned here independently of the library's
//! own `verify` module; criterion 8 exercises that module directly.

use bellpoly::expressions::builtin;
use bellpoly::optimize::{
    appendix_branch1, appendix_branch2, default_t_grid, maximize, r3_threshold, sweep,
    SearchConfig, BRANCH1_CHI, BRANCH1_GAMMA,
};
use bellpoly::polytopes::{
    bc1_family, bound_over, enumerate_vertices, membership_in, ModelClass, VertexSet,
};
use bellpoly::quantum::{
    born_behavior, broadcast_reproduction, expression_value, ghz_correlation, ghz_state,
    settings_from_params, svetlichny_settings, MeasurementParams,
};
use bellpoly::verify::run_reproduction_suite;
use bellpoly::{random_expression, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[{}] {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

#[test]
fn criterion_1_exact_polytope_bounds() {
    let start = Instant::now();
    let sc3 = Scenario::new(3).unwrap();
    let bl = enumerate_vertices(ModelClass::BL, sc3).unwrap();
    let bc1 = enumerate_vertices(ModelClass::BC1, sc3).unwrap();
    let cases: [(&str, &VertexSet, f64); 10] = [
        ("S3", &bl, 4.0),
        ("S3", &bc1, 4.0),
        ("Sprime", &bl, 1.0),
        ("Sprime", &bc1, 2.0),
        ("I", &bl, 5.0),
        ("I", &bc1, 6.0),
        ("R3", &bc1, 0.0),
        ("R3", &bl, 1.0),
        ("T", &bc1, 2.0),
        ("T", &bl, 4.0),
    ];
    let mut worst = 0.0f64;
    for (name, set, expected) in cases {
        let e = builtin(name, 3).unwrap();
        let value = bound_over(&e, set).unwrap().value;
        worst = worst.max((value - expected).abs());
        assert!(
            (value - expected).abs() <= 1e-9,
            "bound({name}, {}) = {value}, expected {expected}",
            set.label
        );
    }
    let elapsed = start.elapsed();
    report(
        "criterion 1 (exact polytope bounds)",
        worst <= 1e-9 && elapsed.as_secs_f64() < 10.0,
        &format!("10 bounds exact to {worst:.1e}, {elapsed:.2?} (< 10 s)"),
    );
}

#[test]
fn criterion_2_quantum_point_values() {
    let start = Instant::now();
    let (t, params) = svetlichny_settings();
    let state = ghz_state(3, t).unwrap();
    let obs = settings_from_params(&params).unwrap();
    let s3 = expression_value(&builtin("S3", 3).unwrap(), &state, &obs).unwrap();
    let i = expression_value(&builtin("I", 3).unwrap(), &state, &obs).unwrap();
    let root8 = 4.0 * 2.0f64.sqrt();
    let gap = (s3 - root8).abs().max((i - root8 - 0.5).abs());
    let elapsed = start.elapsed();
    report(
        "criterion 2 (quantum point values)",
        gap <= 1e-6 && elapsed.as_secs_f64() < 5.0,
        &format!("S3 = {s3:.9}, I = {i:.9}, gap {gap:.1e}, {elapsed:.2?} (< 5 s)"),
    );
}

#[test]
fn criterion_3_r3_quantum_maximum() {
    let start = Instant::now();
    let r3 = builtin("R3", 3).unwrap();
    let config = SearchConfig {
        restarts: 64,
        seed: 1,
        ..SearchConfig::default()
    };
    let value = maximize(&r3, 3, FRAC_PI_4, &config).unwrap().value;
    let elapsed = start.elapsed();
    report(
        "criterion 3 (R3 quantum maximum)",
        (0.0359..=0.0369).contains(&value) && elapsed.as_secs_f64() < 60.0,
        &format!("max R3 = {value:.6} in [0.0359, 0.0369], {elapsed:.2?} (< 60 s)"),
    );
}

#[test]
fn criterion_4_appendix_oracle_equality() {
    let start = Instant::now();
    let r3 = builtin("R3", 3).unwrap();

    // Branch 1 against the Born rule on a 20-point (t, χ, γ) grid.
    let mut worst = 0.0f64;
    for i in 0..20 {
        let t = 0.05 + (FRAC_PI_4 - 0.05) * i as f64 / 19.0;
        let chi = 0.1 + 0.3 * i as f64;
        let gamma = 0.05 + 0.27 * i as f64;
        let params = MeasurementParams {
            alpha: FRAC_PI_2,
            beta: FRAC_PI_2,
            gamma,
            phi: vec![chi / 3.0; 3],
        };
        let born = expression_value(
            &r3,
            &ghz_state(3, t).unwrap(),
            &settings_from_params(&params).unwrap(),
        )
        .unwrap();
        worst = worst.max((born - appendix_branch1(t, chi, gamma)).abs());
    }
    assert!(worst < 1e-9, "branch-1/Born gap {worst:.2e}");

    let th = r3_threshold();
    assert!((th - 0.6187).abs() <= 1e-3, "threshold {th}");
    assert!(appendix_branch1(th + 0.01, BRANCH1_CHI, BRANCH1_GAMMA) > 0.0);
    assert!(appendix_branch1(th - 0.01, BRANCH1_CHI, BRANCH1_GAMMA) < 0.0);

    let mut min_b2 = f64::INFINITY;
    for i in 1..=13 {
        min_b2 = min_b2.min(appendix_branch2(0.05 * i as f64).unwrap());
    }
    assert!(min_b2 > 0.0, "branch 2 minimum {min_b2}");

    let elapsed = start.elapsed();
    report(
        "criterion 4 (appendix oracle equality)",
        elapsed.as_secs_f64() < 10.0,
        &format!(
            "branch1 gap {worst:.1e} (< 1e-9), threshold {th:.4}, branch2 min {min_b2:.2e} > 0, {elapsed:.2?} (< 10 s)"
        ),
    );
}

#[test]
fn criterion_5_fig2_positivity() {
    let grid = default_t_grid(50);
    for n in 3..=6usize {
        let start = Instant::now();
        let rn = builtin("RN", n).unwrap();
        let config = SearchConfig {
            restarts: 64,
            seed: 1,
            ..SearchConfig::default()
        };
        let curve = sweep(&rn, n, &grid, &config).unwrap();
        let min = curve
            .points
            .iter()
            .filter(|p| p.t >= 0.02)
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min);
        let elapsed = start.elapsed();
        report(
            &format!("criterion 5 (Fig. 2 positivity, n = {n})"),
            min > 0.0 && elapsed.as_secs_f64() < 300.0,
            &format!("min violation over t >= 0.02 is {min:.6} > 0, {elapsed:.2?} (< 5 min)"),
        );
    }
}

#[test]
fn criterion_6_ghz_anonymity() {
    let start = Instant::now();
    for n in 3..=6usize {
        let bc = broadcast_reproduction(n).unwrap();
        let ghz = ghz_correlation(n).unwrap();
        let diff = bc
            .table()
            .iter()
            .zip(ghz.table())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(diff <= 1e-12, "n = {n}: broadcast differs by {diff:.2e}");
    }

    let ghz3 = ghz_correlation(3).unwrap();
    let mermin = builtin("Mermin3", 3).unwrap().evaluate(&ghz3).unwrap();
    assert!((mermin - 4.0).abs() <= 1e-12, "Mermin3 = {mermin}");

    let sc3 = Scenario::new(3).unwrap();
    for first in 0..3usize {
        let family = bc1_family(sc3, first).unwrap();
        let r = membership_in(&ghz3, &family, 1e-7).unwrap();
        assert!(
            r.member && r.reconstruction_error.unwrap() <= 1e-7,
            "GHZ correlation not in BC1 family with first party {}",
            first + 1
        );
    }
    let elapsed = start.elapsed();
    report(
        "criterion 6 (GHZ anonymity)",
        elapsed.as_secs_f64() < 30.0,
        &format!(
            "broadcast equality n=3..6 at 1e-12, Mermin3 = {mermin:.12}, member of all three BC1 families, {elapsed:.2?} (< 30 s)"
        ),
    );
}

#[test]
fn criterion_7_structure_properties() {
    let start = Instant::now();
    let sc3 = Scenario::new(3).unwrap();
    let local = enumerate_vertices(ModelClass::Local, sc3).unwrap();
    let nsbl = enumerate_vertices(ModelClass::NSBL, sc3).unwrap();
    let tobl = enumerate_vertices(ModelClass::TOBL, sc3).unwrap();
    let bl = enumerate_vertices(ModelClass::BL, sc3).unwrap();
    let bc1 = enumerate_vertices(ModelClass::BC1, sc3).unwrap();

    let mut exprs: Vec<_> = ["S3", "Sprime", "I", "R3", "RN", "T", "B", "Mermin3"]
        .iter()
        .map(|name| builtin(name, 3).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100 {
        exprs.push(random_expression(&mut rng, 3, &format!("rand{i}")));
    }
    let mut worst = f64::NEG_INFINITY;
    for e in &exprs {
        let b_local = bound_over(e, &local).unwrap().value;
        let b_nsbl = bound_over(e, &nsbl).unwrap().value;
        let b_tobl = bound_over(e, &tobl).unwrap().value;
        let b_bl = bound_over(e, &bl).unwrap().value;
        let b_bc1 = bound_over(e, &bc1).unwrap().value;
        worst = worst
            .max(b_local - b_nsbl)
            .max(b_nsbl - b_tobl)
            .max(b_tobl - b_bl)
            .max(b_tobl - b_bc1);
    }
    assert!(
        worst <= 1e-9,
        "inclusion chain violated by {worst:.2e} on {} expressions",
        exprs.len()
    );

    for set in [&local, &nsbl, &tobl, &bl, &bc1] {
        for (idx, v) in set.vertices().iter().enumerate() {
            let r = membership_in(v, set, 1e-7).unwrap();
            assert!(
                r.member && r.reconstruction_error.unwrap() <= 1e-7,
                "{} vertex {idx} rejected by its own class",
                set.label
            );
        }
    }

    let (t, params) = svetlichny_settings();
    let behavior = born_behavior(
        &ghz_state(3, t).unwrap(),
        &settings_from_params(&params).unwrap(),
    )
    .unwrap();
    let r = membership_in(&behavior, &bl, 1e-7).unwrap();
    assert!(!r.member, "GHZ at Svetlichny settings must lie outside BL");
    assert!(r.gap > 1e-7, "separating gap {:.2e}", r.gap);
    let cert = r.certificate.as_ref().unwrap();
    for v in bl.vertices() {
        assert!(
            cert.value(v) <= cert.vertex_max + 1e-9,
            "certificate not separating on a BL vertex"
        );
    }
    assert!(cert.value(&behavior) > cert.vertex_max + 1e-7);

    let elapsed = start.elapsed();
    report(
        "criterion 7 (structure properties)",
        elapsed.as_secs_f64() < 120.0,
        &format!(
            "chain slack {worst:.1e} over {} expressions, {} vertices self-member, BL non-membership gap {:.4}, {elapsed:.2?} (< 2 min)",
            exprs.len(),
            local.len() + nsbl.len() + tobl.len() + bl.len() + bc1.len(),
            r.gap
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let first = run_reproduction_suite(1);
    let second = run_reproduction_suite(1);
    let a = first.to_json();
    let b = second.to_json();
    report(
        "criterion 8 (determinism)",
        a.as_bytes() == b.as_bytes() && first.overall_pass,
        &format!(
            "two verify runs (seed 1) produced byte-identical {}-byte JSON reports, overall {}",
            a.len(),
            if first.overall_pass { "PASS" } else { "FAIL" }
        ),
    );
}
