//! Acceptance suite: one test per validation criterion.
//!
//! Each test prints its `criterion NN name PASS/FAIL (details)` line; run
//! with `cargo test -p circleflow --test acceptance -- --nocapture` to see
//! them.  The same checks back the `circleflow validate` subcommand.

use circleflow::validate;

fn check(f: fn() -> validate::CriterionOutcome) {
    let outcome = f();
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_ot_oracle_equivalence() {
    check(validate::criterion_01_ot_oracle);
}

#[test]
fn criterion_02_metric_axioms() {
    check(validate::criterion_02_metric_axioms);
}

#[test]
fn criterion_03_geodesic_constant_speed() {
    check(validate::criterion_03_constant_speed);
}

#[test]
fn criterion_04_hilbert_transform() {
    check(validate::criterion_04_hilbert);
}

#[test]
fn criterion_05_analytic_energy_anchors() {
    check(validate::criterion_05_energy_anchors);
}

#[test]
fn criterion_06_convexity_suite() {
    check(validate::criterion_06_convexity);
}

#[test]
fn criterion_07_jko_structure() {
    check(validate::criterion_07_jko_structure);
}

#[test]
fn criterion_08_long_time_decay() {
    check(validate::criterion_08_long_time_decay);
}

#[test]
fn criterion_09_error_bound() {
    check(validate::criterion_09_error_bound);
}

#[test]
fn criterion_10_contraction() {
    check(validate::criterion_10_contraction);
}

#[test]
fn criterion_11_inviscid_limit() {
    check(validate::criterion_11_inviscid_limit);
}

#[test]
fn criterion_12_singularity_escape() {
    check(validate::criterion_12_singularity_escape);
}

#[test]
fn criterion_13_cantor_finiteness() {
    check(validate::criterion_13_cantor_finiteness);
}

#[test]
fn criterion_14_weak_form_refinement() {
    check(validate::criterion_14_weak_form);
}

#[test]
fn criterion_15_cross_validation() {
    check(validate::criterion_15_cross_validation);
}
