//! Acceptance criteria, one test per criterion. Each test prints a PASS/FAIL
//! line with its metrics before asserting.

use tiltlab::verify::{self, CriterionOutcome, VerifyConfig};

fn check(outcome: CriterionOutcome) {
    for line in outcome.detail_lines() {
        println!("{line}");
    }
    assert!(outcome.passed, "{}", outcome.summary_line());
}

fn config() -> VerifyConfig {
    VerifyConfig::default()
}

#[test]
fn criterion_1_identity_suite() {
    check(verify::identity_suite(&config()));
}

#[test]
fn criterion_2_derivative_suite() {
    check(verify::derivative_suite(&config()));
}

#[test]
fn criterion_3_order_equivalence() {
    check(verify::order_equivalence(&config()));
}

#[test]
fn criterion_4_typical_set_bound_ledger() {
    check(verify::bound_ledger_suite(&config()));
}

#[test]
fn criterion_5_rate_functions() {
    check(verify::rate_function_suite(&config()));
}

#[test]
fn criterion_6_approximation_fidelity() {
    check(verify::approximation_fidelity(&config()));
}

#[test]
fn criterion_7_markov_hmm_concordance() {
    check(verify::markov_concordance(&config()));
}

#[test]
fn criterion_8_finite_n_rate_corridor() {
    check(verify::rate_corridor(&config()));
}
