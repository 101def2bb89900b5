//! Acceptance criteria, one test each. Every test prints a PASS/FAIL line
//! and the individual checks before asserting.

use nagaoka_core::reproduce::run_criterion;

fn criterion(id: u8) {
    let outcome = run_criterion(id).expect("known criterion");
    println!("{}", outcome.summary());
    for c in &outcome.checks {
        println!("    [{}] {}: {}", if c.pass { "ok" } else { "fail" }, c.name, c.detail);
    }
    assert!(outcome.pass, "{}", outcome.summary());
}

#[test]
fn criterion_01_ferromagnetic_multiplet() {
    criterion(1);
}

#[test]
fn criterion_02_connectivity_failure() {
    criterion(2);
}

#[test]
fn criterion_03_direct_equals_projected() {
    criterion(3);
}

#[test]
fn criterion_04_perron_frobenius() {
    criterion(4);
}

#[test]
fn criterion_05_norm_resolvent_limit() {
    criterion(5);
}

#[test]
fn criterion_06_doubly_occupied_bound() {
    criterion(6);
}

#[test]
fn criterion_07_holstein_stability() {
    criterion(7);
}

#[test]
fn criterion_08_lang_firsov_consistency() {
    criterion(8);
}

#[test]
fn criterion_09_spin_lowering_positivity() {
    criterion(9);
}

#[test]
fn criterion_10_radiation_stability() {
    criterion(10);
}

#[test]
fn criterion_11_diagonal_perturbations() {
    criterion(11);
}

#[test]
fn criterion_12_grid_positivity() {
    criterion(12);
}
