//! One test per acceptance criterion. Each prints its status line; run
//! with `--nocapture` to see the lines for passing criteria too.

use tadic_core::acceptance::{run, Outcome};

fn budget() -> u64 {
    std::env::var("TADIC_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(tadic_core::DEFAULT_BUDGET)
}

fn check(id: usize) {
    let status = run(id, budget());
    println!("{}", status.line());
    match status.outcome {
        Outcome::Passed => {}
        Outcome::Skipped => eprintln!("{}", status.line()),
        Outcome::Failed => panic!("{}", status.line()),
    }
}

#[test]
fn criterion_01_polygon_domination() {
    check(1);
}

#[test]
fn criterion_02_slope_recurrence() {
    check(2);
}

#[test]
fn criterion_03_kloosterman_family() {
    check(3);
}

#[test]
fn criterion_04_quadratic_census() {
    check(4);
}

#[test]
fn criterion_05_cubic_genericity_iff() {
    check(5);
}

#[test]
fn criterion_06_extension_ground_field() {
    check(6);
}

#[test]
fn criterion_07_level_two_specialization() {
    check(7);
}

#[test]
fn criterion_08_two_path_consistency() {
    check(8);
}

#[test]
fn criterion_09_trace_formula() {
    check(9);
}

#[test]
fn criterion_10_minor_bridge() {
    check(10);
}

#[test]
fn criterion_11_certification_coherence() {
    check(11);
}
