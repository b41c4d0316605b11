//! One line per acceptance criterion. Run with `--nocapture` to see them.
//! Tolerances live as constants in `locallearn::reproduce`.

use locallearn::reproduce::{criterion, Budget, CriterionResult};

fn run(id: u8) -> CriterionResult {
    let r = criterion(id, Budget::Quick).unwrap();
    println!("{}", r.line());
    r
}

#[test]
fn criterion_01_boolean_census() {
    assert!(run(1).passed);
}

#[test]
fn criterion_02_monotone_census() {
    assert!(run(2).passed);
}

#[test]
fn criterion_03_rate_improvement_table() {
    assert!(run(3).passed);
}

#[test]
fn criterion_04_backprop_optimality() {
    assert!(run(4).passed);
}

#[test]
fn criterion_05_expectation_dynamics() {
    assert!(run(5).passed);
}

#[test]
fn criterion_06_gradient_correctness() {
    assert!(run(6).passed);
}

#[test]
fn criterion_07_supervised_hebb() {
    assert!(run(7).passed);
}

#[test]
fn criterion_08_autoencoder() {
    assert!(run(8).passed);
}

#[test]
fn criterion_09_hopfield_invariance() {
    assert!(run(9).passed);
}

#[test]
fn criterion_10_range_transform() {
    assert!(run(10).passed);
}
