//! Runs every example through its `run_example` entry point.

#[allow(dead_code)]
#[path = "../examples/quickstart.rs"]
mod quickstart;

#[allow(dead_code)]
#[path = "../examples/lovasz_relaxation.rs"]
mod lovasz_relaxation;

#[allow(dead_code)]
#[path = "../examples/polynomial_externalities.rs"]
mod polynomial_externalities;

#[allow(dead_code)]
#[path = "../examples/contention_resolution.rs"]
mod contention_resolution;

#[allow(dead_code)]
#[path = "../examples/concave_primal_dual.rs"]
mod concave_primal_dual;

#[allow(dead_code)]
#[path = "../examples/negative_externalities.rs"]
mod negative_externalities;

#[allow(dead_code)]
#[path = "../examples/structure_checks.rs"]
mod structure_checks;

#[allow(dead_code)]
#[path = "../examples/batch_experiment.rs"]
mod batch_experiment;

#[test]
fn quickstart_finds_the_optimum() {
    let s = quickstart::run_example().unwrap();
    assert_eq!(s.both_on_second, 6.0);
    assert_eq!(s.opt, 6.0);
    assert!(s.ratio >= 0.5);
}

#[test]
fn lovasz_evaluators_agree() {
    let s = lovasz_relaxation::run_example().unwrap();
    assert!((s.closed_form - s.greedy).abs() < 1e-9);
    assert!((s.sampled_mean - s.closed_form).abs() <= 3.0 * s.sampled_stderr);
    assert!(s.relaxation >= s.opt - 1e-6);
    assert!(s.rounded_mean >= 0.5 * s.opt);
}

#[test]
fn polynomial_expansion_and_bound() {
    let s = polynomial_externalities::run_example().unwrap();
    assert_eq!(s.degree_bound, 3);
    assert!(s.terms > 0);
    assert!((s.guarantee - 1.0 / 3.0).abs() < 1e-12);
    assert!(s.ratio >= s.guarantee - 0.02);
}

#[test]
fn contention_retention() {
    let s = contention_resolution::run_example().unwrap();
    assert!((s.exact_retention - 0.72).abs() < 1e-12);
    assert!((s.measured_retention - s.exact_retention).abs() < 0.01);
    assert!(s.ratio >= s.gamma_quarter - 0.02);
}

#[test]
fn concave_dual_bounds_optimum() {
    let s = concave_primal_dual::run_example().unwrap();
    assert!(s.best_dual + 1e-6 >= s.opt);
    assert!(s.primal_value <= s.best_dual + 1e-9);
    assert!(s.pd_rounded > 0.0 && s.beta_rounded > 0.0);
}

#[test]
fn negative_greedy_bounds() {
    let s = negative_externalities::run_example().unwrap();
    assert!(s.greedy_value >= s.opt / std::f64::consts::E);
    assert!(s.rounded_mean >= s.opt / std::f64::consts::E);
    assert!(s.dominant_greedy_ratio >= 1.0 - 1.0 / std::f64::consts::E);
}

#[test]
fn structure_examples() {
    let s = structure_checks::run_example().unwrap();
    assert!(s.convex_supermodular);
    assert!(!s.concave_supermodular);
    assert!(s.negative_submodular);
    assert!(!s.negative_monotone);
    assert_eq!(s.gamma_square, 1.0 / 16.0);
}

#[test]
fn batch_table() {
    let s = batch_experiment::run_example().unwrap();
    assert_eq!(s.rows, 8);
    assert_eq!(s.violations, 0);
    assert_eq!(s.csv.lines().count(), 9);
    assert!(s.json_round_trip);
}
