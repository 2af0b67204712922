use std::f64::consts::PI;

use sepnoise::validation::{
    choi_eigenvalues, closed_form_suite, dephasing_rates, fig1_experiment, scaling_suite, time_grid,
    Source, ValidationCase, ValidationReport,
};

#[test]
fn dephasing_rates_at_unit_angle() {
    let gamma = 0.8;
    let r = dephasing_rates(gamma, 1.0);
    let s = 1f64.sin();
    assert!((r[0] - gamma / 4.0 * (1.0 - s)).abs() < 1e-15);
    assert!((r[1] - gamma / 4.0 * (1.0 + s)).abs() < 1e-15);
}

#[test]
fn choi_lambda0_at_pi() {
    let l = choi_eigenvalues(PI);
    assert!(l.iter().any(|x| (x - 1.0).abs() < 1e-15), "{l:?}");
}

#[test]
fn closed_forms_pass() {
    let report = closed_form_suite().unwrap();
    assert!(report.pass(), "{}", report.summary());
    assert!(!report.cases.is_empty());
}

#[test]
fn scaling_slopes_near_two() {
    let report = scaling_suite().unwrap();
    assert!(report.pass(), "{}", report.summary());
}

#[test]
fn vanishing_noise_reaches_integrator_floor() {
    // Fixed window: 4/γ would diverge as γ → 0.
    let cmp = fig1_experiment(1e-9, 4.0, 32).unwrap();
    assert!(cmp.max_deviation.iter().all(|d| *d <= 1e-7), "{:?}", cmp.max_deviation);
}

#[test]
fn deviation_grows_with_noise() {
    let devs: Vec<f64> = [0.05, 0.1, 0.2]
        .iter()
        .map(|&g| fig1_experiment(g, 4.0, 32).unwrap().max_deviation[0])
        .collect();
    assert!(devs.windows(2).all(|w| w[0] < w[1]), "{devs:?}");
}

#[test]
fn time_grid_shape() {
    let g = time_grid(2.0, 4);
    assert_eq!(g.len(), 5);
    assert_eq!(g[0], 0.0);
    assert!((g[4] - 2.0).abs() < 1e-15);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn report_bookkeeping() {
    let mut report = ValidationReport::new("demo");
    report.push(ValidationCase::compare("a", vec![1.0], vec![1.0 + 1e-12], Source::Oracle, 1e-9));
    report.push(ValidationCase::at_most("b", 0.5, 0.1, Source::Calibrated));
    assert!(!report.pass());
    assert_eq!(report.failures().count(), 1);
    let json = report.to_json();
    assert_eq!(json["cases"].as_array().unwrap().len(), 2);
    let xml = report.junit_xml();
    assert!(xml.contains("<testsuite") && xml.contains("failures=\"1\""));
}
