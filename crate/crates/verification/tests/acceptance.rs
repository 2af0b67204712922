use std::process::ExitCode;

use sepnoise::separated::Route;
use sepnoise::validation::{
    choi_cases, commute_cases, cross_route_cases, depolarizing_invariance, fig1_cases, hadamard_cases, scaling_cases,
    single_qubit_closed_forms, steady_state_cases, xi_construction_cases, ValidationCase,
};
use sepnoise_verification::{secs, Criterion};

const SEED: u64 = 2024;
const GAMMA: f64 = 0.1;

fn with_prefix(cases: Vec<ValidationCase>, prefix: &str) -> Vec<ValidationCase> {
    cases.into_iter().filter(|c| c.id.starts_with(prefix)).collect()
}

fn main() -> ExitCode {
    let mut all = Vec::new();

    all.push(Criterion::run(1, "closed-form dephasing", secs(1), || {
        Ok(with_prefix(single_qubit_closed_forms(GAMMA, Route::Ode)?, "dephasing."))
    }));
    all.push(Criterion::run(2, "closed-form damping", secs(1), || {
        Ok(with_prefix(single_qubit_closed_forms(GAMMA, Route::Ode)?, "damping."))
    }));
    all.push(Criterion::run(3, "depolarizing invariance", secs(1), || {
        depolarizing_invariance(0.05, SEED, 10)
    }));
    all.push(Criterion::run(4, "steady state", secs(1), || steady_state_cases(GAMMA)));
    all.push(Criterion::run(5, "Choi spectrum", secs(30), choi_cases));
    all.push(Criterion::run(6, "Hadamard compilation", secs(5), || hadamard_cases(1.0)));
    all.push(Criterion::run(7, "cross-route agreement", secs(60), || {
        cross_route_cases(SEED, 20, 5)
    }));
    all.push(Criterion::run(8, "commute identity", secs(30), || commute_cases(SEED, 10, 4)));
    all.push(Criterion::run(9, "rotating-drive properties", secs(180), || {
        let mut cases: Vec<ValidationCase> = fig1_cases()?
            .into_iter()
            .filter(|c| !c.id.starts_with("fig1.degradation"))
            .collect();
        cases.extend(scaling_cases()?);
        Ok(cases)
    }));

    let strength: Vec<ValidationCase> = all
        .iter()
        .flat_map(|c| c.cases.iter())
        .filter(|c| c.id.contains(".strength"))
        .cloned()
        .collect();
    all.push(Criterion::run(10, "noise-strength bookkeeping", None, || Ok(strength)));
    all.push(Criterion::run(11, "xi spectrum construction", secs(30), || {
        xi_construction_cases(SEED, &[1, 2, 3], &[1, 2])
    }));

    for c in &all {
        println!("{}", c.line());
    }
    let failed = all.iter().filter(|c| !c.pass()).count();
    println!("acceptance: {} criteria, {} passed, {} failed", all.len(), all.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
