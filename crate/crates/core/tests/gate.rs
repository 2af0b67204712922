use std::f64::consts::PI;

use sepnoise::basis::{frobenius_inner, pauli_matrix};
use sepnoise::gate::{
    compile_monolithic, compile_per_op, gate_fidelity_check, ideal_unitary, CompileMethod, GateOp, GateSpec,
};
use sepnoise::integrator::DensityMatrix;
use sepnoise::linalg::{c, expm, identity, max_abs_diff, unitarity_residual, CMat};
use sepnoise::schedule::{damping, dephasing, local_pauli_index, pauli_system};
use sepnoise::separated::{separate, Route};
use sepnoise::superop::propagate_generator;
use sepnoise::validation::{hadamard_reference, hadamard_spec};
use sepnoise::{HamiltonianSchedule, NoiseSchedule};

fn hadamard_unitary() -> CMat {
    let y = pauli_matrix('Y').unwrap();
    let z = pauli_matrix('Z').unwrap();
    // exp(−iπY/4)·exp(+iπZ/2)
    let uy = expm(&y.map(|v| v * c(0.0, -PI / 4.0)));
    let uz = expm(&z.map(|v| v * c(0.0, PI / 2.0)));
    uy * uz
}

fn plus_state() -> DensityMatrix {
    let s = 0.5f64.sqrt();
    DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap()
}

#[test]
fn hadamard_noise_matches_closed_form() {
    for gamma in [0.01, 1.0] {
        let spec = hadamard_spec(gamma, 0.0).unwrap();
        let noise = compile_per_op(&spec).unwrap();
        assert_eq!(noise.method, CompileMethod::PerOp);
        assert!((noise.t_g - 3.0).abs() < 1e-15);
        assert!(max_abs_diff(noise.gamma_n.matrix(), &hadamard_reference(gamma)) < 1e-6 * gamma);
        assert_eq!(noise.breakdown.len(), 2);
    }
}

#[test]
fn hadamard_monolithic_agrees() {
    let gamma = 0.02;
    let spec = hadamard_spec(gamma, 0.0).unwrap();
    let mono = compile_monolithic(&spec).unwrap();
    assert_eq!(mono.method, CompileMethod::Monolithic);
    assert!(max_abs_diff(mono.gamma_n.matrix(), &hadamard_reference(gamma)) < 1e-6 * gamma);
}

#[test]
fn monolithic_and_per_op_agree() {
    for gamma in [0.02, 0.01] {
        let gbar = gamma / 2.0;
        let mut spec = hadamard_spec(gamma, 1.5).unwrap();
        spec.route = Route::Ode;
        let a = compile_per_op(&spec).unwrap();
        let b = compile_monolithic(&spec).unwrap();
        assert!(max_abs_diff(a.gamma_n.matrix(), b.gamma_n.matrix()) <= 1e-3 * gbar);
        assert!(max_abs_diff(&a.u, &b.u) < 1e-14);
    }
}

#[test]
fn trivial_gate_returns_hardware_noise() {
    let (basis, st) = pauli_system(2).unwrap();
    let g = dephasing(0.1, 0, &basis).unwrap() + damping(0.3, 1, &basis).unwrap();
    let spec = GateSpec::new(basis, st, NoiseSchedule::constant(g.clone()).unwrap())
        .with_op(GateOp::new("a", HamiltonianSchedule::new(0.7).unwrap()).with_idle(0.4))
        .with_op(GateOp::new("b", HamiltonianSchedule::new(1.1).unwrap()));
    let noise = compile_per_op(&spec).unwrap();
    assert!(max_abs_diff(noise.gamma_n.matrix(), &g) < 1e-14);
    assert!(max_abs_diff(&noise.u, &identity(4)) < 1e-15);
    assert!((noise.t_g - 2.2).abs() < 1e-15);
}

#[test]
fn idle_mixture_law() {
    let gamma = 0.4;
    let (basis, _) = pauli_system(1).unwrap();
    let g_damp = damping(gamma, 0, &basis).unwrap();
    let base = compile_per_op(&hadamard_spec(gamma, 0.0).unwrap()).unwrap();
    let lz = base.breakdown[0].gamma_l.matrix().clone();
    let ly = base.breakdown[1].gamma_l.matrix().clone();
    for m in [0.0, 1.0, 10.0, 100.0] {
        let noise = compile_per_op(&hadamard_spec(gamma, m).unwrap()).unwrap();
        let expected = (lz.scale(2.0) + &ly + g_damp.scale(m)).scale(1.0 / (m + 3.0));
        assert!(max_abs_diff(noise.gamma_n.matrix(), &expected) < 1e-9, "m = {m}");
    }
    let far = compile_per_op(&hadamard_spec(gamma, 100.0).unwrap()).unwrap();
    let scale = g_damp.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    assert!(max_abs_diff(far.gamma_n.matrix(), &g_damp) <= 4.0 * scale / 103.0);
}

#[test]
fn single_op_gate_matches_separation() {
    let (basis, st) = pauli_system(1).unwrap();
    let g = damping(0.2, 0, &basis).unwrap();
    let x = local_pauli_index('X', 0, 1).unwrap();
    let h = HamiltonianSchedule::constant(&[(x, 0.8)], 1.3).unwrap();
    let spec = GateSpec::new(basis, st, NoiseSchedule::constant(g).unwrap())
        .with_op(GateOp::new("x", h));
    let noise = compile_per_op(&spec).unwrap();
    let gen = spec.generator().unwrap();
    let res = separate(&gen, 1.3, spec.steps, spec.route).unwrap();
    assert!(max_abs_diff(noise.gamma_n.matrix(), res.gamma_s.matrix()) < 1e-15);
    let mono = compile_monolithic(&spec).unwrap();
    assert!(max_abs_diff(mono.gamma_n.matrix(), res.gamma_s.matrix()) < 1e-12);
}

#[test]
fn strength_is_weighted_average() {
    let (basis, st) = pauli_system(1).unwrap();
    let hw = NoiseSchedule::constant(damping(0.2, 0, &basis).unwrap()).unwrap();
    let own = NoiseSchedule::constant(dephasing(0.6, 0, &basis).unwrap()).unwrap();
    let y = local_pauli_index('Y', 0, 1).unwrap();
    let spec = GateSpec::new(basis, st, hw)
        .with_op(GateOp::new("a", HamiltonianSchedule::constant(&[(y, 0.5)], 1.0).unwrap()).with_idle(2.0))
        .with_op(GateOp::new("b", HamiltonianSchedule::constant(&[(y, -0.3)], 1.0).unwrap()).with_noise(own));
    let noise = compile_per_op(&spec).unwrap();
    // Tr: damping 0.1, dephasing 0.3; durations 1 (hw), 2 (idle, hw), 1 (own).
    let expected = (0.1 * 3.0 + 0.3) / 4.0;
    assert!((noise.gamma_n.strength() - expected).abs() < 1e-9);
}

#[test]
fn op_order_matters() {
    let gamma = 0.5;
    let spec = hadamard_spec(gamma, 0.0).unwrap();
    let mut swapped = spec.clone();
    swapped.ops.swap(0, 1);
    let a = compile_per_op(&spec).unwrap();
    let b = compile_per_op(&swapped).unwrap();
    assert!(max_abs_diff(a.gamma_n.matrix(), b.gamma_n.matrix()) > 1e-3);
}

#[test]
fn ideal_unitary_of_hadamard() {
    let spec = hadamard_spec(0.1, 3.0).unwrap();
    let u = ideal_unitary(&spec).unwrap();
    assert!(max_abs_diff(&u, &hadamard_unitary()) < 1e-8);
    assert!(unitarity_residual(&u) < 1e-8);
}

#[test]
fn ideal_unitary_lifts_to_propagator() {
    let spec = hadamard_spec(0.1, 0.0).unwrap();
    let u = ideal_unitary(&spec).unwrap();
    let gen = spec.generator().unwrap();
    let m = propagate_generator(&gen, gen.duration(), 4096).unwrap();
    let basis = &spec.basis;
    let ud = u.adjoint();
    let lift = CMat::from_fn(3, 3, |i, j| {
        frobenius_inner(basis.op(i), &(&u * basis.op(j) * &ud), 2).unwrap()
    });
    assert!(max_abs_diff(&lift, m.matrix()) < 1e-8);
}

#[test]
fn fidelity_against_full_evolution() {
    let rho0 = plus_state();
    let at = |gamma: f64| {
        let spec = hadamard_spec(gamma, 0.0).unwrap();
        gate_fidelity_check(&spec, &rho0, 1e-3, None).unwrap()
    };
    let clean = at(0.0);
    assert!(clean.trace_distance < 1e-10);
    let weak = at(0.01);
    assert!(weak.pass, "{}", weak.trace_distance);
    let half = at(0.005);
    let ratio = weak.trace_distance / half.trace_distance;
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn invalid_specs_are_rejected() {
    let (basis, st) = pauli_system(1).unwrap();
    let hw = NoiseSchedule::zero(3);
    let empty = GateSpec::new(basis.clone(), st.clone(), hw.clone());
    assert!(compile_per_op(&empty).is_err());
    assert!(compile_monolithic(&empty).is_err());
    let bad_idle = GateSpec::new(basis, st, hw)
        .with_op(GateOp::new("a", HamiltonianSchedule::new(1.0).unwrap()).with_idle(-1.0));
    assert!(compile_per_op(&bad_idle).is_err());
}
