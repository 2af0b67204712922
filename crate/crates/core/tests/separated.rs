use sepnoise::linalg::{c, eigvalsh, identity, max_abs_diff, CMat};
use sepnoise::schedule::{damping, dephasing, pauli_system};
use sepnoise::separated::{
    choi_of_k, residual_components, separate, separated_spectral, steady_state, time_averaged_strength,
    xi_spectrum, Route, XiSpectrum,
};
use sepnoise::validation::{damping_rates, damping_reference, fig1_generator, random_generator, seeded, x_drive, x_drive_omega};
use sepnoise::{HamiltonianSchedule, LindbladGenerator, NoiseSchedule, RateMatrix};

fn rate(gamma: CMat) -> RateMatrix {
    RateMatrix::new(gamma, pauli_system(1).unwrap().0.label().clone()).unwrap()
}

#[test]
fn short_operations_leave_rates_unchanged() {
    let (basis, _) = pauli_system(1).unwrap();
    let g = damping(0.2, 0, &basis).unwrap();
    let theta = 1e-6;
    let res = separated_spectral(&rate(g.clone()), &x_drive_omega(1.0).unwrap(), theta / 2.0).unwrap();
    // The leading correction is first order in θ with coefficient below Tr Γ^D.
    assert!(max_abs_diff(res.gamma_s.matrix(), &g) < theta * 0.1);
}

#[test]
fn zero_hamiltonian_gives_time_average() {
    let gamma = 0.4;
    let t_op = 1.3;
    let (basis, st) = pauli_system(1).unwrap();
    let noisy = fig1_generator(gamma, t_op).unwrap();
    let noise = noisy.segments()[0].noise.clone();
    let gen = LindbladGenerator::single(basis, st, HamiltonianSchedule::new(t_op).unwrap(), noise).unwrap();
    let a = 2f64.sqrt();
    let zz = 0.5 * gamma * (0.5 + (2.0 * a * t_op).sin() / (4.0 * a * t_op));
    let yy = 0.5 * gamma - zz;
    for route in [Route::Integral, Route::Ode] {
        let res = separate(&gen, t_op, 2048, route).unwrap();
        let g = res.gamma_s.matrix();
        assert!((g[(2, 2)].re - zz).abs() < 1e-10, "{route}");
        assert!((g[(1, 1)].re - yy).abs() < 1e-10, "{route}");
        assert!(g[(0, 0)].norm() < 1e-14 && g[(1, 2)].norm() < 1e-14);
    }
}

#[test]
fn rotating_drive_routes_agree() {
    let gen = fig1_generator(0.25, 1.0).unwrap();
    let a = separate(&gen, 1.0, 4096, Route::Integral).unwrap();
    let b = separate(&gen, 1.0, 4096, Route::Ode).unwrap();
    assert!(max_abs_diff(a.gamma_s.matrix(), b.gamma_s.matrix()) < 1e-8);
    assert!(max_abs_diff(a.m.matrix(), b.m.matrix()) < 1e-12);
    let avg = time_averaged_strength(&gen, 1.0, 4096).unwrap();
    assert!((a.strength - avg).abs() < 1e-8);
}

#[test]
fn spectral_route_matches_integral_route() {
    let mut rng = seeded(31);
    for qubits in [1, 2] {
        let gen = random_generator(&mut rng, qubits, 0.3, 1.1).unwrap();
        let a = separate(&gen, 1.1, 4096, Route::Spectral).unwrap();
        let b = separate(&gen, 1.1, 4096, Route::Integral).unwrap();
        let c = separate(&gen, 1.1, 4096, Route::Ode).unwrap();
        assert!(max_abs_diff(a.gamma_s.matrix(), b.gamma_s.matrix()) < 1e-8);
        assert!(max_abs_diff(a.gamma_s.matrix(), c.gamma_s.matrix()) < 1e-8);
    }
}

#[test]
fn spectral_route_rejects_time_dependence() {
    let gen = fig1_generator(0.25, 1.0).unwrap();
    assert!(separate(&gen, 1.0, 64, Route::Spectral).is_err());
}

#[test]
fn x_drive_modes_couple_to_dephasing() {
    let gamma = 0.6;
    let j = 1.5;
    let (basis, _) = pauli_system(1).unwrap();
    let g = rate(dephasing(gamma, 0, &basis).unwrap());
    let comps = residual_components(&g, &x_drive_omega(j).unwrap(), j, 0.0).unwrap();
    let comps: Vec<_> = comps.into_iter().filter(|r| r.component.norm() > 1e-12).collect();
    let etas: Vec<f64> = comps.iter().map(|r| r.eta).collect();
    assert_eq!(etas.len(), 2);
    assert!((etas[0] + 2.0).abs() < 1e-12 && (etas[1] - 2.0).abs() < 1e-12);

    // −¼λ3 ± ½iλ6 + (√3/4)λ8 as explicit 3×3 matrices.
    let s3 = 3f64.sqrt();
    let mut base = CMat::zeros(3, 3);
    base[(0, 0)] = c(-0.25 + s3 / 4.0 / s3, 0.0);
    base[(1, 1)] = c(0.25 + s3 / 4.0 / s3, 0.0);
    base[(2, 2)] = c(-2.0 * s3 / 4.0 / s3, 0.0);
    let mut l6 = CMat::zeros(3, 3);
    l6[(1, 2)] = c(1.0, 0.0);
    l6[(2, 1)] = c(1.0, 0.0);
    let modes = [&base + l6.map(|z| z * c(0.0, 0.5)), &base - l6.map(|z| z * c(0.0, 0.5))];
    for m in &modes {
        assert!((m.norm() - 1.0).abs() < 1e-14);
    }
    for r in &comps {
        let best = modes
            .iter()
            .map(|m| {
                let k = r.coupling(m);
                (k, max_abs_diff(&r.component, &m.map(|z| z * k)))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(best.1 < 1e-12);
        assert!((best.0 - c(-gamma / 4.0, 0.0)).norm() < 1e-12, "{}", best.0);
    }
}

#[test]
fn residual_factor_decays() {
    let (basis, _) = pauli_system(1).unwrap();
    let g = rate(damping(0.5, 0, &basis).unwrap());
    let omega = x_drive_omega(1.0).unwrap();
    let small = residual_components(&g, &omega, 1.0, 0.1).unwrap();
    let large = residual_components(&g, &omega, 1.0, 50.0).unwrap();
    for (a, b) in small.iter().zip(&large) {
        assert!(b.amplitude() < a.amplitude());
        assert!(b.factor.norm() <= 2.0 / (b.eta.abs() * 50.0) + 1e-15);
    }
}

#[test]
fn damping_steady_state_spectrum() {
    let gamma = 0.9;
    let (basis, _) = pauli_system(1).unwrap();
    let g = rate(damping(gamma, 0, &basis).unwrap());
    let ss = steady_state(&g, &x_drive_omega(1.0).unwrap()).unwrap();
    let mut eig = ss.eigenvalues().unwrap();
    eig.retain(|x| x.abs() > 1e-12);
    // Long-angle limit of the closed-form damping matrix: (γ/8)·diag(2, 1, 1).
    let expected = [gamma / 8.0, gamma / 8.0, gamma / 4.0];
    assert_eq!(eig.len(), 3);
    for (a, b) in eig.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{eig:?}");
    }
    let theta = 1e9;
    assert!(max_abs_diff(ss.matrix(), &damping_reference(gamma, theta)) < 1e-8);
    for (a, b) in eig.iter().zip(&damping_rates(gamma, theta)) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn long_operations_approach_steady_state() {
    let (basis, _) = pauli_system(1).unwrap();
    let g = rate(damping(0.3, 0, &basis).unwrap());
    let omega = x_drive_omega(1.0).unwrap();
    let ss = steady_state(&g, &omega).unwrap();
    let far = separated_spectral(&g, &omega, 1e4).unwrap();
    assert!(max_abs_diff(far.gamma_s.matrix(), ss.matrix()) < 1e-4);
}

#[test]
fn choi_of_short_map_is_identity_choi() {
    let omega = x_drive_omega(1.0).unwrap();
    let choi = choi_of_k(&omega, 1e-9).unwrap();
    let mut expected = vec![0.0; 8];
    expected.push(3.0);
    for (a, b) in choi.eigenvalues.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-8, "{:?}", choi.eigenvalues);
    }
    let longer = choi_of_k(&omega, 0.8).unwrap();
    let tr: f64 = (0..9).map(|i| longer.matrix[(i, i)].re).sum();
    assert!((tr - 3.0).abs() < 1e-12);
}

#[test]
fn depolarizing_is_invariant() {
    let omega = x_drive_omega(0.7).unwrap();
    let g = rate(identity(3).scale(0.05));
    let res = separated_spectral(&g, &omega, 2.0).unwrap();
    assert!(max_abs_diff(res.gamma_s.matrix(), g.matrix()) < 1e-14);
    assert!(max_abs_diff(res.gamma_f.matrix(), g.matrix()) < 1e-13);
}

#[test]
fn xi_spectrum_constructions_agree() {
    let omega = x_drive_omega(1.0).unwrap();
    let spec = xi_spectrum(&omega).unwrap();
    let mut im: Vec<f64> = spec.eigenvalues().iter().map(|z| z.im).collect();
    im.sort_by(f64::total_cmp);
    let expected = [-4.0, -2.0, -2.0, 0.0, 0.0, 0.0, 2.0, 2.0, 4.0];
    for (a, b) in im.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{im:?}");
    }
    assert!(spec.eigenvalues().iter().all(|z| z.re.abs() < 1e-14));

    let direct = XiSpectrum::from_omega(&CMat::zeros(3, 3)).unwrap();
    assert!(direct.eigenvalues().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn final_frame_rates_share_spectrum() {
    let (basis, _) = pauli_system(1).unwrap();
    let g = damping(0.4, 0, &basis).unwrap();
    let gen = x_drive(1.0, 1.7, g).unwrap();
    let res = separate(&gen, 1.7, 2048, Route::Ode).unwrap();
    let a = eigvalsh(res.gamma_s.matrix()).unwrap();
    let b = eigvalsh(res.gamma_f.matrix()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn bad_arguments_are_rejected() {
    let gen = x_drive(1.0, 1.0, CMat::zeros(3, 3)).unwrap();
    assert!(separate(&gen, 0.0, 64, Route::Ode).is_err());
    assert!(separate(&gen, 2.0, 64, Route::Ode).is_err());
    assert!(separate(&gen, 0.5, 0, Route::Integral).is_err());
    assert!("bogus".parse::<Route>().is_err());
    let g = rate(CMat::zeros(3, 3));
    assert!(separated_spectral(&g, &CMat::zeros(15, 15), 1.0).is_err());
    let _ = NoiseSchedule::zero(3);
}
