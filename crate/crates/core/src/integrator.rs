//! Direct master-equation integration on full density matrices.
//!
//! This is the reference the approximate noise models are measured against.
//! It applies the dissipator formula term by term and never goes through the
//! superoperator or adjoint-representation machinery.

use crate::basis::OperatorBasis;
use crate::error::{invalid, Result};
use crate::linalg::{
    anticommutator, commutator, eigvalsh, hermitian_part, hermitian_residual, trace, CMat, C64,
};
use crate::schedule::LindbladGenerator;

const STEP_UNIT: f64 = 16384.0;

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: CMat,
}

impl DensityMatrix {
    /// Hermitian and unit trace within 1e-9, eigenvalues above −1e-8.
    pub fn new(rho: CMat) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return invalid("density matrix must be square and non-empty");
        }
        if hermitian_residual(&rho) > 1e-9 {
            return invalid("density matrix is not Hermitian");
        }
        let tr = trace(&rho);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return invalid(format!("density matrix has trace {tr}"));
        }
        let min = eigvalsh(&hermitian_part(&rho))?[0];
        if min < -1e-8 {
            return invalid(format!("density matrix has negative eigenvalue {min:.3e}"));
        }
        Ok(DensityMatrix { rho })
    }

    /// `|i⟩⟨i|` in dimension `d`.
    pub fn basis_state(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return invalid("basis state index out of range");
        }
        let mut rho = CMat::zeros(d, d);
        rho[(i, i)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { rho })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return invalid("zero state vector");
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(DensityMatrix {
            rho: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            rho: CMat::identity(d, d).scale(1.0 / d as f64),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn into_matrix(self) -> CMat {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}

/// `Σ_nm Γ_nm (A_n ρ A_m† − ½{A_m† A_n, ρ})`.
pub fn dissipator_apply(gamma: &CMat, basis: &OperatorBasis, rho: &CMat) -> Result<CMat> {
    let n = basis.len();
    let d = basis.dim();
    if gamma.shape() != (n, n) {
        return invalid(format!("rate matrix is {:?}, basis has {n} operators", gamma.shape()));
    }
    if rho.shape() != (d, d) {
        return invalid(format!("ρ is {:?}, basis dimension is {d}", rho.shape()));
    }
    Ok(Dissipator::new(gamma, basis).apply(basis, rho))
}

/// Dissipator with the sums over `m` folded in:
/// `Σ_n A_n ρ B_n† − ½{K, ρ}` with `B_n = Σ_m Γ*_nm A_m`, `K = Σ_n B_n† A_n`.
struct Dissipator {
    jumps: Vec<(usize, CMat)>,
    k: CMat,
}

impl Dissipator {
    fn new(gamma: &CMat, basis: &OperatorBasis) -> Self {
        let d = basis.dim();
        let mut jumps = Vec::new();
        let mut k = CMat::zeros(d, d);
        for nn in 0..basis.len() {
            let mut b = CMat::zeros(d, d);
            let mut any = false;
            for m in 0..basis.len() {
                let g = gamma[(nn, m)];
                if g != C64::new(0.0, 0.0) {
                    b += basis.op(m) * g.conj();
                    any = true;
                }
            }
            if any {
                k += b.adjoint() * basis.op(nn);
                jumps.push((nn, b));
            }
        }
        Dissipator { jumps, k }
    }

    fn apply(&self, basis: &OperatorBasis, rho: &CMat) -> CMat {
        let mut out = anticommutator(&self.k, rho).scale(-0.5);
        for (nn, b) in &self.jumps {
            out += basis.op(*nn) * rho * b.adjoint();
        }
        out
    }
}

/// Default RK4 step count: `2^14` over the interval, or `2^14` per unit of
/// `1/γ̄` when that is finer.
pub fn default_steps(gen: &LindbladGenerator, t: f64) -> usize {
    let gbar = gen.max_strength(64);
    (STEP_UNIT * (t * gbar).max(1.0)).ceil() as usize
}

fn rhs(gen: &LindbladGenerator, k: usize, tl: f64, rho: &CMat, noisy: bool) -> CMat {
    let h = gen.hamiltonian_local(k, tl);
    let coh = commutator(&h, rho).map(|z| C64::new(z.im, -z.re));
    if !noisy {
        return coh;
    }
    let gamma = gen.gamma_local(k, tl);
    let diss = Dissipator::new(&gamma, gen.basis());
    coh + diss.apply(gen.basis(), rho)
}

fn rk4_piece(
    gen: &LindbladGenerator,
    k: usize,
    a: f64,
    b: f64,
    n: usize,
    mut rho: CMat,
    noisy: bool,
) -> CMat {
    let h = (b - a) / n as f64;
    for i in 0..n {
        let t0 = a + i as f64 * h;
        let k1 = rhs(gen, k, t0, &rho, noisy);
        let k2 = rhs(gen, k, t0 + 0.5 * h, &(&rho + k1.scale(0.5 * h)), noisy);
        let k3 = rhs(gen, k, t0 + 0.5 * h, &(&rho + k2.scale(0.5 * h)), noisy);
        let k4 = rhs(gen, k, t0 + h, &(&rho + k3.scale(h)), noisy);
        rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
    }
    rho
}

/// Integrates `ρ` over global times `[t0, t1]` with about `steps` RK4 steps,
/// split so that no step straddles a segment boundary.
fn integrate(
    gen: &LindbladGenerator,
    rho: CMat,
    t0: f64,
    t1: f64,
    steps: usize,
    noisy: bool,
) -> CMat {
    let mut rho = rho;
    for (k, a, b, n) in gen.span_pieces(t0, t1, steps) {
        rho = rk4_piece(gen, k, a, b, n, rho, noisy);
    }
    rho
}

fn check_input(gen: &LindbladGenerator, rho0: &DensityMatrix, t: f64) -> Result<()> {
    if rho0.dim() != gen.dim() {
        return invalid(format!(
            "ρ has dimension {}, generator has {}",
            rho0.dim(),
            gen.dim()
        ));
    }
    if t < 0.0 {
        return invalid("evolution time must be non-negative");
    }
    gen.check_time(t)
}

/// `ρ(t)` under the full generator, fixed-step RK4. `steps = None` uses
/// [`default_steps`].
pub fn evolve(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t: f64,
    steps: Option<usize>,
) -> Result<DensityMatrix> {
    check_input(gen, rho0, t)?;
    let steps = steps.unwrap_or_else(|| default_steps(gen, t)).max(1);
    let rho = integrate(gen, rho0.rho.clone(), 0.0, t, steps, true);
    DensityMatrix::new(hermitian_part(&rho))
}

/// `ρ(t)` under the Hamiltonian part only.
pub fn coherent_evolve(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t: f64,
    steps: Option<usize>,
) -> Result<DensityMatrix> {
    check_input(gen, rho0, t)?;
    let steps = steps
        .unwrap_or(STEP_UNIT as usize)
        .max(1);
    let rho = integrate(gen, rho0.rho.clone(), 0.0, t, steps, false);
    DensityMatrix::new(hermitian_part(&rho))
}

/// States at each of the increasing `times`, integrating continuously.
/// `steps` is the total step budget over `[0, times.last()]`.
pub fn evolve_trajectory(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    times: &[f64],
    steps: Option<usize>,
) -> Result<Vec<DensityMatrix>> {
    trajectory(gen, rho0, times, steps, true)
}

/// [`evolve_trajectory`] under the Hamiltonian part only.
pub fn coherent_trajectory(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    times: &[f64],
    steps: Option<usize>,
) -> Result<Vec<DensityMatrix>> {
    trajectory(gen, rho0, times, steps, false)
}

fn trajectory(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    times: &[f64],
    steps: Option<usize>,
    noisy: bool,
) -> Result<Vec<DensityMatrix>> {
    let t_end = match times.last() {
        Some(t) => *t,
        None => return Ok(Vec::new()),
    };
    check_input(gen, rho0, t_end)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return invalid("trajectory times must be non-negative and increasing");
    }
    let steps = steps.unwrap_or_else(|| default_steps(gen, t_end)).max(1);
    let mut out = Vec::with_capacity(times.len());
    let mut rho = rho0.rho.clone();
    let mut prev = 0.0;
    for &t in times {
        let n = if t_end > 0.0 {
            ((steps as f64) * (t - prev) / t_end).ceil() as usize
        } else {
            0
        };
        rho = integrate(gen, rho, prev, t, n.max(1), noisy);
        out.push(DensityMatrix::new(hermitian_part(&rho))?);
        prev = t;
    }
    Ok(out)
}

/// `Tr[O ρ]` for Hermitian `O`.
pub fn expectation(obs: &CMat, rho: &DensityMatrix) -> Result<f64> {
    if obs.shape() != rho.rho.shape() {
        return invalid("observable and state dimensions differ");
    }
    if hermitian_residual(obs) > 1e-10 {
        return invalid("observable is not Hermitian");
    }
    let v = (obs * &rho.rho).trace();
    if v.im.abs() > 1e-10 {
        return invalid(format!("expectation has imaginary part {:.3e}", v.im));
    }
    Ok(v.re)
}

/// `½ Σ |λ_i(ρ − σ)|`.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return invalid("trace distance needs equal shapes");
    }
    Ok(0.5 * eigvalsh(&hermitian_part(&(a - b)))?.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use crate::schedule::{damping, dephasing, pauli_system};
    use std::sync::Arc;

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(CMat::identity(2, 2)).is_err());
        let mut m = CMat::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.6, 0.0);
        m[(1, 0)] = c(0.6, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(CMat::identity(2, 2).scale(0.5)).is_ok());
    }

    #[test]
    fn expectations() {
        let (b, _) = pauli_system(1).unwrap();
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        assert_eq!(expectation(b.op(2), &zero).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(expectation(b.op(0), &mixed).unwrap(), 0.0);
        assert!((expectation(b.op(0), &plus()).unwrap() - 1.0).abs() < 1e-15);
        let bad = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(expectation(&bad, &zero).is_err());
    }

    #[test]
    fn dephasing_decay_rate() {
        let (b, _) = pauli_system(1).unwrap();
        let g = dephasing(0.3, 0, &b).unwrap();
        let d = dissipator_apply(&g, &b, plus().matrix()).unwrap();
        // d⟨X⟩/dt = −γ⟨X⟩ with ⟨X⟩ = 1
        let rate = (b.op(0) * &d).trace();
        assert!((rate - c(-0.3, 0.0)).norm() < 1e-15);
        assert!(trace(&d).norm() < 1e-15);
        let zero = dissipator_apply(&CMat::zeros(3, 3), &b, plus().matrix()).unwrap();
        assert_eq!(zero, CMat::zeros(2, 2));
    }

    #[test]
    fn damping_matches_ladder_form() {
        let (b, _) = pauli_system(1).unwrap();
        let gamma = 0.7;
        let g = damping(gamma, 0, &b).unwrap();
        let sp = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let sm = sp.adjoint();
        let rho = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)]);
        let want = (&sp * &rho * &sm - anticommutator(&(&sm * &sp), &rho).scale(0.5)).scale(gamma);
        let got = dissipator_apply(&g, &b, &rho).unwrap();
        assert!(max_abs_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn rabi_oscillation() {
        let (b, st) = pauli_system(1).unwrap();
        let gen = LindbladGenerator::constant(b.clone(), st, &[1.0, 0.0, 0.0], CMat::zeros(3, 3), 3.0)
            .unwrap();
        let rho = evolve(&gen, &DensityMatrix::basis_state(2, 0).unwrap(), 3.0, None).unwrap();
        assert!((expectation(b.op(2), &rho).unwrap() - (6.0f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn coherent_matches_noiseless_evolve() {
        let (b, st) = pauli_system(1).unwrap();
        let gen = LindbladGenerator::constant(
            Arc::clone(&b),
            Arc::clone(&st),
            &[0.3, -0.5, 1.0],
            dephasing(0.2, 0, &b).unwrap(),
            2.0,
        )
        .unwrap();
        let quiet = LindbladGenerator::constant(b, st, &[0.3, -0.5, 1.0], CMat::zeros(3, 3), 2.0)
            .unwrap();
        let r0 = plus();
        let a = coherent_evolve(&gen, &r0, 2.0, Some(2000)).unwrap();
        let q = evolve(&quiet, &r0, 2.0, Some(2000)).unwrap();
        assert!(max_abs_diff(a.matrix(), q.matrix()) < 1e-15);
        assert!((a.purity() - 1.0).abs() < 1e-8);
        let same = coherent_evolve(&gen, &r0, 0.0, None).unwrap();
        assert_eq!(same, r0);
    }

    #[test]
    fn trace_distance_basics() {
        let a = DensityMatrix::basis_state(2, 0).unwrap();
        let b = DensityMatrix::basis_state(2, 1).unwrap();
        assert!((trace_distance(a.matrix(), b.matrix()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(a.matrix(), a.matrix()).unwrap(), 0.0);
    }
}
