//! Rate matrices, the adjoint-representation matrices `Ω` and `M`, and the
//! transforms that move a dissipator past coherent evolution.
//!
//! Superoperator matrices act on column-stacked density matrices, so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::basis::{BasisLabel, OperatorBasis, StructureTensor};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    eigvalsh, expm, hermitian_part, hermitian_residual, identity, kron, max_abs_diff,
    unitarity_residual, CMat, C64,
};
use crate::schedule::{HamiltonianSchedule, LindbladGenerator};

/// Default number of midpoint steps for time-ordered exponentials.
pub const DEFAULT_PROPAGATOR_STEPS: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-8;

/// Hermitian coefficient matrix of a dissipator
/// `Σ_nm Γ_nm (A_n ρ A_m† − ½{A_m† A_n, ρ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    gamma: CMat,
    basis: BasisLabel,
}

impl RateMatrix {
    pub fn new(gamma: CMat, basis: BasisLabel) -> Result<Self> {
        if !gamma.is_square() {
            return invalid("rate matrix must be square");
        }
        let r = hermitian_residual(&gamma);
        if r > HERMITIAN_TOL {
            return invalid(format!("rate matrix is not Hermitian (residual {r:.3e})"));
        }
        Ok(RateMatrix { gamma, basis })
    }

    pub fn zeros(n: usize, basis: BasisLabel) -> Self {
        RateMatrix {
            gamma: CMat::zeros(n, n),
            basis,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.gamma
    }

    pub fn into_matrix(self) -> CMat {
        self.gamma
    }

    pub fn basis(&self) -> &BasisLabel {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.nrows() == 0
    }

    /// Noise strength `Tr Γ`.
    pub fn strength(&self) -> f64 {
        self.gamma.diagonal().iter().map(|z| z.re).sum()
    }

    /// Ascending eigenvalues (rates `γ_i`).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigvalsh(&hermitian_part(&self.gamma))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// Positive semi-definite up to `1e-9·max(1, Tr Γ)`.
    pub fn is_physical(&self) -> Result<bool> {
        let floor = -1e-9 * self.strength().abs().max(1.0);
        Ok(self.min_eigenvalue()? >= floor)
    }

    fn check_same(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return invalid(format!(
                "dimension mismatch: rate matrix is {}x{}, operand is {n}x{n}",
                self.len(),
                self.len()
            ));
        }
        Ok(())
    }
}

/// Adjoint-representation propagator `M(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    m: CMat,
    s: f64,
}

impl Propagator {
    pub fn identity(n: usize) -> Self {
        Propagator {
            m: identity(n),
            s: 0.0,
        }
    }

    pub fn from_matrix(m: CMat, s: f64) -> Result<Self> {
        let p = Propagator { m, s };
        p.check_unitary()?;
        Ok(p)
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn time(&self) -> f64 {
        self.s
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.m)
    }

    fn check_unitary(&self) -> Result<()> {
        let r = self.unitarity_residual();
        if r > UNITARY_TOL {
            return Err(Error::Numeric(format!(
                "propagator lost unitarity (residual {r:.3e})"
            )));
        }
        Ok(())
    }
}

/// `Ω_mn(t) = −i Σ_p H_p(t) g_pmn`.
pub fn omega_of(schedule: &HamiltonianSchedule, t: f64, g: &StructureTensor) -> Result<CMat> {
    schedule.check_time(t)?;
    Ok(g.omega(&schedule.coeffs_at(t, g.len())))
}

/// `exp(−i Ω τ)`.
pub(crate) fn step_exp(omega: &CMat, tau: f64) -> CMat {
    expm(&omega.map(|z| C64::new(z.im * tau, -z.re * tau)))
}

fn matrix_power(step: &CMat, mut k: usize) -> CMat {
    let mut base = step.clone();
    let mut acc = identity(step.nrows());
    while k > 0 {
        if k & 1 == 1 {
            acc = &base * &acc;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Ordered product of midpoint exponentials over `[a, b]` of local time.
/// `f` maps a local time to the Hermitian generator.
pub(crate) fn ordered_exp<F: Fn(f64) -> CMat>(
    f: F,
    constant: bool,
    a: f64,
    b: f64,
    steps: usize,
) -> CMat {
    let tau = (b - a) / steps as f64;
    if constant {
        return matrix_power(&step_exp(&f(a), tau), steps);
    }
    let mut m = identity(f(a).nrows());
    for k in 0..steps {
        let mid = a + (k as f64 + 0.5) * tau;
        m = step_exp(&f(mid), tau) * m;
    }
    m
}

/// `M(s)`: time-ordered exponential of `−i∫Ω dt` as a product of `steps`
/// midpoint-sampled exponentials.
pub fn propagate_m(
    schedule: &HamiltonianSchedule,
    s: f64,
    steps: usize,
    g: &StructureTensor,
) -> Result<Propagator> {
    schedule.check_time(s)?;
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    let m = ordered_exp(
        |t| g.omega(&schedule.coeffs_at(t, g.len())),
        schedule.is_constant(),
        0.0,
        s,
        steps,
    );
    Propagator::from_matrix(m, s)
}

/// `M(s)` for a piecewise generator; steps are shared out by segment length.
pub fn propagate_generator(gen: &LindbladGenerator, s: f64, steps: usize) -> Result<Propagator> {
    gen.check_time(s)?;
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    let mut m = identity(gen.n());
    for (k, a, b, n) in gen.pieces(s, steps) {
        let seg = &gen.segments()[k];
        let piece = ordered_exp(
            |t| gen.omega_local(k, t),
            seg.hamiltonian.is_constant(),
            a,
            b,
            n,
        );
        m = piece * m;
    }
    Propagator::from_matrix(m, s)
}

/// Hilbert-space propagator `U(s) = T exp(−i∫H dt)` for a piecewise generator.
pub fn unitary_of(gen: &LindbladGenerator, s: f64, steps: usize) -> Result<CMat> {
    gen.check_time(s)?;
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    let mut u = identity(gen.dim());
    for (k, a, b, n) in gen.pieces(s, steps) {
        let seg = &gen.segments()[k];
        let piece = ordered_exp(
            |t| gen.hamiltonian_local(k, t),
            seg.hamiltonian.is_constant(),
            a,
            b,
            n,
        );
        u = piece * u;
    }
    let r = unitarity_residual(&u);
    if r > UNITARY_TOL {
        return Err(Error::Numeric(format!("unitary propagator drifted ({r:.3e})")));
    }
    Ok(u)
}

/// `Γ^L = M Γ M†`: noise moved from before a coherent map to after it.
pub fn commute_left(gamma: &RateMatrix, m: &Propagator) -> Result<RateMatrix> {
    gamma.check_same(m.m.nrows())?;
    let g = &m.m * &gamma.gamma * m.m.adjoint();
    Ok(RateMatrix {
        gamma: hermitian_part(&g),
        basis: gamma.basis.clone(),
    })
}

/// `Γ^R = M† Γ M`: noise moved from after a coherent map to before it.
pub fn commute_right(gamma: &RateMatrix, m: &Propagator) -> Result<RateMatrix> {
    gamma.check_same(m.m.nrows())?;
    let g = m.m.adjoint() * &gamma.gamma * &m.m;
    Ok(RateMatrix {
        gamma: hermitian_part(&g),
        basis: gamma.basis.clone(),
    })
}

/// `ξ[Γ] = −i[Ω, Γ]`. Hermitian, not necessarily positive.
pub fn commutator_rate(omega: &CMat, gamma: &RateMatrix) -> Result<RateMatrix> {
    gamma.check_same(omega.nrows())?;
    if !omega.is_square() {
        return invalid("Ω must be square");
    }
    let comm = omega * &gamma.gamma - &gamma.gamma * omega;
    Ok(RateMatrix {
        gamma: comm.map(|z| C64::new(z.im, -z.re)),
        basis: gamma.basis.clone(),
    })
}

/// Column-stacking vectorization.
pub fn vectorize(rho: &CMat) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Superoperator of `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superop(h: &CMat) -> CMat {
    let id = identity(h.nrows());
    let l = kron(&id, h) - kron(&h.transpose(), &id);
    l.map(|z| C64::new(z.im, -z.re))
}

/// Superoperator of the dissipator with rate matrix `gamma` over `basis`.
pub fn dissipator_superop(gamma: &CMat, basis: &OperatorBasis) -> Result<CMat> {
    let n = basis.len();
    if gamma.shape() != (n, n) {
        return invalid("rate matrix does not match the basis");
    }
    let d = basis.dim();
    let id = identity(d);
    let mut out = CMat::zeros(d * d, d * d);
    for nn in 0..n {
        for m in 0..n {
            let g = gamma[(nn, m)];
            if g == C64::new(0.0, 0.0) {
                continue;
            }
            let a_n = basis.op(nn);
            let a_m = basis.op(m);
            let amdag_an = a_m.adjoint() * a_n;
            let term = kron(&a_m.map(|z| z.conj()), a_n)
                - (kron(&id, &amdag_an) + kron(&amdag_an.transpose(), &id)).scale(0.5);
            out += term * g;
        }
    }
    Ok(out)
}

/// Superoperator of `ρ ↦ U ρ U†`.
pub fn unitary_superop(u: &CMat) -> CMat {
    kron(&u.map(|z| z.conj()), u)
}

/// Full generator `L(t)` as a superoperator matrix.
pub fn generator_superop(gen: &LindbladGenerator, t: f64) -> Result<CMat> {
    Ok(hamiltonian_superop(&gen.hamiltonian(t)) + dissipator_superop(&gen.gamma(t), gen.basis())?)
}

/// Exact map `Φ(t) = T exp(∫ L dt)` as a superoperator matrix, by RK4 on
/// `dΦ/dt = L(t) Φ`.
pub fn propagate_superop(gen: &LindbladGenerator, t: f64, steps: usize) -> Result<CMat> {
    gen.check_time(t)?;
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    let d = gen.dim();
    let mut phi = identity(d * d);
    for (k, a, b, n) in gen.pieces(t, steps) {
        let l_at = |tl: f64| -> Result<CMat> {
            Ok(hamiltonian_superop(&gen.hamiltonian_local(k, tl))
                + dissipator_superop(&gen.gamma_local(k, tl), gen.basis())?)
        };
        let seg = &gen.segments()[k];
        let h = (b - a) / n as f64;
        if seg.hamiltonian.is_constant() && seg.noise.is_constant() {
            phi = expm(&l_at(a)?.scale(b - a)) * phi;
            continue;
        }
        for i in 0..n {
            let t0 = a + i as f64 * h;
            let l0 = l_at(t0)?;
            let lm = l_at(t0 + 0.5 * h)?;
            let l1 = l_at(t0 + h)?;
            let k1 = &l0 * &phi;
            let k2 = &lm * (&phi + k1.scale(0.5 * h));
            let k3 = &lm * (&phi + k2.scale(0.5 * h));
            let k4 = &l1 * (&phi + k3.scale(h));
            phi += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
    }
    Ok(phi)
}

/// Outcome of [`superop_commute_identity_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommuteCheck {
    pub pass: bool,
    pub residual: f64,
}

/// Checks `φ ∘ e^{L_D} = e^{L_L} ∘ φ` with explicit superoperator matrices,
/// where `φ` is the coherent map of `gen` over its full duration and
/// `L_L` the dissipator of `M Γ M†`.
pub fn superop_commute_identity_check(
    gen: &LindbladGenerator,
    gamma: &RateMatrix,
    steps: usize,
    tol: f64,
) -> Result<CommuteCheck> {
    let t = gen.duration();
    let basis = gen.basis();
    let u = unitary_of(gen, t, steps)?;
    let m = propagate_generator(gen, t, steps)?;
    let phi = unitary_superop(&u);
    let left = commute_left(gamma, &m)?;
    let lhs = &phi * expm(&dissipator_superop(gamma.matrix(), basis)?);
    let rhs = expm(&dissipator_superop(left.matrix(), basis)?) * &phi;
    let residual = max_abs_diff(&lhs, &rhs);
    Ok(CommuteCheck {
        pass: residual <= tol,
        residual,
    })
}
