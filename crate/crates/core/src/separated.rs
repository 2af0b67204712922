//! Separated noise `Γ^S`: the dissipator that, applied after the ideal
//! coherent evolution, reproduces the noisy evolution to first order in the
//! noise strength.
//!
//! Three routes are provided and cross-check each other:
//! * `integral`: `Γ^F = (1/t)∫ M†(s) Γ(s) M(s) ds`, `Γ^S = M(t) Γ^F M(t)†`;
//! * `ode`: `dQ/ds = −i[Ω(s), Q] + Γ(s)`, `Q(0) = 0`, `Γ^S = Q(t)/t`;
//! * `spectral` (time-independent only): `Γ^S = K[Γ]` with
//!   `K = (e^{tξ} − 1)/(tξ)` and `ξ[Γ] = −i[Ω, Γ]`, evaluated on the
//!   eigenmodes of `ξ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    eigh, eigvalsh, hermitian_norm2, hermitian_part, hermitian_residual, identity,
    multiset_distance, phi1, CMat, C64,
};
use crate::schedule::LindbladGenerator;
use crate::superop::{ordered_exp, propagate_generator, step_exp, Propagator, RateMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Integral,
    Ode,
    Spectral,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Integral => "integral",
            Route::Ode => "ode",
            Route::Spectral => "spectral",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(Route::Integral),
            "ode" => Ok(Route::Ode),
            "spectral" => Ok(Route::Spectral),
            other => invalid(format!("unknown route `{other}` (integral, ode, spectral)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeparatedNoiseResult {
    pub gamma_s: RateMatrix,
    pub gamma_f: RateMatrix,
    pub t_op: f64,
    pub route: Route,
    /// `Tr Γ^S`.
    pub strength: f64,
    /// `M(t_op)`.
    pub m: Propagator,
}

impl SeparatedNoiseResult {
    fn new(gen: &LindbladGenerator, gamma_s: CMat, m: Propagator, t_op: f64, route: Route) -> Result<Self> {
        let label = gen.basis().label().clone();
        let gamma_s = hermitian_part(&gamma_s);
        let gamma_f = hermitian_part(&(m.matrix().adjoint() * &gamma_s * m.matrix()));
        let gamma_s = RateMatrix::new(gamma_s, label.clone())?;
        Ok(SeparatedNoiseResult {
            strength: gamma_s.strength(),
            gamma_f: RateMatrix::new(gamma_f, label)?,
            gamma_s,
            t_op,
            route,
            m,
        })
    }
}

fn check_t_op(gen: &LindbladGenerator, t_op: f64, steps: usize) -> Result<()> {
    if !(t_op > 0.0) {
        return invalid(format!("t_op must be positive, got {t_op}"));
    }
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    gen.check_time(t_op)
}

/// Runs `route` on `gen` over `[0, t_op]`.
pub fn separate(
    gen: &LindbladGenerator,
    t_op: f64,
    steps: usize,
    route: Route,
) -> Result<SeparatedNoiseResult> {
    match route {
        Route::Integral => separated_integral(gen, t_op, steps),
        Route::Ode => separated_ode(gen, t_op, steps),
        Route::Spectral => separated_spectral_gen(gen, t_op),
    }
}

/// Integral route with composite Simpson quadrature on the propagator grid.
pub fn separated_integral(
    gen: &LindbladGenerator,
    t_op: f64,
    steps: usize,
) -> Result<SeparatedNoiseResult> {
    check_t_op(gen, t_op, steps)?;
    let n = gen.n();
    let mut m = identity(n);
    let mut acc = CMat::zeros(n, n);
    for (k, a, b, steps_k) in gen.pieces(t_op, steps) {
        let steps_k = steps_k + steps_k % 2;
        let h = (b - a) / steps_k as f64;
        let seg = &gen.segments()[k];
        let const_h = seg.hamiltonian.is_constant();
        let fixed_step = const_h.then(|| step_exp(&gen.omega_local(k, a), h));
        let fixed_gamma = seg.noise.is_constant().then(|| gen.gamma_local(k, a));
        let gamma_at = |t: f64| match &fixed_gamma {
            Some(g) => g.clone(),
            None => gen.gamma_local(k, t),
        };
        let integrand = |m: &CMat, t: f64| m.adjoint() * gamma_at(t) * m;
        let mut sum = integrand(&m, a);
        for i in 1..=steps_k {
            let step = match &fixed_step {
                Some(s) => s.clone(),
                None => step_exp(&gen.omega_local(k, a + (i as f64 - 0.5) * h), h),
            };
            m = step * m;
            let w = if i == steps_k {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += integrand(&m, a + i as f64 * h).scale(w);
        }
        acc += sum.scale(h / 3.0);
    }
    let gamma_f = acc.scale(1.0 / t_op);
    let gamma_s = &m * &gamma_f * m.adjoint();
    let m = Propagator::from_matrix(m, t_op)?;
    SeparatedNoiseResult::new(gen, gamma_s, m, t_op, Route::Integral)
}

/// RK4 on `dQ/ds = −i[Ω(s), Q] + Γ(s)` over global times `[t0, t1]`.
fn q_ode(gen: &LindbladGenerator, mut q: CMat, t0: f64, t1: f64, steps: usize) -> CMat {
    let rhs = |om: &CMat, g: &CMat, q: &CMat| -> CMat {
        let c = om * q - q * om;
        c.map(|z| C64::new(z.im, -z.re)) + g
    };
    for (k, a, b, n) in gen.span_pieces(t0, t1, steps) {
        let seg = &gen.segments()[k];
        let h = (b - a) / n as f64;
        let fixed_om = seg.hamiltonian.is_constant().then(|| gen.omega_local(k, a));
        let fixed_g = seg.noise.is_constant().then(|| gen.gamma_local(k, a));
        let at = |t: f64| -> (CMat, CMat) {
            let om = match &fixed_om {
                Some(o) => o.clone(),
                None => gen.omega_local(k, t),
            };
            let g = match &fixed_g {
                Some(g) => g.clone(),
                None => gen.gamma_local(k, t),
            };
            (om, g)
        };
        for i in 0..n {
            let s = a + i as f64 * h;
            let (o0, g0) = at(s);
            let (om, gm) = at(s + 0.5 * h);
            let (o1, g1) = at(s + h);
            let k1 = rhs(&o0, &g0, &q);
            let k2 = rhs(&om, &gm, &(&q + k1.scale(0.5 * h)));
            let k3 = rhs(&om, &gm, &(&q + k2.scale(0.5 * h)));
            let k4 = rhs(&o1, &g1, &(&q + k3.scale(h)));
            q += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
    }
    q
}

/// Differential route: RK4 on the `Q` equation from 0 to `t_op`.
pub fn separated_ode(
    gen: &LindbladGenerator,
    t_op: f64,
    steps: usize,
) -> Result<SeparatedNoiseResult> {
    check_t_op(gen, t_op, steps)?;
    let q = q_ode(gen, CMat::zeros(gen.n(), gen.n()), 0.0, t_op, steps);
    let m = propagate_generator(gen, t_op, steps)?;
    SeparatedNoiseResult::new(gen, q.scale(1.0 / t_op), m, t_op, Route::Ode)
}

/// `Γ^S(t) = Q(t)/t` at each of the increasing positive `times`, with the
/// `Q` equation integrated continuously between them (`steps` per unit time).
pub fn separated_ode_trajectory(
    gen: &LindbladGenerator,
    times: &[f64],
    steps_per_unit: usize,
) -> Result<Vec<RateMatrix>> {
    if times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("trajectory times must be positive and increasing");
    }
    if let Some(t) = times.last() {
        gen.check_time(*t)?;
    }
    let label = gen.basis().label().clone();
    let mut q = CMat::zeros(gen.n(), gen.n());
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let n = ((t - prev) * steps_per_unit as f64).ceil().max(1.0) as usize;
        q = q_ode(gen, q, prev, t, n);
        out.push(RateMatrix::new(hermitian_part(&q.scale(1.0 / t)), label.clone())?);
        prev = t;
    }
    Ok(out)
}

/// `(1/t)∫ Tr Γ(s) ds` by composite Simpson.
pub fn time_averaged_strength(gen: &LindbladGenerator, t_op: f64, steps: usize) -> Result<f64> {
    check_t_op(gen, t_op, steps)?;
    let mut acc = 0.0;
    for (k, a, b, n) in gen.pieces(t_op, steps) {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let noise = &gen.segments()[k].noise;
        let mut sum = noise.strength_at(a) + noise.strength_at(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * noise.strength_at(a + i as f64 * h);
        }
        acc += sum * h / 3.0;
    }
    Ok(acc / t_op)
}

/// Eigen-structure of `ξ[Γ] = −i[Ω, Γ]` built from the eigenvectors of `Ω`.
///
/// With `Ω = Σ_i ω_i v_i v_i†`, the rank-one matrices `E_ij = v_i v_j†` are
/// orthonormal under `Tr[A† B]` and satisfy `ξ[E_ij] = −i(ω_i − ω_j) E_ij`.
#[derive(Clone, Debug)]
pub struct XiSpectrum {
    omega_eigs: Vec<f64>,
    vecs: CMat,
}

impl XiSpectrum {
    pub fn from_omega(omega: &CMat) -> Result<Self> {
        if !omega.is_square() {
            return invalid("Ω must be square");
        }
        let r = hermitian_residual(omega);
        if r > 1e-10 {
            return invalid(format!("Ω is not Hermitian (residual {r:.3e})"));
        }
        let (omega_eigs, vecs) = eigh(&hermitian_part(omega))?;
        Ok(XiSpectrum { omega_eigs, vecs })
    }

    /// Size `n` of the rate space; `ξ` has `n²` modes.
    pub fn n(&self) -> usize {
        self.omega_eigs.len()
    }

    pub fn omega_eigenvalues(&self) -> &[f64] {
        &self.omega_eigs
    }

    pub fn omega_eigenvectors(&self) -> &CMat {
        &self.vecs
    }

    /// `ξ` eigenvalue of mode `(i, j)`: `−i(ω_i − ω_j)`.
    pub fn eigenvalue(&self, i: usize, j: usize) -> C64 {
        C64::new(0.0, -(self.omega_eigs[i] - self.omega_eigs[j]))
    }

    /// All `n²` eigenvalues, mode `(i, j)` at position `i·n + j`.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let n = self.n();
        (0..n * n).map(|k| self.eigenvalue(k / n, k % n)).collect()
    }

    /// `η` of mode `(i, j)` for energy scale `J`, from `ξ = 2J i η`.
    pub fn eta(&self, i: usize, j: usize, energy_scale: f64) -> f64 {
        (self.omega_eigs[j] - self.omega_eigs[i]) / (2.0 * energy_scale)
    }

    pub fn mode(&self, i: usize, j: usize) -> CMat {
        self.vecs.column(i) * self.vecs.column(j).adjoint()
    }

    /// Mode amplitudes `Tr[E_ij† Γ]`, arranged as an `n×n` matrix.
    pub fn components(&self, gamma: &CMat) -> CMat {
        self.vecs.adjoint() * gamma * &self.vecs
    }

    /// `Σ_ij c_ij E_ij`.
    pub fn recompose(&self, comps: &CMat) -> CMat {
        &self.vecs * comps * self.vecs.adjoint()
    }

    /// `f(ξ)[Γ]` for a scalar function of the eigenvalue.
    pub fn apply<F: Fn(C64) -> C64>(&self, gamma: &CMat, f: F) -> CMat {
        let mut c = self.components(gamma);
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] *= f(self.eigenvalue(i, j));
            }
        }
        self.recompose(&c)
    }

    /// Null-mode cut `1e-9·max(1, ‖Ω‖₂)`.
    pub fn null_tol(&self) -> f64 {
        let norm = self.omega_eigs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        1e-9 * norm.max(1.0)
    }

    /// `exp(−iΩt)`.
    pub fn propagator(&self, t: f64) -> CMat {
        let phases = DVector::from_iterator(
            self.n(),
            self.omega_eigs.iter().map(|w| C64::new(0.0, -w * t).exp()),
        );
        &self.vecs * CMat::from_diagonal(&phases) * self.vecs.adjoint()
    }
}

/// `ξ` as an `n²×n²` matrix on column-stacked rate matrices:
/// `−i(1 ⊗ Ω − Ωᵀ ⊗ 1)`.
pub fn xi_matrix(omega: &CMat) -> CMat {
    let id = identity(omega.nrows());
    let ixi = crate::linalg::kron(&id, omega) - crate::linalg::kron(&omega.transpose(), &id);
    ixi.map(|z| C64::new(z.im, -z.re))
}

/// Eigenvalues of `iξ` (real, ascending) by direct diagonalization of the
/// `n²×n²` matrix. The eigenvalues of `ξ` are `−i` times these.
///
/// When `Ω` is purely imaginary, as for any Hamiltonian expanded in a
/// Hermitian basis with real structure constants, `iξ = 1⊗Ω + Ω⊗1` commutes
/// with the transpose `Γ ↦ Γᵀ` and is diagonalized on the symmetric and
/// antisymmetric subspaces separately.
pub fn xi_spectrum_direct(omega: &CMat) -> Result<Vec<f64>> {
    if !omega.is_square() {
        return invalid("Ω must be square");
    }
    let id = identity(omega.nrows());
    let ixi = crate::linalg::kron(&id, omega) - crate::linalg::kron(&omega.transpose(), &id);
    let scale = crate::linalg::max_abs(omega).max(1.0);
    if omega.iter().all(|z| z.re.abs() <= 1e-14 * scale) {
        transpose_block_eigenvalues(&ixi, omega.nrows())
    } else {
        eigvalsh(&ixi)
    }
}

/// Eigenvalues of a column-stacked superoperator that commutes with the
/// transpose, from its symmetric and antisymmetric blocks.
fn transpose_block_eigenvalues(a: &CMat, n: usize) -> Result<Vec<f64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Each basis vector as (index, weight) pairs.
    let mut sym: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut anti: Vec<Vec<(usize, f64)>> = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                sym.push(vec![(i + j * n, 1.0)]);
            } else {
                sym.push(vec![(i + j * n, h), (j + i * n, h)]);
                anti.push(vec![(i + j * n, h), (j + i * n, -h)]);
            }
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for q in [&sym, &anti] {
        let block = CMat::from_fn(q.len(), q.len(), |r, c| {
            let mut z = C64::new(0.0, 0.0);
            for &(x, wx) in &q[r] {
                for &(y, wy) in &q[c] {
                    z += a[(x, y)] * (wx * wy);
                }
            }
            z
        });
        out.extend(eigvalsh(&hermitian_part(&block))?);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// The spectrum of `ξ`, computed from the eigenvectors of `Ω` and confirmed
/// against direct diagonalization of the full superoperator (multiset
/// agreement within `1e-8·max(1, ‖Ω‖₂)`).
pub fn xi_spectrum(omega: &CMat) -> Result<XiSpectrum> {
    let spec = XiSpectrum::from_omega(omega)?;
    let from_modes: Vec<f64> = spec.eigenvalues().iter().map(|z| -z.im).collect();
    let direct = xi_spectrum_direct(omega)?;
    let d = multiset_distance(&from_modes, &direct);
    let tol = 1e-8 * spec.null_tol() / 1e-9;
    if !(d <= tol) {
        return Err(Error::Numeric(format!(
            "ξ spectra from the two constructions differ by {d:.3e}"
        )));
    }
    Ok(spec)
}

/// Spectral route for a time-independent `Γ^D` and `Ω`.
pub fn separated_spectral(
    gamma_d: &RateMatrix,
    omega: &CMat,
    t_op: f64,
) -> Result<SeparatedNoiseResult> {
    if !(t_op > 0.0) {
        return invalid(format!("t_op must be positive, got {t_op}"));
    }
    if omega.shape() != gamma_d.matrix().shape() {
        return invalid("Ω and Γ sizes differ");
    }
    let spec = XiSpectrum::from_omega(omega)?;
    let gamma_s = hermitian_part(&spec.apply(gamma_d.matrix(), |x| phi1(x * t_op)));
    let m = spec.propagator(t_op);
    let gamma_f = hermitian_part(&(m.adjoint() * &gamma_s * &m));
    let label = gamma_d.basis().clone();
    let gamma_s = RateMatrix::new(gamma_s, label.clone())?;
    Ok(SeparatedNoiseResult {
        strength: gamma_s.strength(),
        gamma_f: RateMatrix::new(gamma_f, label)?,
        gamma_s,
        t_op,
        route: Route::Spectral,
        m: Propagator::from_matrix(m, t_op)?,
    })
}

fn time_independent_parts(gen: &LindbladGenerator) -> Result<(RateMatrix, CMat)> {
    if !gen.is_time_independent() {
        return Err(Error::Unsupported(
            "the spectral route needs a single time-independent segment".into(),
        ));
    }
    let gamma = RateMatrix::new(gen.gamma(0.0), gen.basis().label().clone())?;
    Ok((gamma, gen.omega(0.0)))
}

/// Spectral route on a generator; errors for time-dependent generators.
pub fn separated_spectral_gen(gen: &LindbladGenerator, t_op: f64) -> Result<SeparatedNoiseResult> {
    gen.check_time(t_op)?;
    let (gamma, omega) = time_independent_parts(gen)?;
    separated_spectral(&gamma, &omega, t_op)
}

/// Projection of `Γ^D` onto the null space of `ξ`: the limit of `Γ^S` for
/// long operations.
pub fn steady_state(gamma_d: &RateMatrix, omega: &CMat) -> Result<RateMatrix> {
    if omega.shape() != gamma_d.matrix().shape() {
        return invalid("Ω and Γ sizes differ");
    }
    let spec = XiSpectrum::from_omega(omega)?;
    let tol = spec.null_tol();
    let g = spec.apply(gamma_d.matrix(), |x| {
        if x.norm() <= tol {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    RateMatrix::new(hermitian_part(&g), gamma_d.basis().clone())
}

/// Part of `Γ^D` living on one non-null eigenvalue `η` of `ξ/(2J)`.
#[derive(Clone, Debug)]
pub struct ResidualComponent {
    pub eta: f64,
    /// `P_η[Γ^D]`, the projection at `θ = 0`.
    pub component: CMat,
    /// `(e^{iηθ} − 1)/(iηθ)`.
    pub factor: C64,
}

impl ResidualComponent {
    /// `γ_a(θ)` mode content: `factor · P_η[Γ^D]`.
    pub fn at_theta(&self) -> CMat {
        &self.component * self.factor
    }

    /// Frobenius norm of [`at_theta`](Self::at_theta).
    pub fn amplitude(&self) -> f64 {
        self.component.norm() * self.factor.norm()
    }

    /// `Tr[Γ_a† P_η[Γ^D]]` for a given normalized mode `Γ_a` of this
    /// eigenvalue, i.e. the coupling `γ_a(0)`.
    pub fn coupling(&self, mode: &CMat) -> C64 {
        crate::linalg::hs_inner(mode, &self.component)
    }
}

/// Decomposes `Γ^D` over the non-null eigenvalues of `ξ` and attaches the
/// decay factor at angle `θ`. Degenerate eigenvalues are grouped.
pub fn residual_components(
    gamma_d: &RateMatrix,
    omega: &CMat,
    energy_scale: f64,
    theta: f64,
) -> Result<Vec<ResidualComponent>> {
    if !(energy_scale > 0.0) {
        return invalid("energy scale must be positive");
    }
    if omega.shape() != gamma_d.matrix().shape() {
        return invalid("Ω and Γ sizes differ");
    }
    let spec = XiSpectrum::from_omega(omega)?;
    let n = spec.n();
    let tol = spec.null_tol();
    let eta_tol = tol / (2.0 * energy_scale);
    let mut etas: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let e = spec.eta(i, j, energy_scale);
            if e.abs() > eta_tol && !etas.iter().any(|x| (x - e).abs() <= eta_tol) {
                etas.push(e);
            }
        }
    }
    etas.sort_by(f64::total_cmp);
    let comps = spec.components(gamma_d.matrix());
    Ok(etas
        .into_iter()
        .map(|eta| {
            let mut c = comps.clone();
            for i in 0..n {
                for j in 0..n {
                    if (spec.eta(i, j, energy_scale) - eta).abs() > eta_tol {
                        c[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
            }
            ResidualComponent {
                eta,
                component: spec.recompose(&c),
                factor: phi1(C64::new(0.0, eta * theta)),
            }
        })
        .collect())
}

/// Choi matrix `C_K = Σ_ij e^{ij} ⊗ K[e^{ij}]` of the separation map, with its
/// ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct ChoiResult {
    pub matrix: CMat,
    pub eigenvalues: Vec<f64>,
}

pub fn choi_of_k(omega: &CMat, t_op: f64) -> Result<ChoiResult> {
    if !(t_op > 0.0) {
        return invalid(format!("t_op must be positive, got {t_op}"));
    }
    let spec = XiSpectrum::from_omega(omega)?;
    let n = spec.n();
    let v = spec.omega_eigenvectors();
    let mut f = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] = phi1(spec.eigenvalue(i, j) * t_op);
        }
    }
    let mut c = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            // V† e^{ij} V has entries conj(V_ia) V_jb.
            let t = CMat::from_fn(n, n, |a, b| v[(i, a)].conj() * v[(j, b)] * f[(a, b)]);
            let k = spec.recompose(&t);
            c.view_mut((i * n, j * n), (n, n)).copy_from(&k);
        }
    }
    let c = hermitian_part(&c);
    let eigenvalues = eigvalsh(&c)?;
    Ok(ChoiResult {
        matrix: c,
        eigenvalues,
    })
}

/// `λ = 1 − e^{−α D² t_op}` for depolarizing rate matrix `Γ = α·1`.
pub fn global_depolarizing_lambda(alpha: f64, dim: usize, t_op: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return invalid("α must be non-negative");
    }
    if dim == 0 || t_op < 0.0 {
        return invalid("dimension must be positive and t_op non-negative");
    }
    let d2 = (dim * dim) as f64;
    Ok(-(-alpha * d2 * t_op).exp_m1())
}

/// Largest `‖Ω‖₂` among segments sampled at `samples` points each.
pub fn max_omega_norm(gen: &LindbladGenerator, samples: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, seg) in gen.segments().iter().enumerate() {
        for i in 0..=samples.max(1) {
            let t = seg.duration() * i as f64 / samples.max(1) as f64;
            worst = worst.max(hermitian_norm2(&gen.omega_local(k, t))?);
        }
    }
    Ok(worst)
}

/// `exp(−iΩt)` by ordered product for a constant `Ω`; exposed for tests that
/// need the same discretization as the integral route.
pub fn constant_propagator(omega: &CMat, t: f64, steps: usize) -> CMat {
    ordered_exp(|_| omega.clone(), true, 0.0, t, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use crate::schedule::{dephasing, pauli_system};

    #[test]
    fn route_names() {
        for r in [Route::Integral, Route::Ode, Route::Spectral] {
            assert_eq!(r.to_string().parse::<Route>().unwrap(), r);
        }
        assert!("fast".parse::<Route>().is_err());
    }

    #[test]
    fn h_zero_gives_time_average() {
        let (b, st) = pauli_system(1).unwrap();
        let g = dephasing(0.5, 0, &b).unwrap();
        let gen = LindbladGenerator::constant(b, st, &[0.0; 3], g.clone(), 2.0).unwrap();
        for r in [Route::Integral, Route::Ode, Route::Spectral] {
            let res = separate(&gen, 2.0, 64, r).unwrap();
            assert!(max_abs_diff(res.gamma_s.matrix(), &g) < 1e-14, "{r}");
        }
    }

    #[test]
    fn rejects_bad_t_op() {
        let (b, st) = pauli_system(1).unwrap();
        let gen = LindbladGenerator::constant(b, st, &[1.0, 0.0, 0.0], CMat::zeros(3, 3), 1.0).unwrap();
        assert!(separated_ode(&gen, 0.0, 10).is_err());
        assert!(separated_integral(&gen, -1.0, 10).is_err());
        assert!(separated_integral(&gen, 2.0, 10).is_err());
    }

    #[test]
    fn xi_modes_and_pairs() {
        let (_, st) = pauli_system(1).unwrap();
        let om = st.omega(&[0.3, -0.7, 0.2]);
        let spec = xi_spectrum(&om).unwrap();
        let xi = xi_matrix(&om);
        for i in 0..3 {
            for j in 0..3 {
                let e = spec.mode(i, j);
                let lhs = (&om * &e - &e * &om).map(|z| C64::new(z.im, -z.re));
                assert!(max_abs_diff(&lhs, &(&e * spec.eigenvalue(i, j))) < 1e-12);
                // conjugate partner
                assert!(max_abs_diff(&e.adjoint(), &spec.mode(j, i)) < 1e-15);
                assert!((spec.eigenvalue(i, j) + spec.eigenvalue(j, i)).norm() < 1e-15);
                // the matrix form agrees on this mode
                let v = crate::superop::vectorize(&e);
                let xv = &xi * &v;
                assert!((xv - v * spec.eigenvalue(i, j)).norm() < 1e-12);
            }
        }
        let zero = xi_spectrum(&CMat::zeros(3, 3)).unwrap();
        assert!(zero.eigenvalues().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn depolarizing_lambda() {
        assert_eq!(global_depolarizing_lambda(0.0, 2, 1.0).unwrap(), 0.0);
        assert!((global_depolarizing_lambda(0.1, 2, 1.0).unwrap() - (1.0 - (-0.4f64).exp())).abs() < 1e-15);
        assert!((global_depolarizing_lambda(1.0, 2, 1e3).unwrap() - 1.0).abs() < 1e-15);
        assert!(global_depolarizing_lambda(-1.0, 2, 1.0).is_err());
    }

    #[test]
    fn steady_state_of_zero_omega_is_input() {
        let (b, _) = pauli_system(1).unwrap();
        let g = RateMatrix::new(crate::schedule::damping(0.2, 0, &b).unwrap(), b.label().clone()).unwrap();
        let ss = steady_state(&g, &CMat::zeros(3, 3)).unwrap();
        assert!(max_abs_diff(ss.matrix(), g.matrix()) < 1e-15);
    }

    #[test]
    fn residual_factor_limits() {
        let (b, st) = pauli_system(1).unwrap();
        let g = RateMatrix::new(dephasing(1.0, 0, &b).unwrap(), b.label().clone()).unwrap();
        let om = st.omega(&[-1.0, 0.0, 0.0]);
        for rc in residual_components(&g, &om, 1.0, 1e-9).unwrap() {
            assert!((rc.factor - c(1.0, 0.0)).norm() < 1e-8);
        }
    }
}
