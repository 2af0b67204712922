//! Compilation of a multi-operation gate into an ideal unitary followed by a
//! single gate-noise channel `Γ^N`.
//!
//! Each operation's separated noise `Γ^S_i` is commuted to the end of the gate
//! through the adjoint propagators of the later operations, `Γ^L_i`, and the
//! results are averaged with weights `t_i / t_G`. Idle intervals are ordinary
//! operations with a zero Hamiltonian and the hardware noise.

use std::fmt;
use std::sync::Arc;

use crate::basis::{OperatorBasis, StructureTensor};
use crate::error::{invalid, Error, Result};
use crate::integrator::{evolve, trace_distance, DensityMatrix};
use crate::linalg::{expm, hermitian_part, identity, max_abs_diff, CMat};
use crate::schedule::{HamiltonianSchedule, LindbladGenerator, NoiseSchedule, Segment};
use crate::separated::{separate, Route};
use crate::superop::{
    dissipator_superop, propagate_generator, unitary_of, unvectorize, vectorize, RateMatrix,
    DEFAULT_PROPAGATOR_STEPS,
};

#[derive(Clone, Debug)]
pub struct GateOp {
    pub name: String,
    pub hamiltonian: HamiltonianSchedule,
    /// Overrides the gate-wide hardware noise for this operation.
    pub noise: Option<NoiseSchedule>,
    /// Idle time that follows the operation.
    pub idle_after: f64,
}

impl GateOp {
    pub fn new(name: impl Into<String>, hamiltonian: HamiltonianSchedule) -> Self {
        GateOp {
            name: name.into(),
            hamiltonian,
            noise: None,
            idle_after: 0.0,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSchedule) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_idle(mut self, idle: f64) -> Self {
        self.idle_after = idle;
        self
    }

    pub fn duration(&self) -> f64 {
        self.hamiltonian.duration()
    }
}

#[derive(Clone, Debug)]
pub struct GateSpec {
    pub basis: Arc<OperatorBasis>,
    pub structure: Arc<StructureTensor>,
    pub ops: Vec<GateOp>,
    pub hardware_noise: NoiseSchedule,
    pub steps: usize,
    pub route: Route,
}

impl GateSpec {
    pub fn new(
        basis: Arc<OperatorBasis>,
        structure: Arc<StructureTensor>,
        hardware_noise: NoiseSchedule,
    ) -> Self {
        GateSpec {
            basis,
            structure,
            ops: Vec::new(),
            hardware_noise,
            steps: DEFAULT_PROPAGATOR_STEPS,
            route: Route::Ode,
        }
    }

    pub fn with_op(mut self, op: GateOp) -> Self {
        self.ops.push(op);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ops.is_empty() {
            return invalid("a gate needs at least one operation");
        }
        for op in &self.ops {
            if !(op.duration() > 0.0) {
                return invalid(format!("operation `{}` needs a positive duration", op.name));
            }
            if !(op.idle_after >= 0.0 && op.idle_after.is_finite()) {
                return invalid(format!("operation `{}` has a negative idle time", op.name));
            }
        }
        if self.steps == 0 {
            return invalid("steps must be at least 1");
        }
        Ok(())
    }

    /// Operations and idles as generator segments, in time order.
    pub fn segments(&self) -> Result<Vec<Segment>> {
        self.validate()?;
        let mut out = Vec::new();
        for op in &self.ops {
            out.push(Segment {
                name: op.name.clone(),
                hamiltonian: op.hamiltonian.clone(),
                noise: op.noise.clone().unwrap_or_else(|| self.hardware_noise.clone()),
            });
            if op.idle_after > 0.0 {
                out.push(Segment {
                    name: "idle".into(),
                    hamiltonian: HamiltonianSchedule::new(op.idle_after)?,
                    noise: self.hardware_noise.clone(),
                });
            }
        }
        Ok(out)
    }

    /// The whole gate as one piecewise generator.
    pub fn generator(&self) -> Result<LindbladGenerator> {
        LindbladGenerator::new(
            Arc::clone(&self.basis),
            Arc::clone(&self.structure),
            self.segments()?,
        )
    }

    pub fn total_duration(&self) -> f64 {
        self.ops.iter().map(|o| o.duration() + o.idle_after).sum()
    }

    fn single(&self, seg: Segment) -> Result<LindbladGenerator> {
        LindbladGenerator::new(
            Arc::clone(&self.basis),
            Arc::clone(&self.structure),
            vec![seg],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompileMethod {
    Monolithic,
    PerOp,
}

impl fmt::Display for CompileMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompileMethod::Monolithic => "monolithic",
            CompileMethod::PerOp => "per_op",
        })
    }
}

/// One operation's contribution to the gate noise.
#[derive(Clone, Debug)]
pub struct OpContribution {
    pub name: String,
    pub duration: f64,
    pub gamma_s: RateMatrix,
    /// `Γ^S_i` commuted past every later operation.
    pub gamma_l: RateMatrix,
}

#[derive(Clone, Debug)]
pub struct GateNoise {
    pub t_g: f64,
    pub gamma_n: RateMatrix,
    pub u: CMat,
    pub method: CompileMethod,
    /// Per-operation terms (empty for the monolithic method).
    pub breakdown: Vec<OpContribution>,
}

/// Commute-left-and-sum compilation.
pub fn compile_per_op(spec: &GateSpec) -> Result<GateNoise> {
    let segments = spec.segments()?;
    let n = spec.basis.len();
    let label = spec.basis.label().clone();
    let mut parts = Vec::with_capacity(segments.len());
    for seg in segments {
        let name = seg.name.clone();
        let gen = spec.single(seg)?;
        let t = gen.duration();
        let res = separate(&gen, t, spec.steps, spec.route)?;
        parts.push((name, t, res.gamma_s, res.m));
    }
    let t_g: f64 = parts.iter().map(|p| p.1).sum();
    let mut suffix = identity(n);
    let mut acc = CMat::zeros(n, n);
    let mut breakdown = Vec::with_capacity(parts.len());
    for (name, t, gamma_s, m) in parts.into_iter().rev() {
        let gl = hermitian_part(&(&suffix * gamma_s.matrix() * suffix.adjoint()));
        acc += gl.scale(t / t_g);
        breakdown.push(OpContribution {
            name,
            duration: t,
            gamma_s,
            gamma_l: RateMatrix::new(gl, label.clone())?,
        });
        suffix *= m.matrix();
    }
    breakdown.reverse();
    Ok(GateNoise {
        t_g,
        gamma_n: RateMatrix::new(hermitian_part(&acc), label)?,
        u: ideal_unitary(spec)?,
        method: CompileMethod::PerOp,
        breakdown,
    })
}

/// Separation of the whole gate as one piecewise operation. Fails if the
/// adjoint propagator of the whole gate does not factor into the per-operation
/// propagators.
pub fn compile_monolithic(spec: &GateSpec) -> Result<GateNoise> {
    let gen = spec.generator()?;
    let t_g = gen.duration();
    let route = match spec.route {
        Route::Spectral if !gen.is_time_independent() => Route::Ode,
        r => r,
    };
    let res = separate(&gen, t_g, spec.steps * gen.segments().len(), route)?;
    let mut product = identity(spec.basis.len());
    for seg in spec.segments()? {
        let g = spec.single(seg)?;
        product = propagate_generator(&g, g.duration(), spec.steps)?.matrix() * product;
    }
    let r = max_abs_diff(&product, res.m.matrix());
    if r > 1e-8 {
        return Err(Error::Numeric(format!(
            "gate propagator does not factor into its operations (residual {r:.3e})"
        )));
    }
    Ok(GateNoise {
        t_g,
        gamma_n: res.gamma_s,
        u: ideal_unitary(spec)?,
        method: CompileMethod::Monolithic,
        breakdown: Vec::new(),
    })
}

/// Ordered product of the per-operation unitaries (idles contribute the
/// identity).
pub fn ideal_unitary(spec: &GateSpec) -> Result<CMat> {
    let mut u = identity(spec.basis.dim());
    for seg in spec.segments()? {
        if seg.hamiltonian.is_zero() {
            continue;
        }
        let g = spec.single(seg)?;
        u = unitary_of(&g, g.duration(), spec.steps)? * u;
    }
    Ok(u)
}

#[derive(Clone, Debug)]
pub struct FidelityReport {
    pub trace_distance: f64,
    pub tol: f64,
    pub pass: bool,
    /// State after the full noisy evolution.
    pub exact: CMat,
    /// State after `exp(t_G L_N) ∘ G`.
    pub approx: CMat,
}

/// Compares the noisy evolution of `rho0` through the gate with the compiled
/// model `exp(t_G L_N)(U ρ U†)`.
pub fn gate_fidelity_check(
    spec: &GateSpec,
    rho0: &DensityMatrix,
    tol: f64,
    steps: Option<usize>,
) -> Result<FidelityReport> {
    let noise = compile_per_op(spec)?;
    let gen = spec.generator()?;
    let exact = evolve(&gen, rho0, noise.t_g, steps)?.into_matrix();
    let d = spec.basis.dim();
    let ideal = &noise.u * rho0.matrix() * noise.u.adjoint();
    let l = dissipator_superop(noise.gamma_n.matrix(), &spec.basis)?.scale(noise.t_g);
    let approx = unvectorize(&(expm(&l) * vectorize(&ideal)), d);
    let dist = trace_distance(&exact, &approx)?;
    Ok(FidelityReport {
        trace_distance: dist,
        tol,
        pass: dist <= tol,
        exact,
        approx,
    })
}
