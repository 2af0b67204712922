//! Time-dependent Hamiltonian and noise schedules, and piecewise Lindblad
//! generators built from them.
//!
//! Every schedule runs on its own local clock `t ∈ [0, duration]`. A generator
//! concatenates segments; segment `k` starts at the sum of the earlier
//! durations.

use std::sync::Arc;

use crate::basis::{pauli_basis, structure_tensor, BasisLabel, OperatorBasis, StructureTensor};
use crate::error::{invalid, Error, Result};
use crate::expr::CoeffExpr;
use crate::linalg::{c, hermitian_residual, CMat};

/// A real-valued function of local time.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Expr(CoeffExpr),
    /// Piecewise-linear interpolation through `(times[i], values[i])`,
    /// clamped outside the sampled range.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl Coefficient {
    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return invalid("sampled coefficient needs matching, non-empty time and value lists");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sample times must be strictly increasing");
        }
        Ok(Coefficient::Sampled { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Expr(e) => e.eval(t),
            Coefficient::Sampled { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return values[last];
                }
                let k = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] * (1.0 - w) + values[k + 1] * w
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Coefficient::Constant(_) => true,
            Coefficient::Expr(e) => e.is_constant(),
            Coefficient::Sampled { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

impl From<CoeffExpr> for Coefficient {
    fn from(e: CoeffExpr) -> Self {
        Coefficient::Expr(e)
    }
}

/// `H(t) = Σ_p H_p(t) A_p` with real coefficients over a Hermitian basis.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSchedule {
    terms: Vec<(usize, Coefficient)>,
    duration: f64,
}

impl HamiltonianSchedule {
    pub fn new(duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return invalid(format!("duration must be finite and non-negative, got {duration}"));
        }
        Ok(HamiltonianSchedule {
            terms: Vec::new(),
            duration,
        })
    }

    /// Constant coefficients given as `(basis index, value)` pairs.
    pub fn constant(terms: &[(usize, f64)], duration: f64) -> Result<Self> {
        let mut s = Self::new(duration)?;
        for &(p, v) in terms {
            s = s.with_term(p, Coefficient::Constant(v));
        }
        Ok(s)
    }

    pub fn with_term(mut self, index: usize, coeff: impl Into<Coefficient>) -> Self {
        self.terms.push((index, coeff.into()));
        self
    }

    pub fn terms(&self) -> &[(usize, Coefficient)] {
        &self.terms
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, c)| c.is_constant() && c.eval(0.0) == 0.0)
    }

    /// Errors unless `0 ≤ t ≤ duration` (a relative slack of 1e-12 is allowed
    /// at the upper end).
    pub fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.duration.max(1.0);
        if !(t >= 0.0 && t <= self.duration + slack) {
            return Err(Error::Domain(format!(
                "time {t} is outside the schedule domain [0, {}]",
                self.duration
            )));
        }
        Ok(())
    }

    /// Coefficient vector `H_p(t)` of length `n`.
    pub fn coeffs_at(&self, t: f64, n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n];
        for (p, coeff) in &self.terms {
            h[*p] += coeff.eval(t);
        }
        h
    }

    fn check_indices(&self, n: usize) -> Result<()> {
        match self.terms.iter().find(|(p, _)| *p >= n) {
            Some((p, _)) => invalid(format!("Hamiltonian term index {p} exceeds basis size {n}")),
            None => Ok(()),
        }
    }
}

/// `Γ(t) = Σ_k w_k(t) G_k` with fixed Hermitian matrices `G_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    terms: Vec<(Coefficient, CMat)>,
    n: usize,
}

impl NoiseSchedule {
    pub fn zero(n: usize) -> Self {
        NoiseSchedule {
            terms: Vec::new(),
            n,
        }
    }

    pub fn constant(gamma: CMat) -> Result<Self> {
        NoiseSchedule::zero(gamma.nrows()).with_term(Coefficient::Constant(1.0), gamma)
    }

    pub fn with_term(mut self, weight: impl Into<Coefficient>, gamma: CMat) -> Result<Self> {
        if gamma.shape() != (self.n, self.n) {
            return invalid(format!(
                "noise term is {:?}, expected {}x{}",
                gamma.shape(),
                self.n,
                self.n
            ));
        }
        if hermitian_residual(&gamma) > 1e-10 {
            return invalid("noise terms must be Hermitian");
        }
        self.terms.push((weight.into(), gamma));
        Ok(self)
    }

    pub fn terms(&self) -> &[(Coefficient, CMat)] {
        &self.terms
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, t: f64) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for (w, g) in &self.terms {
            let w = w.eval(t);
            if w != 0.0 {
                out += g.scale(w);
            }
        }
        out
    }

    /// Noise strength `Tr Γ(t)`.
    pub fn strength_at(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, g)| w.eval(t) * g.diagonal().iter().map(|z| z.re).sum::<f64>())
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(w, _)| w.is_constant())
    }
}

/// One constant-structure piece of a generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub name: String,
    pub hamiltonian: HamiltonianSchedule,
    pub noise: NoiseSchedule,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.hamiltonian.duration()
    }
}

/// Piecewise Lindblad generator `L(t) = L_H(t) + L_D(t)`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    basis: Arc<OperatorBasis>,
    structure: Arc<StructureTensor>,
    segments: Vec<Segment>,
    starts: Vec<f64>,
}

impl LindbladGenerator {
    pub fn new(
        basis: Arc<OperatorBasis>,
        structure: Arc<StructureTensor>,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return invalid("a generator needs at least one segment");
        }
        if structure.len() != basis.len() {
            return invalid("structure tensor does not belong to the basis");
        }
        if !basis.is_hermitian() {
            return Err(Error::Unsupported(
                "generators need a Hermitian basis (real Hamiltonian coefficients)".into(),
            ));
        }
        let n = basis.len();
        let mut starts = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for seg in &segments {
            seg.hamiltonian.check_indices(n)?;
            if seg.noise.size() != n {
                return invalid(format!(
                    "segment `{}` has noise of size {}, basis has {n}",
                    seg.name,
                    seg.noise.size()
                ));
            }
            starts.push(acc);
            acc += seg.duration();
        }
        Ok(LindbladGenerator {
            basis,
            structure,
            segments,
            starts,
        })
    }

    /// Single-segment generator.
    pub fn single(
        basis: Arc<OperatorBasis>,
        structure: Arc<StructureTensor>,
        hamiltonian: HamiltonianSchedule,
        noise: NoiseSchedule,
    ) -> Result<Self> {
        Self::new(
            basis,
            structure,
            vec![Segment {
                name: "op".into(),
                hamiltonian,
                noise,
            }],
        )
    }

    /// Single-segment generator with constant coefficients.
    pub fn constant(
        basis: Arc<OperatorBasis>,
        structure: Arc<StructureTensor>,
        h: &[f64],
        gamma: CMat,
        duration: f64,
    ) -> Result<Self> {
        let terms: Vec<(usize, f64)> = h
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(p, v)| (p, *v))
            .collect();
        Self::single(
            basis,
            structure,
            HamiltonianSchedule::constant(&terms, duration)?,
            NoiseSchedule::constant(gamma)?,
        )
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn structure(&self) -> &Arc<StructureTensor> {
        &self.structure
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Global start time of each segment.
    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn duration(&self) -> f64 {
        self.starts.last().unwrap() + self.segments.last().unwrap().duration()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn is_time_independent(&self) -> bool {
        self.segments.len() == 1
            && self.segments[0].hamiltonian.is_constant()
            && self.segments[0].noise.is_constant()
    }

    /// Segment containing global time `t` and the local time within it.
    /// Breakpoints belong to the later segment, except the final endpoint.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let k = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        (k, (t - self.starts[k]).max(0.0))
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let d = self.duration();
        if !(t >= 0.0 && t <= d + 1e-12 * d.max(1.0)) {
            return Err(Error::Domain(format!(
                "time {t} is outside the generator domain [0, {d}]"
            )));
        }
        Ok(())
    }

    /// `Ω(t)` on segment `k` at local time `tl`.
    pub fn omega_local(&self, k: usize, tl: f64) -> CMat {
        self.structure
            .omega(&self.segments[k].hamiltonian.coeffs_at(tl, self.n()))
    }

    pub fn gamma_local(&self, k: usize, tl: f64) -> CMat {
        self.segments[k].noise.at(tl)
    }

    /// Hilbert-space Hamiltonian on segment `k` at local time `tl`.
    pub fn hamiltonian_local(&self, k: usize, tl: f64) -> CMat {
        self.basis
            .real_operator(&self.segments[k].hamiltonian.coeffs_at(tl, self.n()))
    }

    pub fn omega(&self, t: f64) -> CMat {
        let (k, tl) = self.locate(t);
        self.omega_local(k, tl)
    }

    pub fn gamma(&self, t: f64) -> CMat {
        let (k, tl) = self.locate(t);
        self.gamma_local(k, tl)
    }

    pub fn hamiltonian(&self, t: f64) -> CMat {
        let (k, tl) = self.locate(t);
        self.hamiltonian_local(k, tl)
    }

    /// Noise strength `Tr Γ(t)`.
    pub fn strength(&self, t: f64) -> f64 {
        let (k, tl) = self.locate(t);
        self.segments[k].noise.strength_at(tl)
    }

    /// Largest `|Tr Γ|` over `samples` points per segment.
    pub fn max_strength(&self, samples: usize) -> f64 {
        let samples = samples.max(1);
        let mut worst: f64 = 0.0;
        for seg in &self.segments {
            for i in 0..=samples {
                let t = seg.duration() * i as f64 / samples as f64;
                worst = worst.max(seg.noise.strength_at(t).abs());
            }
        }
        worst
    }

    /// Splits `[0, t]` into per-segment pieces `(segment, local start, local
    /// end, steps)` with steps allotted proportionally to length, at least one
    /// per piece.
    pub(crate) fn pieces(&self, t: f64, steps: usize) -> Vec<(usize, f64, f64, usize)> {
        self.span_pieces(0.0, t, steps)
    }

    /// As [`pieces`](Self::pieces) for the global interval `[t0, t1]`.
    pub(crate) fn span_pieces(
        &self,
        t0: f64,
        t1: f64,
        steps: usize,
    ) -> Vec<(usize, f64, f64, usize)> {
        let mut out = Vec::new();
        if t1 <= t0 {
            return out;
        }
        for (k, seg) in self.segments.iter().enumerate() {
            let s0 = self.starts[k];
            let a = t0.max(s0);
            let b = t1.min(s0 + seg.duration());
            if b <= a {
                continue;
            }
            let n = ((steps as f64) * (b - a) / (t1 - t0)).round().max(1.0) as usize;
            out.push((k, a - s0, b - s0, n));
        }
        out
    }
}

/// Shared Pauli basis and structure tensor for `k` qubits.
pub fn pauli_system(k: usize) -> Result<(Arc<OperatorBasis>, Arc<StructureTensor>)> {
    let b = pauli_basis(k)?;
    let st = structure_tensor(&b);
    Ok((Arc::new(b), Arc::new(st)))
}

/// Index of the single-qubit Pauli `sym` acting on `qubit` in a `k`-qubit
/// Pauli basis.
pub fn local_pauli_index(sym: char, qubit: usize, k: usize) -> Result<usize> {
    if qubit >= k {
        return invalid(format!("qubit {qubit} out of range for {k} qubits"));
    }
    let digit = match sym {
        'X' => 1,
        'Y' => 2,
        'Z' => 3,
        _ => return invalid(format!("`{sym}` is not X, Y or Z")),
    };
    Ok((digit << (2 * (k - 1 - qubit))) - 1)
}

fn pauli_qubits(label: &BasisLabel) -> Result<usize> {
    match label {
        BasisLabel::Pauli { qubits } => Ok(*qubits),
        BasisLabel::GellMann { dim: 2 } => Ok(1),
        other => Err(Error::Unsupported(format!(
            "noise presets are defined in the Pauli basis, not {other}"
        ))),
    }
}

/// Pure dephasing of rate `γ` on one qubit: `(γ/2) Z_q ρ Z_q` plus the
/// matching anticommutator, so `d⟨X_q⟩/dt = −γ⟨X_q⟩`.
pub fn dephasing(gamma: f64, qubit: usize, basis: &OperatorBasis) -> Result<CMat> {
    let k = pauli_qubits(basis.label())?;
    let z = local_pauli_index('Z', qubit, k)?;
    let mut g = CMat::zeros(basis.len(), basis.len());
    g[(z, z)] = c(gamma / 2.0, 0.0);
    Ok(g)
}

/// Amplitude damping `γ(σ₊ρσ₋ − ½{σ₋σ₊, ρ})` on one qubit with
/// `σ₊ = (X + iY)/2 = |0⟩⟨1|`, i.e. decay towards `|0⟩`.
pub fn damping(gamma: f64, qubit: usize, basis: &OperatorBasis) -> Result<CMat> {
    let k = pauli_qubits(basis.label())?;
    let x = local_pauli_index('X', qubit, k)?;
    let y = local_pauli_index('Y', qubit, k)?;
    let q = gamma / 4.0;
    let mut g = CMat::zeros(basis.len(), basis.len());
    g[(x, x)] = c(q, 0.0);
    g[(y, y)] = c(q, 0.0);
    g[(x, y)] = c(0.0, -q);
    g[(y, x)] = c(0.0, q);
    Ok(g)
}

/// Depolarizing noise `Γ = α·1` over the whole basis.
pub fn depolarizing(alpha: f64, n: usize) -> CMat {
    CMat::identity(n, n).scale(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn sampled_interpolates() {
        let s = Coefficient::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.eval(0.5), 1.0);
        assert_eq!(s.eval(1.5), 1.0);
        assert_eq!(s.eval(-1.0), 0.0);
        assert_eq!(s.eval(5.0), 0.0);
        assert!(Coefficient::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn schedule_domain() {
        let h = HamiltonianSchedule::constant(&[(0, 1.0)], 2.0).unwrap();
        assert!(h.check_time(0.0).is_ok());
        assert!(h.check_time(2.0).is_ok());
        assert!(h.check_time(2.1).is_err());
        assert!(h.check_time(-0.1).is_err());
        assert!(HamiltonianSchedule::new(-1.0).is_err());
    }

    #[test]
    fn locate_segments() {
        let (b, st) = pauli_system(1).unwrap();
        let seg = |d: f64| Segment {
            name: "s".into(),
            hamiltonian: HamiltonianSchedule::new(d).unwrap(),
            noise: NoiseSchedule::zero(3),
        };
        let g = LindbladGenerator::new(b, st, vec![seg(1.0), seg(2.0)]).unwrap();
        assert_eq!(g.duration(), 3.0);
        assert_eq!(g.locate(0.5), (0, 0.5));
        assert_eq!(g.locate(1.0), (1, 0.0));
        assert_eq!(g.locate(3.0), (1, 2.0));
        let p = g.pieces(3.0, 300);
        assert_eq!(p, vec![(0, 0.0, 1.0, 100), (1, 0.0, 2.0, 200)]);
        let p = g.pieces(0.5, 10);
        assert_eq!(p, vec![(0, 0.0, 0.5, 10)]);
    }

    #[test]
    fn local_indices() {
        let b = pauli_basis(2).unwrap();
        for (sym, q, name) in [('Z', 0, "ZI"), ('X', 1, "IX"), ('Y', 0, "YI"), ('Z', 1, "IZ")] {
            let i = local_pauli_index(sym, q, 2).unwrap();
            assert_eq!(b.names()[i], name);
        }
    }

    #[test]
    fn presets() {
        let b = pauli_basis(1).unwrap();
        let d = dephasing(0.4, 0, &b).unwrap();
        assert_eq!(d[(2, 2)], c(0.2, 0.0));
        let a = damping(0.4, 0, &b).unwrap();
        assert!(hermitian_residual(&a) == 0.0);
        assert_eq!(a[(0, 1)], c(0.0, -0.1));
        let gm = crate::basis::gell_mann_basis(3).unwrap();
        assert!(dephasing(0.1, 0, &gm).is_err());
    }

    #[test]
    fn time_dependent_noise() {
        let w = Coefficient::Expr(parse_expr("sin(t)^2").unwrap());
        let n = NoiseSchedule::zero(3)
            .with_term(w, CMat::identity(3, 3))
            .unwrap();
        assert!(!n.is_constant());
        assert!((n.strength_at(1.0) - 3.0 * 1f64.sin().powi(2)).abs() < 1e-15);
        let bad = NoiseSchedule::zero(3).with_term(1.0, CMat::from_element(3, 3, c(0.0, 1.0)));
        assert!(bad.is_err());
    }
}
