//! Experiment configuration files.
//!
//! The format is line oriented. `#` starts a comment outside quotes, `[name]`
//! opens a section and `key = value` sets an entry; values are bare tokens or
//! double-quoted strings. Recognized sections:
//!
//! ```text
//! [system]       qubits = 1 | dim = 3, basis = pauli | gell_mann
//! [params]       name = expr           named constants, usable in later expressions
//! [hamiltonian]  LABEL = expr          coefficient of basis element LABEL (X, XZ, L7, ...)
//! [noise]        dephasing[.q] = expr  (expr/2) on Z_q
//!                damping[.q] = expr    decay toward |0⟩ on qubit q (jump |0⟩⟨1|)
//!                depolarizing = expr   expr·1 on the whole basis
//!                custom.R.C = expr     real part of Γ_RC (mirrored to Γ_CR)
//!                custom.R.C.im = expr  imaginary part of Γ_RC (negated in Γ_CR)
//! [run]          t_op, steps, route = integral | ode | spectral, energy_scale
//! [output]       observables = X, Y, grid, t_max, initial = basis-state index,
//!                theta_max (sweeps)
//! [op]           repeatable gate operation: name, duration, idle, H.LABEL = expr,
//!                noise.KEY = expr with KEY as in [noise]
//! ```
//!
//! Coefficient expressions may use `t` (local time of the segment), `pi` and
//! every parameter declared above them. Noise entries are time-dependent
//! weights on fixed matrices, so `dephasing = "gamma*sin(t)^2"` is allowed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::basis::{gell_mann_basis, pauli_basis, structure_tensor, OperatorBasis, StructureTensor};
use crate::error::{Error, Result};
use crate::expr::{parse_expr_with, CoeffExpr};
use crate::gate::{GateOp, GateSpec};
use crate::integrator::DensityMatrix;
use crate::linalg::{c, CMat};
use crate::schedule::{
    damping, dephasing, depolarizing, Coefficient, HamiltonianSchedule, LindbladGenerator,
    NoiseSchedule,
};
use crate::separated::Route;
use crate::superop::DEFAULT_PROPAGATOR_STEPS;

const SECTIONS: [&str; 7] = ["system", "params", "hamiltonian", "noise", "run", "output", "op"];

#[derive(Clone, Debug)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Entries compare by content only.
impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.value == other.value
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
    pub line: usize,
}

impl PartialEq for Section {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.entries == other.entries
    }
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub sections: Vec<Section>,
}

fn cfg_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config {
        line,
        msg: msg.into(),
    })
}

fn split_comment(raw: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in raw.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &raw[..i],
            _ => {}
        }
    }
    raw
}

fn parse_value(text: &str, line: usize) -> Result<String> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix('"') {
        match rest.find('"') {
            Some(end) if rest[end + 1..].trim().is_empty() => Ok(rest[..end].to_string()),
            Some(_) => cfg_err(line, "unexpected text after closing quote"),
            None => cfg_err(line, "unterminated string"),
        }
    } else if text.contains('"') {
        cfg_err(line, "stray quote in bare value")
    } else if text.is_empty() {
        cfg_err(line, "missing value")
    } else {
        Ok(text.to_string())
    }
}

fn is_bare(value: &str) -> bool {
    !value.is_empty()
        && value
            .chars()
            .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '_' | '.' | '-' | '+'))
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '_' | '.'))
}

impl ExperimentConfig {
    /// Parses and fully resolves a configuration.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Self::parse_syntax(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the section/entry structure without resolving anything.
    pub fn parse_syntax(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = split_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = match rest.strip_suffix(']') {
                    Some(n) => n.trim(),
                    None => return cfg_err(line, "section header is missing `]`"),
                };
                if !SECTIONS.contains(&name) {
                    return cfg_err(line, format!("unknown section `[{name}]`"));
                }
                if name != "op" && sections.iter().any(|s| s.name == name) {
                    return cfg_err(line, format!("section `[{name}]` appears twice"));
                }
                sections.push(Section {
                    name: name.to_string(),
                    entries: Vec::new(),
                    line,
                });
                continue;
            }
            let (key, value) = match body.split_once('=') {
                Some(kv) => kv,
                None => return cfg_err(line, "expected `key = value`"),
            };
            let key = key.trim();
            if !valid_key(key) {
                return cfg_err(line, format!("invalid key `{key}`"));
            }
            let value = parse_value(value, line)?;
            let section = match sections.last_mut() {
                Some(s) => s,
                None => return cfg_err(line, "entry before any section header"),
            };
            if section.get(key).is_some() {
                return cfg_err(line, format!("duplicate key `{key}`"));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value,
                line,
            });
        }
        Ok(ExperimentConfig { sections })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn section_mut(&mut self, name: &str) -> &mut Section {
        if let Some(i) = self.sections.iter().position(|s| s.name == name) {
            return &mut self.sections[i];
        }
        self.sections.push(Section {
            name: name.to_string(),
            entries: Vec::new(),
            line: 0,
        });
        self.sections.last_mut().unwrap()
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.section(section).and_then(|s| s.get(key))
    }

    /// Sets (or adds) an entry, e.g. a command-line override.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        let value = value.into();
        let s = self.section_mut(section);
        match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => s.entries.push(Entry {
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
    }

    /// Overrides a named parameter with a numeric value.
    pub fn set_param(&mut self, name: &str, value: f64) {
        self.set("params", name, format!("{value:?}"));
    }

    /// Checks that every entry resolves: basis, parameters, expressions,
    /// labels and option values.
    pub fn validate(&self) -> Result<()> {
        let (basis, _) = self.system()?;
        let env = self.params()?;
        if let Some(s) = self.section("system") {
            for e in &s.entries {
                if !matches!(e.key.as_str(), "qubits" | "dim" | "basis") {
                    return cfg_err(e.line, format!("unknown key `{}` in [system]", e.key));
                }
            }
        }
        self.hamiltonian_in(self.section("hamiltonian"), "", &basis, &env, 1.0)?;
        self.noise_in(self.section("noise"), "", &basis, &env)?;
        self.check_run(&env)?;
        self.check_output(&basis, &env)?;
        if self.has_ops() {
            self.gate_spec()?;
        }
        Ok(())
    }

    /// Operator basis and structure tensor from `[system]`.
    pub fn system(&self) -> Result<(Arc<OperatorBasis>, Arc<StructureTensor>)> {
        let qubits = match self.entry("system", "qubits") {
            Some(e) => Some(parse_count(e)?),
            None => None,
        };
        let dim = match self.entry("system", "dim") {
            Some(e) => Some(parse_count(e)?),
            None => None,
        };
        let kind = self
            .entry("system", "basis")
            .map(|e| (e.value.as_str(), e.line))
            .unwrap_or(("pauli", 0));
        let basis = match kind {
            ("pauli", line) => {
                if dim.is_some() {
                    return cfg_err(line, "the Pauli basis is sized by `qubits`, not `dim`");
                }
                let k = qubits.unwrap_or(1);
                if k > 3 {
                    return cfg_err(line, "at most 3 qubits are supported");
                }
                pauli_basis(k).or_else(|e| cfg_err(line, e.to_string()))?
            }
            ("gell_mann", line) => {
                let d = match (dim, qubits) {
                    (Some(d), None) => d,
                    (None, Some(k)) if k <= 3 => 1 << k,
                    (None, None) => 2,
                    _ => return cfg_err(line, "give either `dim` or `qubits`"),
                };
                if d > 8 {
                    return cfg_err(line, "dimension above 8 is not supported");
                }
                gell_mann_basis(d).or_else(|e| cfg_err(line, e.to_string()))?
            }
            (other, line) => return cfg_err(line, format!("unknown basis `{other}`")),
        };
        let st = structure_tensor(&basis);
        Ok((Arc::new(basis), Arc::new(st)))
    }

    /// Parameter values, evaluated in file order.
    pub fn params(&self) -> Result<BTreeMap<String, f64>> {
        let mut env = BTreeMap::new();
        if let Some(s) = self.section("params") {
            for e in &s.entries {
                if e.key.contains('.') || matches!(e.key.as_str(), "t" | "pi") {
                    return cfg_err(e.line, format!("`{}` cannot be a parameter name", e.key));
                }
                let x = expr(e, &env)?;
                if !x.is_constant() {
                    return cfg_err(e.line, "parameters cannot depend on `t`");
                }
                env.insert(e.key.clone(), x.eval(0.0));
            }
        }
        Ok(env)
    }

    fn hamiltonian_in(
        &self,
        section: Option<&Section>,
        prefix: &str,
        basis: &OperatorBasis,
        env: &BTreeMap<String, f64>,
        duration: f64,
    ) -> Result<HamiltonianSchedule> {
        let mut h = HamiltonianSchedule::new(duration)?;
        let Some(section) = section else {
            return Ok(h);
        };
        for e in &section.entries {
            let Some(label) = e.key.strip_prefix(prefix) else {
                continue;
            };
            let idx = match basis.index_of(label) {
                Some(i) => i,
                None => return cfg_err(e.line, format!("`{label}` is not a basis label")),
            };
            h = h.with_term(idx, coefficient(expr(e, env)?));
        }
        Ok(h)
    }

    fn noise_in(
        &self,
        section: Option<&Section>,
        prefix: &str,
        basis: &OperatorBasis,
        env: &BTreeMap<String, f64>,
    ) -> Result<NoiseSchedule> {
        let mut noise = NoiseSchedule::zero(basis.len());
        let Some(section) = section else {
            return Ok(noise);
        };
        for e in &section.entries {
            let Some(key) = e.key.strip_prefix(prefix) else {
                continue;
            };
            let weight = coefficient(expr(e, env)?);
            let matrix = noise_matrix(key, basis).or_else(|err| match err {
                Error::Config { msg, .. } => cfg_err(e.line, msg),
                other => cfg_err(e.line, other.to_string()),
            })?;
            noise = noise.with_term(weight, matrix)?;
        }
        Ok(noise)
    }

    /// Hamiltonian from `[hamiltonian]` over `duration`.
    pub fn hamiltonian(&self, duration: f64) -> Result<HamiltonianSchedule> {
        let (basis, _) = self.system()?;
        self.hamiltonian_in(self.section("hamiltonian"), "", &basis, &self.params()?, duration)
    }

    /// Hardware noise from `[noise]`.
    pub fn noise(&self) -> Result<NoiseSchedule> {
        let (basis, _) = self.system()?;
        self.noise_in(self.section("noise"), "", &basis, &self.params()?)
    }

    fn run_expr(&self, key: &str, env: &BTreeMap<String, f64>) -> Result<Option<f64>> {
        match self.entry("run", key) {
            Some(e) => {
                let x = expr(e, env)?;
                if !x.is_constant() {
                    return cfg_err(e.line, format!("`{key}` cannot depend on `t`"));
                }
                Ok(Some(x.eval(0.0)))
            }
            None => Ok(None),
        }
    }

    fn check_run(&self, env: &BTreeMap<String, f64>) -> Result<()> {
        if let Some(s) = self.section("run") {
            for e in &s.entries {
                if !matches!(e.key.as_str(), "t_op" | "steps" | "route" | "energy_scale") {
                    return cfg_err(e.line, format!("unknown key `{}` in [run]", e.key));
                }
            }
        }
        if let Some(t) = self.run_expr("t_op", env)? {
            if !(t > 0.0) {
                let line = self.entry("run", "t_op").map(|e| e.line).unwrap_or(0);
                return cfg_err(line, "t_op must be positive");
            }
        }
        if let Some(j) = self.run_expr("energy_scale", env)? {
            if !(j > 0.0) {
                let line = self.entry("run", "energy_scale").map(|e| e.line).unwrap_or(0);
                return cfg_err(line, "energy_scale must be positive");
            }
        }
        self.steps()?;
        self.route()?;
        Ok(())
    }

    /// `[run] t_op`, if present.
    pub fn t_op(&self) -> Result<Option<f64>> {
        self.run_expr("t_op", &self.params()?)
    }

    /// `[run] energy_scale`, default 1.
    pub fn energy_scale(&self) -> Result<f64> {
        Ok(self.run_expr("energy_scale", &self.params()?)?.unwrap_or(1.0))
    }

    pub fn steps(&self) -> Result<usize> {
        match self.entry("run", "steps") {
            Some(e) => parse_count(e),
            None => Ok(DEFAULT_PROPAGATOR_STEPS),
        }
    }

    pub fn route(&self) -> Result<Route> {
        match self.entry("run", "route") {
            Some(e) => e
                .value
                .parse()
                .or_else(|_| cfg_err(e.line, format!("unknown route `{}`", e.value))),
            None => Ok(Route::Ode),
        }
    }

    /// Single-segment generator of `[hamiltonian]` and `[noise]` over `t_op`.
    pub fn generator(&self, t_op: f64) -> Result<LindbladGenerator> {
        let (basis, st) = self.system()?;
        let env = self.params()?;
        let h = self.hamiltonian_in(self.section("hamiltonian"), "", &basis, &env, t_op)?;
        let noise = self.noise_in(self.section("noise"), "", &basis, &env)?;
        LindbladGenerator::single(basis, st, h, noise)
    }

    pub fn has_ops(&self) -> bool {
        self.sections.iter().any(|s| s.name == "op")
    }

    /// Gate specification from the `[op]` sections.
    pub fn gate_spec(&self) -> Result<GateSpec> {
        let (basis, st) = self.system()?;
        let env = self.params()?;
        let hardware = self.noise_in(self.section("noise"), "", &basis, &env)?;
        let mut spec = GateSpec::new(Arc::clone(&basis), st, hardware);
        spec.steps = self.steps()?;
        spec.route = self.route()?;
        for (k, s) in self.sections.iter().filter(|s| s.name == "op").enumerate() {
            for e in &s.entries {
                let known = matches!(e.key.as_str(), "name" | "duration" | "idle")
                    || e.key.starts_with("H.")
                    || e.key.starts_with("noise.");
                if !known {
                    return cfg_err(e.line, format!("unknown key `{}` in [op]", e.key));
                }
            }
            let name = s
                .get("name")
                .map(|e| e.value.clone())
                .unwrap_or_else(|| format!("op{}", k + 1));
            let duration = match s.get("duration") {
                Some(e) => constant(e, &env)?,
                None => return cfg_err(s.line, "[op] needs a duration"),
            };
            if !(duration > 0.0) {
                return cfg_err(s.get("duration").unwrap().line, "duration must be positive");
            }
            let idle = match s.get("idle") {
                Some(e) => constant(e, &env)?,
                None => 0.0,
            };
            if !(idle >= 0.0) {
                return cfg_err(s.get("idle").unwrap().line, "idle must be non-negative");
            }
            let h = self.hamiltonian_in(Some(s), "H.", &basis, &env, duration)?;
            let mut op = GateOp::new(name, h).with_idle(idle);
            if s.entries.iter().any(|e| e.key.starts_with("noise.")) {
                op = op.with_noise(self.noise_in(Some(s), "noise.", &basis, &env)?);
            }
            spec = spec.with_op(op);
        }
        if spec.ops.is_empty() {
            return cfg_err(0, "no [op] sections");
        }
        Ok(spec)
    }

    fn check_output(&self, basis: &OperatorBasis, env: &BTreeMap<String, f64>) -> Result<()> {
        if let Some(s) = self.section("output") {
            for e in &s.entries {
                match e.key.as_str() {
                    "observables" => {
                        self.observables_for(basis)?;
                    }
                    "grid" => {
                        parse_count(e)?;
                    }
                    "initial" => {
                        parse_count_allow_zero(e)?;
                    }
                    "t_max" | "theta_max" => {
                        constant(e, env)?;
                    }
                    other => return cfg_err(e.line, format!("unknown key `{other}` in [output]")),
                }
            }
        }
        self.initial_state()?;
        Ok(())
    }

    fn observables_for(&self, basis: &OperatorBasis) -> Result<Vec<(String, CMat)>> {
        let Some(e) = self.entry("output", "observables") else {
            return Ok(vec![(basis.names()[0].clone(), basis.op(0).clone())]);
        };
        let mut out = Vec::new();
        for label in e.value.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            match basis.index_of(label) {
                Some(i) => out.push((label.to_string(), basis.op(i).clone())),
                None => return cfg_err(e.line, format!("`{label}` is not a basis label")),
            }
        }
        if out.is_empty() {
            return cfg_err(e.line, "no observables listed");
        }
        Ok(out)
    }

    /// Observables named in `[output]` (default: the first basis element).
    pub fn observables(&self) -> Result<Vec<(String, CMat)>> {
        let (basis, _) = self.system()?;
        self.observables_for(&basis)
    }

    pub fn grid(&self) -> Result<usize> {
        match self.entry("output", "grid") {
            Some(e) => parse_count(e),
            None => Ok(64),
        }
    }

    fn output_constant(&self, key: &str) -> Result<Option<f64>> {
        let env = self.params()?;
        self.entry("output", key).map(|e| constant(e, &env)).transpose()
    }

    pub fn t_max(&self) -> Result<Option<f64>> {
        self.output_constant("t_max")
    }

    pub fn theta_max(&self) -> Result<Option<f64>> {
        self.output_constant("theta_max")
    }

    /// `|i⟩⟨i|` for `[output] initial = i` (default 0).
    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let (basis, _) = self.system()?;
        let i = match self.entry("output", "initial") {
            Some(e) => {
                let i = parse_count_allow_zero(e)?;
                if i >= basis.dim() {
                    return cfg_err(e.line, "initial state index exceeds the dimension");
                }
                i
            }
            None => 0,
        };
        DensityMatrix::basis_state(basis.dim(), i)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{}]", s.name)?;
            for e in &s.entries {
                if is_bare(&e.value) {
                    writeln!(f, "{} = {}", e.key, e.value)?;
                } else {
                    writeln!(f, "{} = \"{}\"", e.key, e.value)?;
                }
            }
        }
        Ok(())
    }
}

fn expr(e: &Entry, env: &BTreeMap<String, f64>) -> Result<CoeffExpr> {
    parse_expr_with(&e.value, env).or_else(|err| match err {
        Error::Parse { pos, msg } => cfg_err(e.line, format!("`{}`: {msg} at byte {pos}", e.key)),
        Error::Name { pos, name } => {
            cfg_err(e.line, format!("`{}`: unknown name `{name}` at byte {pos}", e.key))
        }
        other => Err(other),
    })
}

fn constant(e: &Entry, env: &BTreeMap<String, f64>) -> Result<f64> {
    let x = expr(e, env)?;
    if !x.is_constant() {
        return cfg_err(e.line, format!("`{}` cannot depend on `t`", e.key));
    }
    Ok(x.eval(0.0))
}

fn coefficient(x: CoeffExpr) -> Coefficient {
    if x.is_constant() {
        Coefficient::Constant(x.eval(0.0))
    } else {
        Coefficient::Expr(x)
    }
}

fn parse_count_allow_zero(e: &Entry) -> Result<usize> {
    e.value
        .parse::<usize>()
        .or_else(|_| cfg_err(e.line, format!("`{}` must be a non-negative integer", e.key)))
}

fn parse_count(e: &Entry) -> Result<usize> {
    match parse_count_allow_zero(e)? {
        0 => cfg_err(e.line, format!("`{}` must be positive", e.key)),
        n => Ok(n),
    }
}

/// Fixed matrix of a noise key such as `dephasing.1` or `custom.X.Y.im`.
fn noise_matrix(key: &str, basis: &OperatorBasis) -> Result<CMat> {
    let parts: Vec<&str> = key.split('.').collect();
    let qubit = |p: Option<&&str>| -> Result<usize> {
        match p {
            None => Ok(0),
            Some(q) => q
                .parse::<usize>()
                .or_else(|_| cfg_err(0, format!("`{q}` is not a qubit index"))),
        }
    };
    match parts[0] {
        "dephasing" if parts.len() <= 2 => dephasing(1.0, qubit(parts.get(1))?, basis),
        "damping" if parts.len() <= 2 => damping(1.0, qubit(parts.get(1))?, basis),
        "depolarizing" if parts.len() == 1 => Ok(depolarizing(1.0, basis.len())),
        "custom" if parts.len() == 3 || (parts.len() == 4 && parts[3] == "im") => {
            let index = |label: &str| {
                basis
                    .index_of(label)
                    .ok_or_else(|| Error::Config {
                        line: 0,
                        msg: format!("`{label}` is not a basis label"),
                    })
            };
            let (r, col) = (index(parts[1])?, index(parts[2])?);
            let mut m = CMat::zeros(basis.len(), basis.len());
            if parts.len() == 3 {
                m[(r, col)] += c(1.0, 0.0);
                if r != col {
                    m[(col, r)] += c(1.0, 0.0);
                }
            } else {
                if r == col {
                    return cfg_err(0, "diagonal rate entries are real");
                }
                m[(r, col)] = c(0.0, 1.0);
                m[(col, r)] = c(0.0, -1.0);
            }
            Ok(m)
        }
        _ => cfg_err(0, format!("unknown noise key `{key}`")),
    }
}
