//! `sepnoise` command-line driver.
//!
//! Exit codes: 0 on success, 1 when a numerical check or validation fails,
//! 2 for configuration, usage and file errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use sepnoise::config::ExperimentConfig;
use sepnoise::gate::{compile_monolithic, compile_per_op, gate_fidelity_check};
use sepnoise::output::{gate_noise_json, matrix_json, num, rate_matrix_json, reals, separated_json, to_pretty};
use sepnoise::separated::{choi_of_k, residual_components, separate, steady_state, Route};
use sepnoise::validation::{
    closed_form_suite, compare_with_separated, consistency_suite, fig1_suite, full_suite,
    scaling_suite, time_grid, ValidationReport,
};
use sepnoise::{Error, RateMatrix};

#[derive(Parser, Debug)]
#[command(name = "sepnoise", version, about = "Separated-noise and gate-noise compilation for Lindblad dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Operation angle θ = 2·J·t_op; overrides `[run] t_op`.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Value of the `gamma` parameter.
    #[arg(long, value_name = "FLOAT")]
    gamma: Option<f64>,
    /// Integration steps; overrides `[run] steps`.
    #[arg(long, value_name = "INT")]
    steps: Option<usize>,
    /// Separation route; overrides `[run] route`.
    #[arg(long, value_enum)]
    route: Option<RouteArg>,
    /// Tolerance for the subcommand's numerical check.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteArg {
    Integral,
    Ode,
    Spectral,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Route {
        match r {
            RouteArg::Integral => Route::Integral,
            RouteArg::Ode => Route::Ode,
            RouteArg::Spectral => Route::Spectral,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    PerOp,
    Monolithic,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Suite {
    All,
    ClosedForm,
    Consistency,
    Scaling,
    Fig1,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Separated noise of the `[hamiltonian]`/`[noise]` generator over `t_op`.
    Separate(Common),
    /// Gate noise of the `[op]` sequence.
    Compile {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "per-op")]
        method: Method,
    },
    /// Observables along the exact and separated evolutions, as CSV.
    Simulate(Common),
    /// Runs the validation suite.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Seed for the randomized cases.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Also write a JUnit XML summary.
        #[arg(long, value_name = "PATH")]
        junit: Option<PathBuf>,
    },
    /// Steady-state separated noise and the residual at θ.
    Steady(Common),
    /// Choi matrix spectrum of the separation map.
    Choi(Common),
    /// Separated-noise rates over a θ grid, as CSV.
    Sweep(Common),
}

#[derive(Debug)]
enum Failure {
    /// Configuration, usage or I/O problem.
    Config(String),
    /// Numerical check failed; the report has been written.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) => Failure::Check(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Separate(c) => cmd_separate(&c),
        Command::Compile { common, method } => cmd_compile(&common, method),
        Command::Simulate(c) => cmd_simulate(&c),
        Command::Validate {
            common,
            suite,
            seed,
            junit,
        } => cmd_validate(&common, suite, seed, junit.as_deref()),
        Command::Steady(c) => cmd_steady(&c),
        Command::Choi(c) => cmd_choi(&c),
        Command::Sweep(c) => cmd_sweep(&c),
    }
}

/// Loads the config and applies the command-line overrides.
fn load(c: &Common) -> CliResult<ExperimentConfig> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    if !path.exists() {
        return Err(Failure::Config(format!("config file {} not found", path.display())));
    }
    let mut cfg = ExperimentConfig::from_path(path).map_err(|e| match e {
        Error::Io(io) => Failure::Config(format!("{}: {io}", path.display())),
        other => Failure::Config(format!("{}: {other}", path.display())),
    })?;
    if let Some(g) = c.gamma {
        if !cfg.params()?.contains_key("gamma") {
            return Err(Failure::Config("--gamma given but the config has no `gamma` parameter".into()));
        }
        cfg.set_param("gamma", g);
    }
    if let Some(n) = c.steps {
        cfg.set("run", "steps", n.to_string());
    }
    if let Some(r) = c.route {
        cfg.set("run", "route", Route::from(r).to_string());
    }
    if let Some(theta) = c.theta {
        if !(theta > 0.0) {
            return Err(Failure::Config("--theta must be positive".into()));
        }
        let j = cfg.energy_scale()?;
        cfg.set("run", "t_op", format!("{:?}", theta / (2.0 * j)));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn t_op(cfg: &ExperimentConfig) -> CliResult<f64> {
    cfg.t_op()?
        .ok_or_else(|| Failure::Config("no operation time: set [run] t_op or pass --theta".into()))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_separate(c: &Common) -> CliResult<()> {
    let cfg = load(c)?;
    let t = t_op(&cfg)?;
    let gen = cfg.generator(t)?;
    let res = separate(&gen, t, cfg.steps()?, cfg.route()?)?;
    let theta = 2.0 * cfg.energy_scale()? * t;
    write_out(c.out.as_deref(), &to_pretty(&separated_json(&res, Some(theta))?))
}

fn cmd_compile(c: &Common, method: Method) -> CliResult<()> {
    let cfg = load(c)?;
    let spec = cfg.gate_spec()?;
    let noise = match method {
        Method::PerOp => compile_per_op(&spec)?,
        Method::Monolithic => compile_monolithic(&spec)?,
    };
    let mut v = gate_noise_json(&noise)?;
    if let Some(tol) = c.tol {
        let rho0 = cfg.initial_state()?;
        let report = gate_fidelity_check(&spec, &rho0, tol, None)?;
        let mut o = Map::new();
        o.insert("trace_distance".into(), num(report.trace_distance));
        o.insert("tol".into(), num(tol));
        o.insert("pass".into(), Value::Bool(report.pass));
        v["fidelity_check"] = Value::Object(o);
        write_out(c.out.as_deref(), &to_pretty(&v))?;
        if !report.pass {
            return Err(Failure::Check(format!(
                "trace distance {:.3e} exceeds {tol:.1e}",
                report.trace_distance
            )));
        }
        return Ok(());
    }
    write_out(c.out.as_deref(), &to_pretty(&v))
}

fn cmd_simulate(c: &Common) -> CliResult<()> {
    let cfg = load(c)?;
    let t_max = match cfg.t_max()? {
        Some(t) => t,
        None => t_op(&cfg)?,
    };
    if !(t_max > 0.0) {
        return Err(Failure::Config("t_max must be positive".into()));
    }
    let gen = cfg.generator(t_max)?;
    let obs = cfg.observables()?;
    let rho0 = cfg.initial_state()?;
    let steps = c.steps;
    let cmp = compare_with_separated(&gen, &rho0, &time_grid(t_max, cfg.grid()?), &obs, steps)?;

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["t".to_string()];
        for l in &cmp.labels {
            header.push(format!("{l}_exact"));
            header.push(format!("{l}_separated"));
        }
        w.write_record(&header)?;
        for (i, t) in cmp.times.iter().enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            for k in 0..cmp.labels.len() {
                row.push(format!("{:.16e}", cmp.exact[i][k]));
                row.push(format!("{:.16e}", cmp.separated[i][k]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    write_out(c.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    for (l, d) in cmp.labels.iter().zip(&cmp.max_deviation) {
        eprintln!("max |{l}_exact - {l}_separated| = {d:.6e}");
        if let Some(tol) = c.tol {
            if *d > tol {
                return Err(Failure::Check(format!("{l} deviation {d:.3e} exceeds {tol:.1e}")));
            }
        }
    }
    Ok(())
}

fn cmd_validate(c: &Common, suite: Suite, seed: u64, junit: Option<&Path>) -> CliResult<()> {
    let report: ValidationReport = match suite {
        Suite::All => full_suite(seed)?,
        Suite::ClosedForm => closed_form_suite()?,
        Suite::Consistency => consistency_suite(seed)?,
        Suite::Scaling => scaling_suite()?,
        Suite::Fig1 => fig1_suite()?,
    };
    print!("{}", report.summary());
    if let Some(path) = &c.out {
        fs::write(path, to_pretty(&report.to_json()))?;
    }
    if let Some(path) = junit {
        fs::write(path, report.junit_xml())?;
    }
    if report.pass() {
        Ok(())
    } else {
        let ids: Vec<&str> = report.failures().map(|f| f.id.as_str()).collect();
        Err(Failure::Check(format!("failing cases: {}", ids.join(", "))))
    }
}

/// Γ^D and Ω of a time-independent single-segment config.
fn constant_parts(cfg: &ExperimentConfig) -> CliResult<(RateMatrix, sepnoise::CMat)> {
    let gen = cfg.generator(1.0)?;
    if !gen.is_time_independent() {
        return Err(Failure::Config("this subcommand needs time-independent coefficients".into()));
    }
    let gamma = RateMatrix::new(gen.gamma(0.0), gen.basis().label().clone())?;
    Ok((gamma, gen.omega(0.0)))
}

fn cmd_steady(c: &Common) -> CliResult<()> {
    let cfg = load(c)?;
    let (gamma, omega) = constant_parts(&cfg)?;
    let ss = steady_state(&gamma, &omega)?;
    let mut o = Map::new();
    o.insert("steady_state".into(), rate_matrix_json(&ss)?);
    if let Some(t) = cfg.t_op()? {
        let j = cfg.energy_scale()?;
        let theta = 2.0 * j * t;
        let parts = residual_components(&gamma, &omega, j, theta)?;
        let total = parts
            .iter()
            .fold(sepnoise::CMat::zeros(gamma.len(), gamma.len()), |acc, p| acc + p.at_theta());
        let comps: Vec<Value> = parts
            .iter()
            .map(|p| {
                let mut e = Map::new();
                e.insert("eta".into(), num(p.eta));
                e.insert("amplitude".into(), num(p.amplitude()));
                e.insert("factor".into(), reals(&[p.factor.re, p.factor.im]));
                Value::Object(e)
            })
            .collect();
        o.insert("theta".into(), num(theta));
        o.insert("residual".into(), matrix_json(&total));
        o.insert("components".into(), Value::Array(comps));
    }
    write_out(c.out.as_deref(), &to_pretty(&Value::Object(o)))
}

fn cmd_choi(c: &Common) -> CliResult<()> {
    let cfg = load(c)?;
    let t = t_op(&cfg)?;
    let (_, omega) = constant_parts(&cfg)?;
    let ch = choi_of_k(&omega, t)?;
    let tol = c.tol.unwrap_or(1e-8);
    let min = ch.eigenvalues.first().copied().unwrap_or(0.0);
    let mut o = Map::new();
    o.insert("theta".into(), num(2.0 * cfg.energy_scale()? * t));
    o.insert("eigenvalues".into(), reals(&ch.eigenvalues));
    o.insert("min_eigenvalue".into(), num(min));
    o.insert("tol".into(), num(tol));
    o.insert("positive".into(), Value::Bool(min >= -tol));
    write_out(c.out.as_deref(), &to_pretty(&Value::Object(o)))?;
    if min < -tol {
        return Err(Failure::Check(format!("Choi matrix has eigenvalue {min:.3e}")));
    }
    Ok(())
}

fn cmd_sweep(c: &Common) -> CliResult<()> {
    let cfg = load(c)?;
    let j = cfg.energy_scale()?;
    let theta_max = match (c.theta, cfg.theta_max()?) {
        (Some(t), _) => t,
        (None, Some(t)) => t,
        (None, None) => 2.0 * std::f64::consts::PI,
    };
    let grid = cfg.grid()?;
    let steps = cfg.steps()?;
    let route = cfg.route()?;
    let thetas: Vec<f64> = (1..=grid).map(|i| theta_max * i as f64 / grid as f64).collect();
    let rows: Vec<sepnoise::Result<(f64, f64, Vec<f64>)>> = thetas
        .par_iter()
        .map(|&theta| {
            let t = theta / (2.0 * j);
            let gen = cfg.generator(t)?;
            let res = separate(&gen, t, steps, route)?;
            Ok((theta, res.gamma_s.strength(), res.gamma_s.eigenvalues()?))
        })
        .collect();
    let n = cfg.system()?.0.len();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["theta".to_string(), "strength".to_string()];
        header.extend((0..n).map(|k| format!("rate_{k}")));
        w.write_record(&header)?;
        for row in rows {
            let (theta, strength, rates) = row?;
            let mut rec = vec![format!("{theta:.16e}"), format!("{strength:.16e}")];
            rec.extend(rates.iter().map(|r| format!("{r:.16e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    write_out(c.out.as_deref(), &String::from_utf8_lossy(&buf))
}
