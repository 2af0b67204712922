use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sepnoise::linalg::max_abs_diff;
use sepnoise::validation::{choi_eigenvalues, damping_rates, hadamard_reference};
use sepnoise::CMat;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepnoise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn cmat(v: &Value) -> CMat {
    let re = v["re"].as_array().unwrap();
    let n = re.len();
    CMat::from_fn(n, n, |i, j| {
        sepnoise::linalg::c(f(&v["re"][i][j]), f(&v["im"][i][j]))
    })
}

#[test]
#[allow(clippy::approx_constant)]
fn separate_dephasing_at_pi() {
    let out = run(&["separate", "--config", &cfg("dephasing.cfg"), "--theta", "3.14159"]);
    let v = json(&out);
    let gamma = 0.1;
    let eig: Vec<f64> = v["gamma_s"]["eigenvalues"].as_array().unwrap().iter().map(f).collect();
    assert!(eig[0].abs() < 1e-12);
    assert!((eig[1] - gamma / 4.0).abs() < 1e-6 && (eig[2] - gamma / 4.0).abs() < 1e-6, "{eig:?}");
    assert!((f(&v["theta"]) - 3.14159).abs() < 1e-12);
}

#[test]
fn separate_damping_rates() {
    let out = run(&["separate", "--config", &cfg("damping.cfg"), "--theta", "2.5"]);
    let v = json(&out);
    let eig: Vec<f64> = v["gamma_s"]["eigenvalues"].as_array().unwrap().iter().map(f).collect();
    for (a, b) in eig.iter().zip(&damping_rates(0.1, 2.5)) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn compile_hadamard() {
    for method in ["per-op", "monolithic"] {
        let out = run(&["compile", "--config", &cfg("hadamard.cfg"), "--method", method]);
        let v = json(&out);
        let g = cmat(&v["gamma_n"]["matrix"]);
        assert!(max_abs_diff(&g, &hadamard_reference(1.0)) < 1e-6, "{method}");
        assert!((f(&v["t_g"]) - 3.0).abs() < 1e-15);
    }
}

#[test]
fn compile_gamma_override_scales_noise() {
    let out = run(&["compile", "--config", &cfg("hadamard.cfg"), "--gamma", "0.01"]);
    let g = cmat(&json(&out)["gamma_n"]["matrix"]);
    assert!(max_abs_diff(&g, &hadamard_reference(0.01)) < 1e-8);
}

#[test]
fn compile_fidelity_gate() {
    let ok = run(&["compile", "--config", &cfg("hadamard.cfg"), "--gamma", "0.01", "--tol", "1e-3"]);
    let v = json(&ok);
    assert_eq!(v["fidelity_check"]["pass"], Value::Bool(true));
    let bad = run(&["compile", "--config", &cfg("hadamard.cfg"), "--tol", "1e-4"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn simulate_rotating_drive() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = run(&[
        "simulate",
        "--config",
        &cfg("fig1.cfg"),
        "--gamma",
        "0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,X_exact,X_separated,Y_exact,Y_separated,Z_exact,Z_separated"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 65);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[64][0] - 16.0).abs() < 1e-12);
    // Both curves start from |0⟩.
    assert!(rows[0][5] == 1.0 && rows[0][6] == 1.0);
    let dev = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    assert!(dev > 0.0 && dev < 0.05);

    let strict = run(&["simulate", "--config", &cfg("fig1.cfg"), "--tol", "1e-6", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&strict), 1);
}

#[test]
fn output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["compile", "--config", &cfg("hadamard.cfg"), "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let x = run(&["separate", "--config", &cfg("dephasing.cfg")]);
    let y = run(&["separate", "--config", &cfg("dephasing.cfg")]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn steady_and_choi() {
    let v = json(&run(&["steady", "--config", &cfg("dephasing.cfg")]));
    let ss = cmat(&v["steady_state"]["matrix"]);
    let mut expected = CMat::zeros(3, 3);
    expected[(1, 1)] = sepnoise::linalg::c(0.025, 0.0);
    expected[(2, 2)] = sepnoise::linalg::c(0.025, 0.0);
    assert!(max_abs_diff(&ss, &expected) < 1e-9);

    let v = json(&run(&["choi", "--config", &cfg("dephasing.cfg"), "--theta", "2"]));
    let eig: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(f).collect();
    let nonzero: Vec<f64> = eig.iter().copied().filter(|x| x.abs() > 1e-9).collect();
    let mut expected = choi_eigenvalues(2.0);
    expected.sort_by(f64::total_cmp);
    assert_eq!(nonzero.len(), 3);
    for (a, b) in nonzero.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-8);
    }
    assert_eq!(v["positive"], Value::Bool(true));
}

#[test]
fn sweep_csv() {
    let out = run(&["sweep", "--config", &cfg("dephasing.cfg")]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta,strength,rate_0,rate_1,rate_2");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    let last: Vec<f64> = rows[63].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((last[1] - 0.05).abs() < 1e-10);
}

#[test]
fn validate_closed_form_suite() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let junit = dir.path().join("junit.xml");
    let out = run(&[
        "validate",
        "--suite",
        "closed-form",
        "--out",
        report.to_str().unwrap(),
        "--junit",
        junit.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(fs::read_to_string(&junit).unwrap().contains("failures=\"0\""));
}

#[test]
fn config_errors_exit_two() {
    let missing = run(&["separate", "--config", "/nonexistent/none.cfg"]);
    assert_eq!(code(&missing), 2);
    assert!(!missing.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[system]\nqubits = 1\n[hamiltonian]\nQ = 1\n").unwrap();
    let out = run(&["separate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let with_gamma = run(&["separate", "--config", &cfg("dephasing.cfg"), "--gamma", "0.2"]);
    assert_eq!(code(&with_gamma), 0);
    fs::write(&bad, "[system]\nqubits = 1\n[hamiltonian]\nX = 1\n[run]\nt_op = 1\n").unwrap();
    let out = run(&["separate", "--config", bad.to_str().unwrap(), "--gamma", "0.2"]);
    assert_eq!(code(&out), 2);

    let neg = run(&["separate", "--config", &cfg("dephasing.cfg"), "--theta", "-1"]);
    assert_eq!(code(&neg), 2);
}
