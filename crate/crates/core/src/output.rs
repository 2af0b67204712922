//! JSON serialization of results. Numbers are written with 17 significant
//! digits and object keys are sorted, so equal inputs give byte-identical
//! output.

use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::gate::GateNoise;
use crate::linalg::CMat;
use crate::separated::SeparatedNoiseResult;
use crate::superop::RateMatrix;
use crate::Result;

/// `x` as a JSON number in `{:.16e}` form; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Number::from_str(&text)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

/// `{"re": [[…]], "im": [[…]]}`, row major.
pub fn matrix_json(m: &CMat) -> Value {
    let part = |f: fn(&crate::C64) -> f64| {
        Value::Array(
            (0..m.nrows())
                .map(|i| Value::Array((0..m.ncols()).map(|j| num(f(&m[(i, j)]))).collect()))
                .collect(),
        )
    };
    let mut o = Map::new();
    o.insert("re".into(), part(|z| z.re));
    o.insert("im".into(), part(|z| z.im));
    Value::Object(o)
}

pub fn rate_matrix_json(r: &RateMatrix) -> Result<Value> {
    let mut o = Map::new();
    o.insert("basis".into(), Value::String(r.basis().to_string()));
    o.insert("matrix".into(), matrix_json(r.matrix()));
    o.insert("eigenvalues".into(), reals(&r.eigenvalues()?));
    o.insert("strength".into(), num(r.strength()));
    o.insert("physical".into(), Value::Bool(r.is_physical()?));
    Ok(Value::Object(o))
}

pub fn separated_json(res: &SeparatedNoiseResult, theta: Option<f64>) -> Result<Value> {
    let mut o = Map::new();
    o.insert("route".into(), Value::String(res.route.to_string()));
    o.insert("t_op".into(), num(res.t_op));
    o.insert("theta".into(), theta.map(num).unwrap_or(Value::Null));
    o.insert("strength".into(), num(res.strength));
    o.insert("gamma_s".into(), rate_matrix_json(&res.gamma_s)?);
    o.insert("gamma_f".into(), rate_matrix_json(&res.gamma_f)?);
    Ok(Value::Object(o))
}

pub fn gate_noise_json(g: &GateNoise) -> Result<Value> {
    let mut o = Map::new();
    o.insert("method".into(), Value::String(g.method.to_string()));
    o.insert("t_g".into(), num(g.t_g));
    o.insert("gamma_n".into(), rate_matrix_json(&g.gamma_n)?);
    o.insert("u".into(), matrix_json(&g.u));
    let mut parts = Vec::with_capacity(g.breakdown.len());
    for p in &g.breakdown {
        let mut e = Map::new();
        e.insert("name".into(), Value::String(p.name.clone()));
        e.insert("duration".into(), num(p.duration));
        e.insert("gamma_s".into(), matrix_json(p.gamma_s.matrix()));
        e.insert("gamma_l".into(), matrix_json(p.gamma_l.matrix()));
        parts.push(Value::Object(e));
    }
    o.insert("breakdown".into(), Value::Array(parts));
    Ok(Value::Object(o))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-2.0).to_string(), "-2.0000000000000000e+0");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = num(std::f64::consts::PI).to_string().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn matrix_layout() {
        let m = CMat::from_row_slice(1, 2, &[c(1.0, 2.0), c(3.0, -4.0)]);
        let v = matrix_json(&m);
        assert_eq!(v["re"][0][1].to_string(), "3.0000000000000000e+0");
        assert_eq!(v["im"][0][1].to_string(), "-4.0000000000000000e+0");
    }
}
