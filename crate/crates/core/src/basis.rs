//! Orthonormal traceless operator bases and their structure tensor.
//!
//! Inner product: `⟨⟨A||B⟩⟩ = (1/D) Tr[A† B]`. Every basis holds `D² − 1`
//! elements that are traceless and orthonormal under this product.
//!
//! Ordering is fixed:
//! * Pauli strings on `k` qubits are enumerated lexicographically over the
//!   per-qubit symbols `I, X, Y, Z`, leftmost symbol acting on qubit 0 (the
//!   leftmost tensor factor), identity string skipped. For `k = 2` the list
//!   starts `IX, IY, IZ, XI, ...` and ends with `ZZ`.
//! * Generalized Gell-Mann matrices are enumerated by growing the active block:
//!   for `k = 1..D-1`, first the symmetric and antisymmetric pairs `(j, k)` for
//!   `j < k`, then the diagonal matrix `diag(1, …, 1, −k, 0, …)`. For `D = 3`
//!   this is the conventional `λ1 … λ8`.

use std::fmt;

use crate::error::{invalid, Result};
use crate::linalg::{c, commutator, hs_inner, kron, trace, CMat, C64};

const BASIS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Pauli { qubits: usize },
    GellMann { dim: usize },
    Custom { dim: usize },
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Pauli { qubits } => write!(f, "pauli({qubits})"),
            BasisLabel::GellMann { dim } => write!(f, "gell_mann({dim})"),
            BasisLabel::Custom { dim } => write!(f, "custom({dim})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    ops: Vec<CMat>,
    names: Vec<String>,
    label: BasisLabel,
}

impl OperatorBasis {
    /// Wraps a user-supplied list of operators after validating it.
    pub fn custom(ops: Vec<CMat>, names: Option<Vec<String>>) -> Result<Self> {
        let dim = match ops.first() {
            Some(a) => a.nrows(),
            None => return invalid("a basis needs at least one operator"),
        };
        let names = match names {
            Some(n) if n.len() == ops.len() => n,
            Some(_) => return invalid("one name per basis operator is required"),
            None => (0..ops.len()).map(|i| format!("A{}", i + 1)).collect(),
        };
        let basis = OperatorBasis {
            dim,
            ops,
            names,
            label: BasisLabel::Custom { dim },
        };
        basis.validate()?;
        Ok(basis)
    }

    /// Checks size, shape, tracelessness and orthonormality.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if self.ops.len() != d * d - 1 {
            return invalid(format!(
                "a basis for D = {d} needs {} operators, got {}",
                d * d - 1,
                self.ops.len()
            ));
        }
        for (n, a) in self.ops.iter().enumerate() {
            if a.shape() != (d, d) {
                return invalid(format!("operator {n} is not {d}x{d}"));
            }
            if trace(a).norm() > BASIS_TOL {
                return invalid(format!("operator {n} is not traceless"));
            }
        }
        for m in 0..self.ops.len() {
            for n in m..self.ops.len() {
                let g = hs_inner(&self.ops[m], &self.ops[n]) / d as f64;
                let want = if m == n { 1.0 } else { 0.0 };
                if (g - want).norm() > BASIS_TOL {
                    return invalid(format!("operators {m} and {n} are not orthonormal"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of operators, `D² − 1`.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn op(&self, n: usize) -> &CMat {
        &self.ops[n]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label(&self) -> &BasisLabel {
        &self.label
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_hermitian(&self) -> bool {
        self.ops
            .iter()
            .all(|a| crate::linalg::hermitian_residual(a) <= BASIS_TOL)
    }

    /// Expansion coefficients `⟨⟨A_n||X⟩⟩` of an operator. The identity
    /// component of `X` is dropped.
    pub fn coefficients(&self, x: &CMat) -> Vec<C64> {
        let d = self.dim as f64;
        self.ops.iter().map(|a| hs_inner(a, x) / d).collect()
    }

    /// `Σ_n coeffs[n] A_n`.
    pub fn operator(&self, coeffs: &[C64]) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (a, x) in self.ops.iter().zip(coeffs) {
            if *x != C64::new(0.0, 0.0) {
                out += a * *x;
            }
        }
        out
    }

    /// `Σ_n coeffs[n] A_n` for real coefficients.
    pub fn real_operator(&self, coeffs: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (a, x) in self.ops.iter().zip(coeffs) {
            if *x != 0.0 {
                out += a.scale(*x);
            }
        }
        out
    }
}

fn pauli(sym: u8) -> CMat {
    let (z, o, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let m = match sym {
        b'I' => [o, z, z, o],
        b'X' => [z, o, o, z],
        b'Y' => [z, -i, i, z],
        b'Z' => [o, z, z, -o],
        _ => unreachable!(),
    };
    CMat::from_row_slice(2, 2, &m)
}

/// The 2x2 Pauli matrix for `'I' | 'X' | 'Y' | 'Z'`.
pub fn pauli_matrix(sym: char) -> Option<CMat> {
    match sym {
        'I' | 'X' | 'Y' | 'Z' => Some(pauli(sym as u8)),
        _ => None,
    }
}

/// Dense matrix of a Pauli string such as `"XZI"`; the first symbol is the
/// leftmost tensor factor.
pub fn pauli_string(s: &str) -> Result<CMat> {
    if s.is_empty() {
        return invalid("empty Pauli string");
    }
    let mut out = CMat::identity(1, 1);
    for ch in s.chars() {
        match pauli_matrix(ch) {
            Some(p) => out = kron(&out, &p),
            None => return invalid(format!("`{ch}` is not a Pauli symbol")),
        }
    }
    Ok(out)
}

/// Pauli-string basis on `k` qubits, identity excluded.
pub fn pauli_basis(k: usize) -> Result<OperatorBasis> {
    if k == 0 {
        return invalid("pauli_basis needs at least one qubit");
    }
    if k > 6 {
        return invalid("pauli_basis is limited to 6 qubits");
    }
    const SYM: [u8; 4] = *b"IXYZ";
    let count = 1usize << (2 * k);
    let mut ops = Vec::with_capacity(count - 1);
    let mut names = Vec::with_capacity(count - 1);
    for idx in 1..count {
        let mut name = String::with_capacity(k);
        let mut op = CMat::identity(1, 1);
        for q in 0..k {
            let s = SYM[(idx >> (2 * (k - 1 - q))) & 3];
            name.push(s as char);
            op = kron(&op, &pauli(s));
        }
        ops.push(op);
        names.push(name);
    }
    Ok(OperatorBasis {
        dim: 1 << k,
        ops,
        names,
        label: BasisLabel::Pauli { qubits: k },
    })
}

/// Generalized Gell-Mann basis in dimension `dim`, scaled by `√(D/2)` so the
/// elements are orthonormal under the `1/D` product. Names are `L1, L2, …`.
pub fn gell_mann_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return invalid("gell_mann_basis needs dimension at least 2");
    }
    let scale = (dim as f64 / 2.0).sqrt();
    let mut ops = Vec::with_capacity(dim * dim - 1);
    for k in 1..dim {
        for j in 0..k {
            let mut s = CMat::zeros(dim, dim);
            s[(j, k)] = c(scale, 0.0);
            s[(k, j)] = c(scale, 0.0);
            ops.push(s);
            let mut a = CMat::zeros(dim, dim);
            a[(j, k)] = c(0.0, -scale);
            a[(k, j)] = c(0.0, scale);
            ops.push(a);
        }
        let kf = (k + 1) as f64;
        let norm = scale * (2.0 / (kf * (kf - 1.0))).sqrt();
        let mut d = CMat::zeros(dim, dim);
        for i in 0..k {
            d[(i, i)] = c(norm, 0.0);
        }
        d[(k, k)] = c(-(k as f64) * norm, 0.0);
        ops.push(d);
    }
    let names = (1..=ops.len()).map(|i| format!("L{i}")).collect();
    Ok(OperatorBasis {
        dim,
        ops,
        names,
        label: BasisLabel::GellMann { dim },
    })
}

/// `(1/D) Tr[A† B]`.
pub fn frobenius_inner(a: &CMat, b: &CMat, dim: usize) -> Result<C64> {
    if a.shape() != (dim, dim) || b.shape() != (dim, dim) {
        return invalid(format!(
            "frobenius_inner expects {dim}x{dim} operands, got {:?} and {:?}",
            a.shape(),
            b.shape()
        ));
    }
    Ok(hs_inner(a, b) / dim as f64)
}

/// `g_pmn = i (1/D) Tr[A_m† [A_p, A_n]]`, stored densely.
#[derive(Clone, Debug)]
pub struct StructureTensor {
    n: usize,
    g: Vec<C64>,
}

impl StructureTensor {
    /// Number of basis operators the tensor is indexed by.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, p: usize, m: usize, n: usize) -> C64 {
        self.g[(p * self.n + m) * self.n + n]
    }

    /// `(Ω_p)_mn = −i g_pmn`, the matrix of `ad_{A_p}` in the basis.
    pub fn omega_p(&self, p: usize) -> CMat {
        CMat::from_fn(self.n, self.n, |m, n| C64::new(0.0, -1.0) * self.get(p, m, n))
    }

    /// `Ω_mn = −i Σ_p h_p g_pmn` for real Hamiltonian coefficients.
    pub fn omega(&self, h: &[f64]) -> CMat {
        assert_eq!(h.len(), self.n, "coefficient vector has the wrong length");
        let n = self.n;
        let mut out = CMat::zeros(n, n);
        for (p, &hp) in h.iter().enumerate() {
            if hp == 0.0 {
                continue;
            }
            let block = &self.g[p * n * n..(p + 1) * n * n];
            for m in 0..n {
                for k in 0..n {
                    let g = block[m * n + k];
                    // −i·hp·g
                    out[(m, k)] += C64::new(g.im * hp, -g.re * hp);
                }
            }
        }
        out
    }

    /// Largest deviation from a real, totally antisymmetric tensor.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for m in 0..n {
                for k in 0..n {
                    let g = self.get(p, m, k);
                    worst = worst
                        .max(g.im.abs())
                        .max((g + self.get(m, p, k)).norm())
                        .max((g + self.get(p, k, m)).norm());
                }
            }
        }
        worst
    }
}

/// Builds the structure tensor of a basis. One commutator per `(p, n)` pair.
pub fn structure_tensor(basis: &OperatorBasis) -> StructureTensor {
    let n = basis.len();
    let d = basis.dim() as f64;
    let ops = basis.ops();
    let mut g = vec![C64::new(0.0, 0.0); n * n * n];
    for p in 0..n {
        for k in 0..n {
            let comm = commutator(&ops[p], &ops[k]);
            for m in 0..n {
                g[(p * n + m) * n + k] = C64::new(0.0, 1.0) * hs_inner(&ops[m], &comm) / d;
            }
        }
    }
    let st = StructureTensor { n, g };
    debug_assert!(
        matches!(basis.label(), BasisLabel::Custom { .. }) || st.antisymmetry_residual() < 1e-12
    );
    st
}
