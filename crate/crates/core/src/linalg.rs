//! Dense complex linear algebra helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr[A† B]` without any normalization.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Largest absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermitian_residual(a: &CMat) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    max_abs_diff(&(u * u.adjoint()), &identity(u.nrows()))
}

/// Hermitian part `(A + A†)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

fn to_faer(a: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are ascending and the
/// columns of the returned matrix are the matching orthonormal eigenvectors.
/// Only the lower triangle is read.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("eigh needs a square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let evd = to_faer(a)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigendecomposition did not converge: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let vals = (0..n).map(|i| s[i].re).collect();
    let vecs = CMat::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((vals, vecs))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("eigvalsh needs a square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigenvalues did not converge: {e:?}")))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm2(a: &CMat) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Largest pointwise distance between two real multisets after sorting.
/// Returns infinity when the sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn one_norm(a: &CMat) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.539398330063230e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068e0, 9),
];
const THETA13: f64 = 5.371920351148152;

fn pade_solve(u: CMat, v: CMat) -> CMat {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular inside the scaling bound")
}

fn pade_low(a: &CMat, b: &[f64]) -> CMat {
    let n = a.nrows();
    let a2 = a * a;
    let mut pow = identity(n);
    let mut u = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    for k in 0..b.len() / 2 {
        v += pow.scale(b[2 * k]);
        u += pow.scale(b[2 * k + 1]);
        pow = &pow * &a2;
    }
    pade_solve(a * u, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant (Higham 2005).
pub fn expm(a: &CMat) -> CMat {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    if norm == 0.0 {
        return identity(n);
    }
    for &(theta, m) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, b);
        }
    }
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let a = a.scale(0.5_f64.powi(s));
    let b = &B13;
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);
    let mut r = pade_solve(u, v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `exp(-i H t)` for Hermitian `H`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let (w, v) = eigh(h)?;
    let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        w.len(),
        w.iter().map(|x| (-I * x * t).exp()),
    ));
    Ok(&v * phases * v.adjoint())
}

/// `e^z - 1` for complex `z`, accurate near zero.
pub fn expm1c(z: C64) -> C64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    C64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// `f(x) = (e^x - 1)/x` with `f(0) = 1`.
pub fn phi1(x: C64) -> C64 {
    if x.norm() >= 1e-4 {
        expm1c(x) / x
    } else {
        C64::new(1.0, 0.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn expm_of_diagonal() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.3, 0.0),
            c(-2.0, 1.0),
            c(7.5, -3.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-12 * e[(i, i)].norm().max(1.0));
        }
    }

    #[test]
    fn expm_matches_hermitian_route() {
        for (k, scale) in [0.001, 0.1, 1.0, 10.0, 80.0].iter().enumerate() {
            let a = sample(6, k as u64 + 1);
            let h = hermitian_part(&a).scale(*scale);
            let lhs = expm(&(h.map(|z| -I * z)));
            let rhs = expm_hermitian(&h, 1.0).unwrap();
            assert!(max_abs_diff(&lhs, &rhs) < 1e-10, "scale {scale}");
        }
    }

    #[test]
    fn expm_inverse() {
        let a = sample(5, 42).scale(3.0);
        let p = expm(&a) * expm(&(-&a));
        assert!(max_abs_diff(&p, &identity(5)) < 1e-10);
    }

    #[test]
    fn eigh_reconstructs() {
        let h = hermitian_part(&sample(7, 9));
        let (w, v) = eigh(&h).unwrap();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            7,
            w.iter().map(|x| c(*x, 0.0)),
        ));
        assert!(max_abs_diff(&(&v * d * v.adjoint()), &h) < 1e-12);
        assert!(unitarity_residual(&v) < 1e-12);
        assert!(multiset_distance(&w, &eigvalsh(&h).unwrap()) < 1e-12);
    }

    #[test]
    fn phi1_branches_meet() {
        for y in [1e-4, -1e-4, 3e-5] {
            let x = c(0.0, y);
            let direct = (x.exp() - 1.0) / x;
            assert!((phi1(x) - direct).norm() < 1e-11);
        }
        assert_eq!(phi1(c(0.0, 0.0)), c(1.0, 0.0));
        let x = c(0.0, std::f64::consts::PI * 2.0);
        assert!(phi1(x).norm() < 1e-15);
    }

    #[test]
    fn multiset_distance_ignores_order() {
        assert_eq!(multiset_distance(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]), 0.0);
        assert!(multiset_distance(&[1.0], &[1.0, 2.0]).is_infinite());
    }
}
