//! Test-side oracles computed without the library's realization code.
#![allow(dead_code)]

use liftkit::linalg::{identity, singular_values, zeros, CMatrix, C64};

/// `a·b^n` for `n = 0..=degree`.
pub fn geometric(a: f64, b: f64, degree: usize) -> Vec<f64> {
    (0..=degree).map(|n| a * b.powi(n as i32)).collect()
}

/// Cauchy product of two coefficient sequences, truncated.
pub fn series_mul(x: &[CMatrix], y: &[CMatrix], degree: usize) -> Vec<CMatrix> {
    let (r, c) = (x[0].nrows(), y[0].ncols());
    (0..=degree)
        .map(|n| {
            let mut acc = zeros(r, c);
            for k in 0..=n {
                if k < x.len() && n - k < y.len() {
                    acc += &x[k] * &y[n - k];
                }
            }
            acc
        })
        .collect()
}

/// Taylor coefficients of `I - P + ((λ - a)/(1 - āλ)) P`, `P = VV*`.
pub fn bp_factor_coeffs(a: C64, v: &CMatrix, degree: usize) -> Vec<CMatrix> {
    let dim = v.nrows();
    let p = v * v.adjoint();
    let mut out = vec![identity(dim) - &p - &p * a];
    let s = 1.0 - a.norm_sqr();
    for k in 1..=degree {
        out.push(&p * (a.conj().powu(k as u32 - 1) * s));
    }
    out
}

/// Coefficients of `λ·B_1⋯B_m`.
pub fn bp_theta_coeffs(dim: usize, factors: &[(C64, CMatrix)], degree: usize) -> Vec<CMatrix> {
    let mut acc = vec![zeros(dim, dim), identity(dim)];
    acc.resize(degree + 1, zeros(dim, dim));
    for (a, v) in factors {
        acc = series_mul(&acc, &bp_factor_coeffs(*a, v, degree), degree);
    }
    acc
}

/// Lower block-triangular Toeplitz matrix of a coefficient sequence.
pub fn toeplitz(coeffs: &[CMatrix], degree: usize) -> CMatrix {
    let (r, c) = (coeffs[0].nrows(), coeffs[0].ncols());
    let mut t = zeros((degree + 1) * r, (degree + 1) * c);
    for i in 0..=degree {
        for j in 0..=i {
            if i - j < coeffs.len() {
                t.view_mut((i * r, j * c), (r, c)).copy_from(&coeffs[i - j]);
            }
        }
    }
    t
}

/// `dim H` by brute force: near-null singular values of `T_N(Θ)*`.
pub fn kernel_dimension(theta: &[CMatrix], degree: usize, tol: f64) -> usize {
    let t = toeplitz(theta, degree);
    let sv = singular_values(&t.adjoint());
    sv.iter().filter(|&&s| s < tol).count() + (t.nrows() - sv.len())
}

/// Norm of `f -> Hf` from polynomials of degree `< n` into `H²_N`.
pub fn poly_mult_norm(h: &[CMatrix], n: usize, degree: usize) -> f64 {
    let t = toeplitz(h, degree);
    let cols = n * h[0].ncols();
    let block = t.columns(0, cols).into_owned();
    singular_values(&block).first().copied().unwrap_or(0.0)
}

pub fn max_diff(a: &[CMatrix], b: &[CMatrix], upto: usize) -> f64 {
    (0..=upto)
        .map(|n| (&a[n] - &b[n]).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}
