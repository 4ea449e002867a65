//! Truncated power-series arithmetic over matrix coefficients.
//!
//! Every routine returns coefficients `0..=degree`; products are exact in
//! the ring of series modulo `λ^{degree+1}`.

use crate::error::{Error, Result};
use crate::hardy::PolyOpFn;
use crate::linalg::{identity, operator_norm, zeros, CMatrix};

/// Coefficients of `a(λ) b(λ)` up to `degree`.
pub fn product(a: &PolyOpFn, b: &PolyOpFn, degree: usize) -> Result<PolyOpFn> {
    if a.in_dim() != b.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "series product {}x{} · {}x{}",
            a.out_dim(),
            a.in_dim(),
            b.out_dim(),
            b.in_dim()
        )));
    }
    let coeffs = (0..=degree)
        .map(|k| {
            let mut acc = zeros(a.out_dim(), b.in_dim());
            for j in 0..=k.min(a.degree()) {
                if j < a.coeffs().len() && k - j < b.coeffs().len() {
                    acc += &a.coeffs()[j] * &b.coeffs()[k - j];
                }
            }
            acc
        })
        .collect();
    Ok(PolyOpFn::from_coeffs_unchecked(a.out_dim(), b.in_dim(), coeffs))
}

/// `(I - L(λ))^{-1}` for a square loop with `L(0) = 0`.
pub fn resolvent(lp: &PolyOpFn, degree: usize) -> Result<PolyOpFn> {
    let d = lp.out_dim();
    if lp.in_dim() != d {
        return Err(Error::DimensionMismatch("loop function must be square".into()));
    }
    if operator_norm(&lp.coeff(0)) > 0.0 {
        return Err(Error::InvalidInput("loop function must vanish at zero".into()));
    }
    let mut g: Vec<CMatrix> = Vec::with_capacity(degree + 1);
    g.push(identity(d));
    for k in 1..=degree {
        let mut acc = zeros(d, d);
        for j in 1..=k.min(lp.degree()) {
            acc += &lp.coeffs()[j] * &g[k - j];
        }
        g.push(acc);
    }
    Ok(PolyOpFn::from_coeffs_unchecked(d, d, g))
}

/// `top(λ) (I - L(λ))^{-1}`, the linear-fractional feedback of `top`
/// through the loop `L` with `L(0) = 0`.
pub fn feedback(top: &PolyOpFn, lp: &PolyOpFn, degree: usize) -> Result<PolyOpFn> {
    let g = resolvent(lp, degree)?;
    product(top, &g, degree)
}

/// Multiplies by `λ`.
pub fn times_lambda(a: &PolyOpFn, degree: usize) -> PolyOpFn {
    let coeffs = (0..=degree)
        .map(|k| if k == 0 { zeros(a.out_dim(), a.in_dim()) } else { a.coeff(k - 1) })
        .collect();
    PolyOpFn::from_coeffs_unchecked(a.out_dim(), a.in_dim(), coeffs)
}

pub fn scale(a: &PolyOpFn, s: f64) -> PolyOpFn {
    a.map_coeffs(|m| m.scale(s))
}

pub fn sub(a: &PolyOpFn, b: &PolyOpFn, degree: usize) -> PolyOpFn {
    let coeffs = (0..=degree).map(|k| a.coeff(k) - b.coeff(k)).collect();
    PolyOpFn::from_coeffs_unchecked(a.out_dim(), a.in_dim(), coeffs)
}
