//! Truncated Hardy-space machinery.
//!
//! The degree-`N` truncation of `H²(N)` keeps Taylor coefficients `0..=N`
//! and stores a function as the stacked block vector `[f_0; f_1; …; f_N]`.
//! The forward shift drops whatever overflows degree `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, is_finite, max_eigenvalue, operator_norm, zeros, CMatrix, Subspace, C64};

/// Operator-valued analytic function given by Taylor coefficients at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyOpFn {
    #[serde(rename = "out")]
    out_dim: usize,
    #[serde(rename = "in")]
    in_dim: usize,
    #[serde(with = "crate::json::matrices")]
    coeffs: Vec<CMatrix>,
    /// Bound on `‖Σ H_n* H_n‖` recorded when the function is known to define
    /// a contractive column.
    #[serde(skip)]
    contractive_bound: Option<f64>,
}

impl PolyOpFn {
    pub fn new(out_dim: usize, in_dim: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        for (n, h) in coeffs.iter().enumerate() {
            if h.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {n} is {:?}, expected {out_dim}x{in_dim}",
                    h.shape()
                )));
            }
            if !is_finite(h) {
                return Err(Error::InvalidInput(format!("coefficient {n} is not finite")));
            }
        }
        Ok(Self { out_dim, in_dim, coeffs, contractive_bound: None })
    }

    pub(crate) fn from_coeffs_unchecked(out_dim: usize, in_dim: usize, coeffs: Vec<CMatrix>) -> Self {
        Self { out_dim, in_dim, coeffs, contractive_bound: None }
    }

    pub fn zero(out_dim: usize, in_dim: usize, degree: usize) -> Self {
        Self::from_coeffs_unchecked(out_dim, in_dim, vec![zeros(out_dim, in_dim); degree + 1])
    }

    pub fn constant(value: CMatrix) -> Self {
        let (r, c) = value.shape();
        Self::from_coeffs_unchecked(r, c, vec![value])
    }

    /// `λ · I_dim`.
    pub fn shift_identity(dim: usize) -> Self {
        Self::from_coeffs_unchecked(dim, dim, vec![zeros(dim, dim), identity(dim)])
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<CMatrix> {
        self.coeffs
    }

    /// Index of the last stored coefficient (0 for an empty sequence).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient `n`, zero beyond the stored range.
    pub fn coeff(&self, n: usize) -> CMatrix {
        self.coeffs.get(n).cloned().unwrap_or_else(|| zeros(self.out_dim, self.in_dim))
    }

    pub fn contractive_bound(&self) -> Option<f64> {
        self.contractive_bound
    }

    pub fn with_contractive_bound(mut self, bound: f64) -> Self {
        self.contractive_bound = Some(bound);
        self
    }

    /// Keeps coefficients `0..=degree`, zero-padding if needed.
    pub fn truncated(&self, degree: usize) -> Self {
        let coeffs = (0..=degree).map(|n| self.coeff(n)).collect();
        Self { coeffs, ..self.clone() }
    }

    /// Horner evaluation of the stored polynomial.
    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        if lambda.norm() >= 1.0 {
            return Err(Error::DomainError { lambda });
        }
        Ok(self.eval_poly(lambda))
    }

    pub(crate) fn eval_poly(&self, lambda: C64) -> CMatrix {
        let mut acc = zeros(self.out_dim, self.in_dim);
        for h in self.coeffs.iter().rev() {
            acc = acc * lambda + h;
        }
        acc
    }

    /// `Σ_{n≤N} H_n* H_n`.
    pub fn partial_gram(&self, degree: usize) -> CMatrix {
        let mut g = zeros(self.in_dim, self.in_dim);
        for h in self.coeffs.iter().take(degree + 1) {
            g += h.adjoint() * h;
        }
        g
    }

    /// Largest coefficient-wise operator-norm distance over degrees `0..=upto`.
    pub fn max_coeff_distance(&self, other: &PolyOpFn, upto: usize) -> f64 {
        (0..=upto)
            .map(|n| operator_norm(&(self.coeff(n) - other.coeff(n))))
            .fold(0.0, f64::max)
    }

    pub fn map_coeffs(&self, f: impl Fn(&CMatrix) -> CMatrix) -> PolyOpFn {
        let coeffs: Vec<CMatrix> = self.coeffs.iter().map(f).collect();
        let (r, c) = coeffs.first().map_or((self.out_dim, self.in_dim), |m| m.shape());
        Self::from_coeffs_unchecked(r, c, coeffs)
    }
}

/// Block column `[H_0; H_1; …; H_N]`, the truncated matrix of the operator
/// defined by `H` acting on constants.
pub fn column_operator(h: &PolyOpFn, degree: usize) -> CMatrix {
    let (y, u) = (h.out_dim(), h.in_dim());
    let mut out = zeros((degree + 1) * y, u);
    for n in 0..=degree.min(h.degree()) {
        if n < h.coeffs().len() {
            out.view_mut((n * y, 0), (y, u)).copy_from(&h.coeffs()[n]);
        }
    }
    out
}

/// Splits a stacked block column back into degree blocks.
pub fn column_to_poly(column: &CMatrix, out_dim: usize) -> Result<PolyOpFn> {
    if out_dim == 0 || !column.nrows().is_multiple_of(out_dim) {
        return Err(Error::DimensionMismatch(format!(
            "column with {} rows is not a stack of {out_dim}-row blocks",
            column.nrows()
        )));
    }
    let blocks = column.nrows() / out_dim;
    let coeffs = (0..blocks)
        .map(|n| column.rows(n * out_dim, out_dim).into_owned())
        .collect();
    PolyOpFn::new(out_dim, column.ncols(), coeffs)
}

/// Block lower-triangular Toeplitz matrix of multiplication by `H` on the
/// degree-`N` truncation.
pub fn toeplitz(h: &PolyOpFn, degree: usize) -> CMatrix {
    let (y, u) = (h.out_dim(), h.in_dim());
    let mut t = zeros((degree + 1) * y, (degree + 1) * u);
    for i in 0..=degree {
        for j in 0..=i {
            let k = i - j;
            if k < h.coeffs().len() {
                t.view_mut((i * y, j * u), (y, u)).copy_from(&h.coeffs()[k]);
            }
        }
    }
    t
}

/// Multiplication matrix together with the mass pushed beyond degree `N`.
#[derive(Clone, Debug)]
pub struct MultiplicationMatrix {
    pub matrix: CMatrix,
    /// Operator norm of the dropped coefficients `N+1..`.
    pub tail_mass: f64,
}

pub fn multiplication_operator(h: &PolyOpFn, domain: &Subspace, degree: usize) -> Result<MultiplicationMatrix> {
    let u = h.in_dim();
    if domain.ambient_dim() != (degree + 1) * u {
        return Err(Error::DimensionMismatch(format!(
            "domain ambient {} differs from (N+1)·in = {}",
            domain.ambient_dim(),
            (degree + 1) * u
        )));
    }
    let extended = degree + h.degree();
    // embed the domain into the degree `extended` space to capture overflow
    let mut padded = zeros((extended + 1) * u, domain.dim());
    padded.view_mut((0, 0), domain.basis().shape()).copy_from(domain.basis());
    let full = toeplitz(h, extended) * padded;
    let keep = (degree + 1) * h.out_dim();
    let matrix = full.rows(0, keep).into_owned();
    let tail = full.rows(keep, full.nrows() - keep).into_owned();
    Ok(MultiplicationMatrix { matrix, tail_mass: operator_norm(&tail) })
}

/// Truncated forward shift `S` and constant embedding `E` on degree-`N`
/// coefficient space with values in `C^dim`.
pub fn shift_and_embed(dim: usize, degree: usize) -> (CMatrix, CMatrix) {
    let n = (degree + 1) * dim;
    let mut s = zeros(n, n);
    for k in 0..degree {
        s.view_mut(((k + 1) * dim, k * dim), (dim, dim)).copy_from(&identity(dim));
    }
    let e = CMatrix::identity(n, dim);
    (s, e)
}

/// Largest eigenvalue excess of the degree-`N` Gram over the identity.
pub fn gram_excess(h: &PolyOpFn, degree: usize) -> f64 {
    (max_eigenvalue(&h.partial_gram(degree)) - 1.0).max(0.0)
}

/// Sample points inside the disk used for sup-norm estimates and
/// pointwise identities.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<C64>,
}

impl Grid {
    pub const DEFAULT_RADII: [f64; 2] = [0.6, 0.95];
    pub const POINTS_PER_CIRCLE: usize = 32;

    pub fn circles(radii: &[f64], per_circle: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(radii.len() * per_circle);
        for &r in radii {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidInput(format!("grid radius {r} not in [0, 1)")));
            }
            for k in 0..per_circle {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / per_circle as f64;
                points.push(C64::from_polar(r, theta));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::circles(&Self::DEFAULT_RADII, Self::POINTS_PER_CIRCLE).expect("default radii are valid")
    }
}
