//! Discrete-time state-space realizations `G(λ) = D + λ C (I - λA)^{-1} B`.
//!
//! Used to carry rational functions exactly: Taylor coefficients are
//! `G_0 = D`, `G_k = C A^{k-1} B`, and the Gram sums `Σ_n G_n* G_{n+k}` are
//! closed-form through the observability Gramian.

use crate::error::{Error, Result};
use crate::hardy::PolyOpFn;
use crate::linalg::{amax_or_zero, block_diag, hermitian_part, hstack, identity, rows, solve, vstack, zeros, CMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

impl StateSpace {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = a.nrows();
        let ok = a.ncols() == n
            && b.nrows() == n
            && c.ncols() == n
            && d.nrows() == c.nrows()
            && d.ncols() == b.ncols();
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "realization blocks A{:?} B{:?} C{:?} D{:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn constant(d: CMatrix) -> Self {
        let (r, c) = d.shape();
        Self { a: zeros(0, 0), b: zeros(0, c), c: zeros(r, 0), d }
    }

    /// Shift-register realization of a polynomial.
    pub fn fir(h: &PolyOpFn) -> Self {
        let (y, u) = (h.out_dim(), h.in_dim());
        let deg = h.degree();
        let n = deg * u;
        let mut a = zeros(n, n);
        for k in 1..deg {
            a.view_mut((k * u, (k - 1) * u), (u, u)).copy_from(&identity(u));
        }
        let b = CMatrix::identity(n, u);
        let mut c = zeros(y, n);
        for k in 1..=deg {
            c.view_mut((0, (k - 1) * u), (y, u)).copy_from(&h.coeff(k));
        }
        Self { a, b, c, d: h.coeff(0) }
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.c.nrows()
    }

    /// `[[A, B], [C, D]]`.
    pub fn colligation(&self) -> CMatrix {
        vstack(&[&hstack(&[&self.a, &self.b]), &hstack(&[&self.c, &self.d])])
    }

    pub fn from_colligation(m: &CMatrix, state_dim: usize, in_dim: usize) -> Result<Self> {
        let (r, c) = m.shape();
        if state_dim > r || state_dim + in_dim != c {
            return Err(Error::DimensionMismatch(format!(
                "colligation {r}x{c} cannot split as state {state_dim}, input {in_dim}"
            )));
        }
        let out = r - state_dim;
        Ok(Self {
            a: m.view((0, 0), (state_dim, state_dim)).into_owned(),
            b: m.view((0, state_dim), (state_dim, in_dim)).into_owned(),
            c: m.view((state_dim, 0), (out, state_dim)).into_owned(),
            d: m.view((state_dim, state_dim), (out, in_dim)).into_owned(),
        })
    }

    /// Value at `λ`, `None` when `I - λA` is singular.
    pub fn value(&self, lambda: C64) -> Option<CMatrix> {
        let n = self.state_dim();
        if n == 0 {
            return Some(self.d.clone());
        }
        let m = identity(n) - &self.a * lambda;
        let x = solve(&m, &self.b)?;
        Some(&self.d + (&self.c * x) * lambda)
    }

    pub fn taylor(&self, k: usize) -> CMatrix {
        if k == 0 {
            return self.d.clone();
        }
        let mut x = self.b.clone();
        for _ in 1..k {
            x = &self.a * x;
        }
        &self.c * x
    }

    pub fn coeffs(&self, degree: usize) -> PolyOpFn {
        let mut out = Vec::with_capacity(degree + 1);
        out.push(self.d.clone());
        let mut x = self.b.clone();
        for _ in 1..=degree {
            out.push(&self.c * &x);
            x = &self.a * x;
        }
        PolyOpFn::from_coeffs_unchecked(self.out_dim(), self.in_dim(), out)
    }

    /// Rows `start..start+len` of the output.
    pub fn output_rows(&self, start: usize, len: usize) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.rows(start, len).into_owned(),
            d: self.d.rows(start, len).into_owned(),
        }
    }

    /// Left and right constant factors: `L · G(λ) · R`.
    pub fn sandwich(&self, left: &CMatrix, right: &CMatrix) -> Self {
        Self {
            a: self.a.clone(),
            b: &self.b * right,
            c: left * &self.c,
            d: left * &self.d * right,
        }
    }

    /// `self(λ) · inner(λ)`.
    pub fn cascade(&self, inner: &StateSpace) -> Result<Self> {
        if self.in_dim() != inner.out_dim() {
            return Err(Error::DimensionMismatch(format!(
                "cascade of {}-input with {}-output",
                self.in_dim(),
                inner.out_dim()
            )));
        }
        let (n1, n2) = (self.state_dim(), inner.state_dim());
        let mut a = zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &inner.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&inner.a);
        let b = vstack(&[&(&self.b * &inner.d), &inner.b]);
        let c = hstack(&[&self.c, &(&self.d * &inner.c)]);
        let d = &self.d * &inner.d;
        Ok(Self { a, b, c, d })
    }

    /// `[self(λ); other(λ)]` on a shared input.
    pub fn stack_outputs(&self, other: &StateSpace) -> Result<Self> {
        if self.in_dim() != other.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "stacking realizations with inputs {} and {}",
                self.in_dim(),
                other.in_dim()
            )));
        }
        Ok(Self {
            a: block_diag(&self.a, &other.a),
            b: vstack(&[&self.b, &other.b]),
            c: block_diag(&self.c, &other.c),
            d: vstack(&[&self.d, &other.d]),
        })
    }

    /// `self(λ) + other(λ)`.
    pub fn add(&self, other: &StateSpace) -> Result<Self> {
        if self.in_dim() != other.in_dim() || self.out_dim() != other.out_dim() {
            return Err(Error::DimensionMismatch("sum of realizations with different shapes".into()));
        }
        Ok(Self {
            a: block_diag(&self.a, &other.a),
            b: vstack(&[&self.b, &other.b]),
            c: hstack(&[&self.c, &other.c]),
            d: &self.d + &other.d,
        })
    }

    /// `Σ_k (A*)^k Q A^k` by squared doubling; fails when the series does
    /// not converge.
    pub fn stein(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
        let mut p = q.clone();
        let mut ak = a.clone();
        for _ in 0..64 {
            let inc = ak.adjoint() * &p * &ak;
            p += &inc;
            ak = &ak * &ak;
            let size = amax_or_zero(&p);
            if !size.is_finite() || size > 1e150 {
                return Err(Error::Unstable);
            }
            if amax_or_zero(&ak) < 1e-30 || amax_or_zero(&inc) <= 1e-17 * size.max(1e-300) {
                return Ok(hermitian_part(&p));
            }
        }
        Err(Error::Unstable)
    }

    /// Observability Gramian `P = A* P A + C* C`.
    pub fn observability_gramian(&self) -> Result<CMatrix> {
        Self::stein(&self.a, &(self.c.adjoint() * &self.c))
    }

    /// `Σ_n G_n* G_n` for the infinite coefficient sequence.
    pub fn gram_with(&self, p: &CMatrix) -> CMatrix {
        self.d.adjoint() * &self.d + self.b.adjoint() * p * &self.b
    }

    /// Realization of `N(λ) = Σ_{k≥1} λ^{k-1} Σ_n G_n* G_{n+k}`, given the
    /// observability Gramian `p`.
    pub fn lag_function(&self, p: &CMatrix) -> Self {
        let l = self.d.adjoint() * &self.c + self.b.adjoint() * p * &self.a;
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &l * &self.a,
            d: &l * &self.b,
        }
    }
}

/// Realization of `Z_top(λ) (I - Θ(λ) Z_loop(λ))^{-1}` where `Z` is split
/// into its first `top_rows` outputs and the remaining loop outputs, and
/// `Θ` is strictly proper (`Θ(0) = 0`).
pub fn feedback_through(z: &StateSpace, top_rows: usize, theta: &StateSpace) -> Result<StateSpace> {
    let loop_rows = z.out_dim().checked_sub(top_rows).ok_or_else(|| {
        Error::DimensionMismatch(format!("{top_rows} top rows exceed {} outputs", z.out_dim()))
    })?;
    if theta.in_dim() != loop_rows || theta.out_dim() != z.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "loop function maps {} -> {}, need {} -> {}",
            theta.in_dim(),
            theta.out_dim(),
            loop_rows,
            z.in_dim()
        )));
    }
    if amax_or_zero(&theta.d) > 0.0 {
        return Err(Error::InvalidInput("loop function must vanish at zero".into()));
    }
    let (az, bz) = (&z.a, &z.b);
    let (cy, dy) = (rows(&z.c, 0, top_rows), rows(&z.d, 0, top_rows));
    let (ce, de) = (rows(&z.c, top_rows, loop_rows), rows(&z.d, top_rows, loop_rows));
    let (at, bt, ct) = (&theta.a, &theta.b, &theta.c);
    let (nz, nt) = (az.nrows(), at.nrows());
    let mut a = zeros(nz + nt, nz + nt);
    a.view_mut((0, 0), (nz, nz)).copy_from(az);
    a.view_mut((0, nz), (nz, nt)).copy_from(&(bz * ct));
    a.view_mut((nz, 0), (nt, nz)).copy_from(&(bt * &ce));
    a.view_mut((nz, nz), (nt, nt)).copy_from(&(at + bt * &de * ct));
    let b = vstack(&[bz, &(bt * &de)]);
    let c = hstack(&[&cy, &(&dy * ct)]);
    StateSpace::new(a, b, c, dy)
}

/// `λ · I_dim` as a realization.
pub fn shift_realization(dim: usize) -> StateSpace {
    StateSpace { a: zeros(dim, dim), b: identity(dim), c: identity(dim), d: zeros(dim, dim) }
}
