//! Dense complex linear algebra shared by every other module.
//!
//! Operators are plain `DMatrix<Complex64>` values. Subspaces carry an
//! orthonormal column basis, and defect operators are built from a clamped
//! Hermitian eigendecomposition so that they stay positive semidefinite
//! under round-off.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Orthonormality tolerance for [`Subspace`] bases.
pub const TOL_ORTH: f64 = 1e-12;
/// Default relative rank tolerance.
pub const RANK_TOL: f64 = 1e-9;
/// Cut-off on defect singular values. Round-off of order 1e-16 in `I - T*T`
/// becomes 1e-8 after the square root, so ranges are cut above that level.
pub const DEFECT_TOL: f64 = 1e-7;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| real(rows[i][j]))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry modulus, 0 for empty matrices.
pub fn amax_or_zero(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Full singular value decomposition `M = U Σ V*`, values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub v_t: CMatrix,
}

/// LAPACK `zgesvd`; the pure-Rust complex SVD loses accuracy on
/// rank-deficient Hermitian inputs.
pub fn svd(m: &CMatrix) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd { u: identity(r), values: Vec::new(), v_t: identity(c) };
    }
    let mut a = m.clone();
    let mut values = vec![0.0; k];
    let mut u = zeros(r, r);
    let mut v_t = zeros(c, c);
    let mut rwork = vec![0.0; 5 * k];
    let mut info = 0;
    let (ri, ci) = (r as i32, c as i32);
    let mut query = [C64::new(0.0, 0.0)];
    // SAFETY: buffers are column-major with the leading dimensions passed
    unsafe {
        lapack::zgesvd(
            b'A', b'A', ri, ci, a.as_mut_slice(), ri, &mut values, u.as_mut_slice(), ri, v_t.as_mut_slice(), ci,
            &mut query, -1, &mut rwork, &mut info,
        );
    }
    let lwork = (query[0].re as usize).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgesvd(
            b'A', b'A', ri, ci, a.as_mut_slice(), ri, &mut values, u.as_mut_slice(), ri, v_t.as_mut_slice(), ci,
            &mut work, lwork as i32, &mut rwork, &mut info,
        );
    }
    assert!(info == 0, "zgesvd failed with info {info}");
    Svd { u, values, v_t }
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    svd(m).values
}

/// Largest singular value, 0 for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value over `min(rows, cols)` values, 0 if empty.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn is_contraction(m: &CMatrix, slack: f64) -> bool {
    operator_norm(m) <= 1.0 + slack
}

/// Ratio of extreme singular values of a square matrix; infinite if singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Subspace of `C^ambient_dim` held as an orthonormal column basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn new(basis: CMatrix) -> Result<Self> {
        if basis.ncols() > basis.nrows() {
            return Err(Error::InvalidInput(format!(
                "subspace basis has {} columns in dimension {}",
                basis.ncols(),
                basis.nrows()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let err = amax_or_zero(&(gram - identity(basis.ncols())));
        if err > TOL_ORTH {
            return Err(Error::InvalidInput(format!(
                "subspace basis is not orthonormal (error {err:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    /// Skips the orthonormality check; callers guarantee the invariant.
    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Self { basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self { basis: zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { basis: identity(ambient_dim) }
    }

    /// Span of the leading `dim` standard basis vectors.
    pub fn coordinate(ambient_dim: usize, dim: usize) -> Self {
        Self { basis: CMatrix::identity(ambient_dim, dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projection as an ambient operator.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        orthonormal_range(&(identity(n) - self.projector()), 0.5)
    }

    /// Largest distance of `other`'s basis from this subspace.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        let p = self.projector();
        operator_norm(&(other.basis() - p * other.basis()))
    }
}

/// Orthonormal basis of the column space, keeping singular directions
/// whose singular value exceeds `tol`.
pub fn orthonormal_range(m: &CMatrix, tol: f64) -> Subspace {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return Subspace::zero(rows);
    }
    let d = svd(m);
    let keep = d.values.iter().take_while(|&&s| s > tol).count();
    Subspace::from_orthonormal(d.u.columns(0, keep).into_owned())
}

/// Defect operator `D = (I - T*T)^{1/2}` together with an orthonormal
/// basis of its range.
#[derive(Clone, Debug)]
pub struct Defect {
    pub d: CMatrix,
    pub range: Subspace,
}

impl Defect {
    /// `D` written in range coordinates, i.e. `V* D` for the range basis `V`.
    pub fn coords(&self) -> CMatrix {
        self.range.basis().adjoint() * &self.d
    }

    pub fn rank(&self) -> usize {
        self.range.dim()
    }
}

pub fn defect(t: &CMatrix, tol: f64) -> Result<Defect> {
    let norm = operator_norm(t);
    if norm > 1.0 + tol {
        return Err(Error::NotAContraction { norm });
    }
    defect_from_gram(&(t.adjoint() * t), tol)
}

/// Defect `(I - G)^{1/2}` of an operator whose Gram matrix `T*T` is `gram`.
pub fn defect_from_gram(gram: &CMatrix, tol: f64) -> Result<Defect> {
    let top = max_eigenvalue(gram);
    if top > (1.0 + tol) * (1.0 + tol) {
        return Err(Error::NotAContraction { norm: top.max(0.0).sqrt() });
    }
    let n = gram.nrows();
    let (values, vectors) = hermitian_eigen(&(identity(n) - gram));
    let mut d = zeros(n, n);
    let mut kept = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let r = v.max(0.0).sqrt();
        if r > tol {
            let col = vectors.column(k);
            d += (col * col.adjoint()).scale(r);
            kept.push(k);
        }
    }
    // largest defect directions first
    kept.reverse();
    let basis = CMatrix::from_fn(n, kept.len(), |r, j| vectors[(r, kept[j])]);
    Ok(Defect {
        d: hermitian_part(&d),
        range: Subspace::from_orthonormal(basis),
    })
}

/// Principal square root of a Hermitian PSD matrix, negative round-off clipped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        let col = vectors.column(k);
        out += (col * col.adjoint()).scale(v.max(0.0).sqrt());
    }
    out
}

/// Moore–Penrose pseudo-inverse, singular values at or below `tol` dropped.
pub fn pinv(m: &CMatrix, tol: f64) -> CMatrix {
    let (r, cols) = m.shape();
    if r == 0 || cols == 0 {
        return zeros(cols, r);
    }
    let d = svd(m);
    let mut out = zeros(cols, r);
    for (k, &s) in d.values.iter().enumerate() {
        if s > tol {
            out += (d.v_t.row(k).adjoint() * d.u.column(k).adjoint()).scale(1.0 / s);
        }
    }
    out
}

/// Solves `A X = B` for square `A` by LU.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    if a.nrows() == 0 {
        return Some(zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Solves `A X = B` after checking the condition number of `A`.
pub fn solve_checked(a: &CMatrix, b: &CMatrix, max_condition: f64) -> Result<CMatrix> {
    let condition = condition_number(a);
    if condition > max_condition {
        return Err(Error::SingularResolvent { condition });
    }
    solve(a, b).ok_or(Error::SingularResolvent { condition })
}

pub fn vstack(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut k = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, k), (rows, b.ncols())).copy_from(*b);
        k += b.ncols();
    }
    out
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Rows `start..start+len` of `m`.
pub fn rows(m: &CMatrix, start: usize, len: usize) -> CMatrix {
    m.rows(start, len).into_owned()
}

pub fn cols(m: &CMatrix, start: usize, len: usize) -> CMatrix {
    m.columns(start, len).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert!((operator_norm(&identity(3)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&from_real_rows(&[&[0.6]])) - 0.6).abs() < 1e-15);
        let col = from_real_rows(&[&[0.6], &[0.8]]);
        assert!((operator_norm(&col) - 1.0).abs() < 1e-15);
        assert_eq!(operator_norm(&zeros(0, 3)), 0.0);
    }

    #[test]
    fn contraction_examples() {
        assert!(is_contraction(&identity(2), 1e-8));
        assert!(!is_contraction(&identity(1).scale(1.1), 1e-8));
        assert!(is_contraction(&from_real_rows(&[&[0.6], &[0.8]]), 1e-12));
    }

    #[test]
    fn defect_of_zero_is_identity() {
        let d = defect(&zeros(2, 2), DEFECT_TOL).unwrap();
        assert!((d.d.clone() - identity(2)).camax() < 1e-15);
        assert_eq!(d.rank(), 2);
    }

    #[test]
    fn defect_of_unitary_vanishes() {
        let s = 0.5f64.sqrt();
        let u = CMatrix::from_row_slice(2, 2, &[real(s), c(0.0, s), c(0.0, s), real(s)]);
        let d = defect(&u, DEFECT_TOL).unwrap();
        assert!(d.d.camax() < 1e-12);
        assert_eq!(d.rank(), 0);
    }

    #[test]
    fn scalar_defect() {
        let d = defect(&from_real_rows(&[&[0.6]]), DEFECT_TOL).unwrap();
        assert!((d.d[(0, 0)].re - 0.8).abs() < 1e-14);
        assert_eq!(d.rank(), 1);
    }

    #[test]
    fn defect_rejects_expansive() {
        let err = defect(&identity(1).scale(1.1), DEFECT_TOL).unwrap_err();
        assert!(matches!(err, Error::NotAContraction { .. }));
    }

    #[test]
    fn range_examples() {
        assert_eq!(orthonormal_range(&identity(3), RANK_TOL).dim(), 3);
        assert_eq!(orthonormal_range(&zeros(3, 2), RANK_TOL).dim(), 0);
        // u v* with u = (1, 1)/√2 scaled, v = (1, 2)
        let uv = from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0]]);
        let s = orthonormal_range(&uv, RANK_TOL);
        assert_eq!(s.dim(), 1);
        let b = s.basis();
        assert!((b[(0, 0)].norm() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((b[(1, 0)] - b[(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let v = from_real_rows(&[&[0.6], &[0.8], &[0.0]]);
        let f = Subspace::new(v).unwrap();
        let g = f.complement();
        assert_eq!(g.dim(), 2);
        assert!((f.basis().adjoint() * g.basis()).camax() < 1e-14);
    }

    #[test]
    fn svd_of_rank_one_projector() {
        let v = from_real_rows(&[&[0.6], &[0.0], &[0.8]]);
        let p = identity(3) - &v * v.adjoint();
        let d = svd(&p);
        assert!((d.values[0] - 1.0).abs() < 1e-14 && (d.values[1] - 1.0).abs() < 1e-14 && d.values[2] < 1e-14);
        let sigma = CMatrix::from_fn(3, 3, |i, j| if i == j { real(d.values[i]) } else { real(0.0) });
        assert!(amax_or_zero(&(&d.u * sigma * &d.v_t - &p)) < 1e-14);
    }

    #[test]
    fn pinv_inverts_full_rank() {
        let m = from_real_rows(&[&[2.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let p = pinv(&m, 1e-12);
        assert!((p * &m - identity(2)).camax() < 1e-13);
    }
}
