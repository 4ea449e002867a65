//! Relaxed commutant lifting data and its reduction to interpolation.
//!
//! A data set `{A, T', R, Q}` satisfies `T'AR = AQ` and `R*R ≤ Q*Q`. The
//! isometric lifting `U'` of `T'` is the Sz.-Nagy–Schäffer operator on
//! `H' ⊕ H²(D_{T'})`, and liftings are `B = [A; Γ D_A]` with `Γ` a
//! contraction from the defect space of `A` into `H²(D_{T'})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{column_to_poly, shift_and_embed, PolyOpFn};
use crate::lifting::InterpolationProblem;
use crate::linalg::{
    defect, identity, min_eigenvalue, operator_norm, orthonormal_range, pinv, vstack, zeros, CMatrix,
    DEFECT_TOL, RANK_TOL,
};
use crate::random::{self, InstanceRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RclDataSet {
    /// `H -> H'`.
    #[serde(rename = "A", with = "crate::json::matrix")]
    pub a: CMatrix,
    /// `H' -> H'`.
    #[serde(rename = "Tprime", with = "crate::json::matrix")]
    pub tprime: CMatrix,
    /// `H0 -> H`.
    #[serde(rename = "R", with = "crate::json::matrix")]
    pub r: CMatrix,
    /// `H0 -> H`.
    #[serde(rename = "Q", with = "crate::json::matrix")]
    pub q: CMatrix,
}

impl RclDataSet {
    pub fn new(a: CMatrix, tprime: CMatrix, r: CMatrix, q: CMatrix) -> Result<Self> {
        let (hp, h) = a.shape();
        let ok = tprime.shape() == (hp, hp) && r.nrows() == h && q.shape() == r.shape();
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "data set A {:?}, T' {:?}, R {:?}, Q {:?}",
                a.shape(),
                tprime.shape(),
                r.shape(),
                q.shape()
            )));
        }
        Ok(Self { a, tprime, r, q })
    }

    pub fn h_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn hprime_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn h0_dim(&self) -> usize {
        self.r.ncols()
    }

    /// `‖T'AR - AQ‖`.
    pub fn intertwining_residual(&self) -> f64 {
        operator_norm(&(&self.tprime * &self.a * &self.r - &self.a * &self.q))
    }

    /// `λ_min(Q*Q - R*R)`.
    pub fn domination_margin(&self) -> f64 {
        min_eigenvalue(&(self.q.adjoint() * &self.q - self.r.adjoint() * &self.r))
    }
}

pub fn validate_data_set(ds: &RclDataSet, tol: f64) -> bool {
    operator_norm(&ds.a) <= 1.0 + tol
        && operator_norm(&ds.tprime) <= 1.0 + tol
        && ds.intertwining_residual() <= tol
        && (ds.h0_dim() == 0 || ds.domination_margin() >= -tol)
}

/// `D_{T'}` coordinates: `V_T* D_{T'}` with `V_T` an orthonormal basis of
/// its range.
fn tprime_defect(ds: &RclDataSet) -> Result<(CMatrix, CMatrix)> {
    let d = defect(&ds.tprime, DEFECT_TOL)?;
    Ok((d.range.basis().clone(), d.coords()))
}

fn a_defect(ds: &RclDataSet) -> Result<(CMatrix, CMatrix)> {
    let d = defect(&ds.a, DEFECT_TOL)?;
    Ok((d.range.basis().clone(), d.coords()))
}

/// Truncated `U' = [[T', 0], [E D_{T'}, S]]` on `H' ⊕ H²_N(D_{T'})`, with
/// `D_{T'}` in its range coordinates.
pub fn sns_lifting(tprime: &CMatrix, degree: usize) -> Result<CMatrix> {
    let d = defect(tprime, DEFECT_TOL)?;
    let t = d.rank();
    let hp = tprime.nrows();
    let (s, e) = shift_and_embed(t, degree);
    let n = hp + (degree + 1) * t;
    let mut u = zeros(n, n);
    u.view_mut((0, 0), (hp, hp)).copy_from(tprime);
    u.view_mut((hp, 0), ((degree + 1) * t, hp)).copy_from(&(e * d.coords()));
    u.view_mut((hp, hp), s.shape()).copy_from(&s);
    Ok(u)
}

/// An underlying contraction together with the bases identifying its
/// spaces: `Y` with the range of `D_{T'}` in `H'`, `U` with the range of
/// `D_A` in `H`.
#[derive(Clone, Debug)]
pub struct UnderlyingContraction {
    pub problem: InterpolationProblem,
    pub y_basis: CMatrix,
    pub u_basis: CMatrix,
    pub generator_residual: f64,
}

impl UnderlyingContraction {
    /// `ω P_F` carried into `H' ⊕ H` through the identifying bases.
    pub fn ambient_omega(&self) -> CMatrix {
        let p = &self.problem;
        let lifted = vstack(&[&(&self.y_basis * p.omega1()), &(&self.u_basis * p.omega2())]);
        lifted * (&self.u_basis * p.f().basis()).adjoint()
    }
}

/// `ω (D_A Q h) = [D_{T'} A R h; D_A R h]` on `F = closure(D_A Q H0)`.
pub fn underlying_contraction(ds: &RclDataSet, tol: f64) -> Result<UnderlyingContraction> {
    let (y_basis, dt) = tprime_defect(ds)?;
    let (u_basis, da) = a_defect(ds)?;
    let generators = &da * &ds.q;
    let f = orthonormal_range(&generators, RANK_TOL);
    let k = f.basis().adjoint() * &generators;
    let target = vstack(&[&(&dt * &ds.a * &ds.r), &(&da * &ds.r)]);
    let omega = &target * pinv(&k, RANK_TOL);
    let generator_residual = operator_norm(&(&omega * &k - &target));
    if generator_residual > tol {
        return Err(Error::InconsistentGenerators { residual: generator_residual });
    }
    let norm = operator_norm(&omega);
    if norm > 1.0 + tol {
        return Err(Error::NotAContraction { norm });
    }
    let ydim = y_basis.ncols();
    let udim = u_basis.ncols();
    let mut omega = omega;
    if norm > 1.0 {
        omega = omega.unscale(norm);
    }
    let problem = InterpolationProblem::new(
        udim,
        ydim,
        f,
        omega.rows(0, ydim).into_owned(),
        omega.rows(ydim, udim).into_owned(),
    )?;
    Ok(UnderlyingContraction { problem, y_basis, u_basis, generator_residual })
}

/// `B = [A; Γ D_A]` split into its two blocks.
#[derive(Clone, Debug)]
pub struct LiftingCandidate {
    pub a_part: CMatrix,
    /// Column `H -> H²_N(D_{T'})`, coefficient `n` is `Γ_n V_A* D_A`.
    pub tail: PolyOpFn,
}

impl LiftingCandidate {
    pub fn degree(&self) -> usize {
        self.tail.degree()
    }

    /// Stacked matrix of `B`.
    pub fn matrix(&self) -> CMatrix {
        let tail = crate::hardy::column_operator(&self.tail, self.degree());
        vstack(&[&self.a_part, &tail])
    }
}

/// `gamma` is the block column `(N+1)·dim D_{T'} × dim D_A`.
pub fn gamma_to_b(ds: &RclDataSet, gamma: &CMatrix, tol: f64) -> Result<LiftingCandidate> {
    let (y_basis, _) = tprime_defect(ds)?;
    let (_, da) = a_defect(ds)?;
    let t = y_basis.ncols();
    if gamma.ncols() != da.nrows() || t == 0 && gamma.nrows() != 0 || t > 0 && !gamma.nrows().is_multiple_of(t) {
        return Err(Error::DimensionMismatch(format!(
            "Γ is {:?}, expected a stack of {t}-row blocks with {} columns",
            gamma.shape(),
            da.nrows()
        )));
    }
    let tail_col = gamma * &da;
    let tail = if t == 0 {
        PolyOpFn::zero(0, ds.h_dim(), 0)
    } else {
        column_to_poly(&tail_col, t)?
    };
    let cand = LiftingCandidate { a_part: ds.a.clone(), tail };
    let norm = operator_norm(&cand.matrix());
    if norm > 1.0 + tol {
        return Err(Error::NotAContraction { norm });
    }
    Ok(cand)
}

/// Recovers `Γ` on the range of `D_A`.
pub fn b_to_gamma(ds: &RclDataSet, b: &LiftingCandidate) -> Result<CMatrix> {
    let (_, da) = a_defect(ds)?;
    let tail = crate::hardy::column_operator(&b.tail, b.degree());
    Ok(tail * pinv(&da, RANK_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RclReport {
    /// `‖Π_{H'} B - A‖`.
    pub projection_residual: f64,
    /// `‖U'BR - BQ‖` on rows of `H'` and blocks `0..N-1`.
    pub intertwining_residual: f64,
    pub norm: f64,
    pub degree: usize,
}

impl RclReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.projection_residual <= tol && self.intertwining_residual <= tol && self.norm <= 1.0 + tol
    }
}

pub fn verify_rcl(ds: &RclDataSet, b: &LiftingCandidate, degree: usize) -> Result<RclReport> {
    let u = sns_lifting(&ds.tprime, degree)?;
    let t = defect(&ds.tprime, DEFECT_TOL)?.rank();
    let hp = ds.hprime_dim();
    let full = b.tail.truncated(degree);
    let tail = crate::hardy::column_operator(&full, degree);
    let bm = vstack(&[&b.a_part, &tail]);
    if bm.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "B has {} rows, lifting acts on {}",
            bm.nrows(),
            u.ncols()
        )));
    }
    let lhs = &u * &bm * &ds.r - &bm * &ds.q;
    let keep = hp + degree * t;
    Ok(RclReport {
        projection_residual: operator_norm(&(&b.a_part - &ds.a)),
        intertwining_residual: operator_norm(&lhs.rows(0, keep).into_owned()),
        norm: operator_norm(&bm),
        degree,
    })
}

/// `Ã = Π_Y`, `T̃' = Π_U` on `Y ⊕ U`, `R̃ = ω`, `Q̃ = [0; v_F]`.
pub fn data_set_from_omega(p: &InterpolationProblem) -> RclDataSet {
    let (y, u) = (p.y_dim(), p.u_dim());
    let n = y + u;
    let mut py = zeros(n, n);
    py.view_mut((0, 0), (y, y)).copy_from(&identity(y));
    let pu = identity(n) - &py;
    let q = vstack(&[&zeros(y, p.f().dim()), p.f().basis()]);
    RclDataSet { a: py, tprime: pu, r: p.omega(), q }
}

/// `ω P_F` of a problem placed in `Y ⊕ U` through the coordinate
/// embeddings, for comparison with [`UnderlyingContraction::ambient_omega`]
/// of its data set.
pub fn embedded_omega(p: &InterpolationProblem) -> CMatrix {
    let (y, u) = (p.y_dim(), p.u_dim());
    let iy = CMatrix::identity(y + u, y);
    let mut iu = zeros(y + u, u);
    iu.view_mut((y, 0), (u, u)).copy_from(&identity(u));
    let lifted = vstack(&[&(&iy * p.omega1()), &(&iu * p.omega2())]);
    lifted * (&iu * p.f().basis()).adjoint()
}

/// Random valid data set with `dim H' = hp`, `dim H = hp + k` and
/// `dim H0 = h0 ≤ k`.
pub fn random_data_set(rng: &mut InstanceRng, hp: usize, k: usize, h0: usize) -> RclDataSet {
    assert!(h0 <= k, "need dim H0 <= dim ker A");
    let h = hp + k;
    // A = [A1 0] V* with A1 invertible, so A has full row rank and a
    // k-dimensional kernel
    let v = random::unitary(rng, h);
    let a1 = random::with_norm(rng, hp, hp, 0.9);
    let mut a_core = zeros(hp, h);
    a_core.view_mut((0, 0), (hp, hp)).copy_from(&a1);
    let a = a_core * v.adjoint();
    let tprime = random::with_norm(rng, hp, hp, 0.9);
    let kernel = v.columns(hp, k).into_owned();
    let n0 = kernel * random::isometry(rng, k, h0);
    let r0 = random::gaussian(rng, h, h0);
    let m = pinv(&a, RANK_TOL) * &tprime * &a * &r0;
    // Q*Q = s²M*M + I ≥ R*R = s²R0*R0 when s ≤ 1/‖R0‖
    let s = 0.9 / operator_norm(&r0).max(1e-12);
    RclDataSet { a, tprime, r: r0.scale(s), q: m.scale(s) + n0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    #[test]
    fn trivial_data_sets() {
        let ok = RclDataSet::new(zeros(1, 1), zeros(1, 1), identity(1), identity(1)).unwrap();
        assert!(validate_data_set(&ok, 1e-10));
        let bad = RclDataSet::new(zeros(1, 1), zeros(1, 1), identity(1).scale(2.0), identity(1)).unwrap();
        assert!(!validate_data_set(&bad, 1e-10));
    }

    #[test]
    fn sns_scalar_zero() {
        let u = sns_lifting(&zeros(1, 1), 1).unwrap();
        assert_eq!(u, from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]));
    }

    #[test]
    fn sns_unitary_has_no_tail() {
        let t = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let u = sns_lifting(&t, 3).unwrap();
        assert_eq!(u, t);
    }

    #[test]
    fn scalar_data_set_blocks() {
        let p = InterpolationProblem::full(from_real_rows(&[&[0.6]]), from_real_rows(&[&[0.8]])).unwrap();
        let ds = data_set_from_omega(&p);
        assert_eq!(ds.a, from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(ds.tprime, from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(ds.r, from_real_rows(&[&[0.6], &[0.8]]));
        assert_eq!(ds.q, from_real_rows(&[&[0.0], &[1.0]]));
        assert!(validate_data_set(&ds, 1e-12));
        let uc = underlying_contraction(&ds, 1e-9).unwrap();
        assert!(operator_norm(&(uc.ambient_omega() - embedded_omega(&p))) < 1e-12);
    }

    #[test]
    fn zero_data_gives_isometry() {
        let ds = RclDataSet::new(zeros(1, 1), zeros(1, 1), identity(1), identity(1)).unwrap();
        let uc = underlying_contraction(&ds, 1e-9).unwrap();
        assert!(operator_norm(uc.problem.omega1()) < 1e-15);
        assert!((operator_norm(uc.problem.omega2()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_a_has_empty_problem() {
        let ds = RclDataSet::new(identity(2), zeros(2, 2), zeros(2, 1), zeros(2, 1)).unwrap();
        let uc = underlying_contraction(&ds, 1e-9).unwrap();
        assert_eq!(uc.problem.u_dim(), 0);
        assert_eq!(uc.problem.f().dim(), 0);
    }

    #[test]
    fn gamma_b_roundtrip() {
        let mut rng = random::rng(2);
        let ds = random_data_set(&mut rng, 2, 2, 1);
        assert!(validate_data_set(&ds, 1e-10));
        let t = defect(&ds.tprime, DEFECT_TOL).unwrap().rank();
        let u = defect(&ds.a, DEFECT_TOL).unwrap().rank();
        let gamma = random::with_norm(&mut rng, 4 * t, u, 0.5);
        let b = gamma_to_b(&ds, &gamma, 1e-10).unwrap();
        assert!(operator_norm(&(b_to_gamma(&ds, &b).unwrap() - &gamma)) < 1e-12);
        let zero = gamma_to_b(&ds, &zeros(4 * t, u), 1e-10).unwrap();
        assert!((operator_norm(&zero.matrix()) - operator_norm(&ds.a)).abs() < 1e-14);
    }

    #[test]
    fn solution_lifts_to_intertwining_contraction() {
        let grid = crate::hardy::Grid::default();
        for seed in 0..8u64 {
            let mut rng = random::rng(seed);
            let ds = random_data_set(&mut rng, 2, 2, 1);
            let uc = underlying_contraction(&ds, 1e-9).unwrap();
            let z = crate::schur::random_constrained(&uc.problem, 2, &mut rng).unwrap();
            let h = crate::lifting::solve_from_z(&uc.problem, &z, 20, &grid).unwrap();
            let gamma = crate::hardy::column_operator(&h, 20);
            let b = gamma_to_b(&ds, &gamma, 1e-8).unwrap();
            let rep = verify_rcl(&ds, &b, 20).unwrap();
            assert!(rep.passes(1e-8), "seed {seed}: {rep:?}");
        }
    }
}
