//! Schur-class functions carried by contractive colligations.
//!
//! A colligation `[[A, B], [C, D]]` of norm at most one defines
//! `Z(λ) = D + λ C (I - λA)^{-1} B` with `‖Z(λ)‖ ≤ 1` on the disk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{Grid, PolyOpFn};
use crate::lifting::InterpolationProblem;
use crate::linalg::{defect, identity, operator_norm, solve_checked, CMatrix, Subspace, C64, DEFECT_TOL};
use crate::random::{self, InstanceRng};
use crate::realization::StateSpace;

/// Slack allowed on the colligation norm.
pub const COLLIGATION_SLACK: f64 = 1e-10;
/// Condition bound beyond which `I - λC(λ)` counts as singular.
pub const HERGLOTZ_MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColligationRepr", into = "ColligationRepr")]
pub struct SchurRealization {
    ss: StateSpace,
}

#[derive(Serialize, Deserialize)]
struct ColligationRepr {
    #[serde(rename = "A", with = "crate::json::matrix")]
    a: CMatrix,
    #[serde(rename = "B", with = "crate::json::matrix")]
    b: CMatrix,
    #[serde(rename = "C", with = "crate::json::matrix")]
    c: CMatrix,
    #[serde(rename = "D", with = "crate::json::matrix")]
    d: CMatrix,
}

impl TryFrom<ColligationRepr> for SchurRealization {
    type Error = Error;

    fn try_from(r: ColligationRepr) -> Result<Self> {
        SchurRealization::new(r.a, r.b, r.c, r.d)
    }
}

impl From<SchurRealization> for ColligationRepr {
    fn from(z: SchurRealization) -> Self {
        let StateSpace { a, b, c, d } = z.ss;
        Self { a, b, c, d }
    }
}

impl AsRef<StateSpace> for SchurRealization {
    fn as_ref(&self) -> &StateSpace {
        &self.ss
    }
}

impl SchurRealization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        Self::from_state_space(StateSpace::new(a, b, c, d)?)
    }

    pub fn from_state_space(ss: StateSpace) -> Result<Self> {
        let norm = operator_norm(&ss.colligation());
        if norm > 1.0 + COLLIGATION_SLACK {
            return Err(Error::NotAContraction { norm });
        }
        Ok(Self { ss })
    }

    pub fn constant(d: CMatrix) -> Result<Self> {
        Self::from_state_space(StateSpace::constant(d))
    }

    /// `Z(λ) = λ I_dim`.
    pub fn shift(dim: usize) -> Self {
        Self { ss: crate::realization::shift_realization(dim) }
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.ss
    }

    pub fn into_state_space(self) -> StateSpace {
        self.ss
    }

    pub fn state_dim(&self) -> usize {
        self.ss.state_dim()
    }

    pub fn in_dim(&self) -> usize {
        self.ss.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.ss.out_dim()
    }

    pub fn colligation_norm(&self) -> f64 {
        operator_norm(&self.ss.colligation())
    }

    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        eval_schur(self, lambda)
    }

    pub fn taylor(&self, n: usize) -> CMatrix {
        self.ss.taylor(n)
    }

    pub fn coeffs(&self, degree: usize) -> PolyOpFn {
        self.ss.coeffs(degree)
    }

    /// Largest value norm over the grid.
    pub fn grid_sup_norm(&self, grid: &Grid) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for &lam in grid.points() {
            sup = sup.max(operator_norm(&self.eval(lam)?));
        }
        Ok(sup)
    }
}

pub fn eval_schur(z: &SchurRealization, lambda: C64) -> Result<CMatrix> {
    if lambda.norm() >= 1.0 {
        return Err(Error::DomainError { lambda });
    }
    // ‖A‖ ≤ 1 keeps I - λA invertible inside the disk
    z.ss.value(lambda).ok_or(Error::SingularResolvent { condition: f64::INFINITY })
}

pub fn taylor_schur(z: &SchurRealization, n: usize) -> CMatrix {
    z.ss.taylor(n)
}

/// Gaussian colligation scaled into the unit ball.
pub fn random_schur(out_dim: usize, in_dim: usize, state_dim: usize, seed: u64) -> SchurRealization {
    random_schur_from(&mut random::rng(seed), out_dim, in_dim, state_dim)
}

pub fn random_schur_from(rng: &mut InstanceRng, out_dim: usize, in_dim: usize, state_dim: usize) -> SchurRealization {
    let m = random::contraction(rng, state_dim + out_dim, state_dim + in_dim);
    let ss = StateSpace::from_colligation(&m, state_dim, in_dim).expect("shapes follow from construction");
    SchurRealization { ss }
}

/// Colligation with orthonormal columns drawn from the Haar measure;
/// needs `out_dim >= in_dim`.
pub fn random_isometric_schur(rng: &mut InstanceRng, out_dim: usize, in_dim: usize, state_dim: usize) -> Result<SchurRealization> {
    if out_dim < in_dim {
        return Err(Error::DimensionMismatch(format!(
            "isometric colligation needs out {out_dim} >= in {in_dim}"
        )));
    }
    let m = random::isometry(rng, state_dim + out_dim, state_dim + in_dim);
    Ok(SchurRealization { ss: StateSpace::from_colligation(&m, state_dim, in_dim)? })
}

/// All Schur functions `Z` on `C^n` with `Z(λ) v_F = ω` for the basis `v_F`
/// of `F`: `Z(λ)(f ⊕ g) = ω f + D_{ω*} X(λ) g` over `F ⊕ F^⊥`.
///
/// `X` maps `F^⊥` coordinates into coordinates of the range of `D_{ω*}`.
pub fn complete_row(f: &Subspace, omega: &CMatrix, x: &SchurRealization) -> Result<SchurRealization> {
    if omega.ncols() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ω has {} columns, F has dimension {}",
            omega.ncols(),
            f.dim()
        )));
    }
    let comp = f.complement();
    let star = defect(&omega.adjoint(), DEFECT_TOL)?;
    let r = star.rank();
    if x.in_dim() != comp.dim() || x.out_dim() != r {
        return Err(Error::DimensionMismatch(format!(
            "free parameter must map {} -> {}, got {} -> {}",
            comp.dim(),
            r,
            x.in_dim(),
            x.out_dim()
        )));
    }
    let lift = &star.d * star.range.basis();
    let vp = comp.basis().adjoint();
    let xs = x.state_space();
    let ss = StateSpace::new(
        xs.a.clone(),
        &xs.b * &vp,
        &lift * &xs.c,
        omega * f.basis().adjoint() + &lift * &xs.d * &vp,
    )?;
    SchurRealization::from_state_space(ss)
}

/// Dimensions `(in, out)` the free parameter of [`complete_row`] must have.
pub fn completion_parameter_dims(f: &Subspace, omega: &CMatrix) -> Result<(usize, usize)> {
    let star = defect(&omega.adjoint(), DEFECT_TOL)?;
    Ok((f.ambient_dim() - f.dim(), star.rank()))
}

/// Constrained completion for an interpolation problem: `Z(λ)|_F = ω`.
pub fn constrained_completion(p: &InterpolationProblem, x: &SchurRealization) -> Result<SchurRealization> {
    complete_row(p.f(), &p.omega(), x)
}

/// Random constrained `Z` with an `x_state`-dimensional free parameter.
pub fn random_constrained(p: &InterpolationProblem, x_state: usize, rng: &mut InstanceRng) -> Result<SchurRealization> {
    let (i, o) = completion_parameter_dims(p.f(), &p.omega())?;
    let x = random_schur_from(rng, o, i, x_state);
    constrained_completion(p, &x)
}

/// `(I + λC(λ))(I - λC(λ))^{-1}`.
pub fn herglotz_eval(c: &SchurRealization, lambda: C64) -> Result<CMatrix> {
    let v = c.eval(lambda)?;
    let n = v.nrows();
    if n != v.ncols() {
        return Err(Error::DimensionMismatch("Herglotz factor needs a square function".into()));
    }
    let lv = &v * lambda;
    let num = identity(n) + &lv;
    let den = identity(n) - &lv;
    // right division: X den = num  ⇔  den* X* = num*
    let xt = solve_checked(&den.adjoint(), &num.adjoint(), HERGLOTZ_MAX_CONDITION)?;
    Ok(xt.adjoint())
}
