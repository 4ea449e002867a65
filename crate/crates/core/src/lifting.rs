//! The interpolation engine.
//!
//! A problem is a contraction `ω = [ω1; ω2]: F -> Y ⊕ U` on a subspace
//! `F ⊂ U`. A solution is `H ∈ H²(U, Y)` whose column operator `Γ` is a
//! contraction with `H_0|_F = ω1` and `H_n|_F = H_{n-1} ω2` for `n ≥ 1`.
//! Solutions are `H = Z_Y (I - λ Z_U)^{-1}` for Schur `Z` with `Z|_F = ω`,
//! and the `Z` producing a fixed `H` are parameterized by Schur functions
//! `C` on the defect space of `Γ` with `C|_{F_Γ} = Ω`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{column_operator, gram_excess, Grid, PolyOpFn};
use crate::linalg::{
    defect_from_gram, identity, min_singular_value, operator_norm, orthonormal_range, pinv, solve_checked, vstack,
    CMatrix, Defect, Subspace, C64, DEFECT_TOL, RANK_TOL,
};
use crate::random::{self, InstanceRng};
use crate::realization::{feedback_through, shift_realization, StateSpace};
use crate::schur::{complete_row, completion_parameter_dims, SchurRealization};
use crate::series;

/// Slack on `‖ω‖ ≤ 1`.
pub const OMEGA_SLACK: f64 = 1e-10;
/// Tolerance of the grid check `Z(λ)|_F = ω`.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Tolerance on `‖W(0) - I‖`.
pub const W0_TOL: f64 = 1e-8;
/// Condition bound for `I + λR(λ)`, equivalently `W(λ) + I`.
pub const FIBER_MAX_CONDITION: f64 = 1e10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct InterpolationProblem {
    u_dim: usize,
    y_dim: usize,
    f: Subspace,
    omega1: CMatrix,
    omega2: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct ProblemRepr {
    #[serde(rename = "U")]
    u: usize,
    #[serde(rename = "Y")]
    y: usize,
    #[serde(rename = "F")]
    f: Subspace,
    #[serde(with = "crate::json::matrix")]
    omega1: CMatrix,
    #[serde(with = "crate::json::matrix")]
    omega2: CMatrix,
}

impl TryFrom<ProblemRepr> for InterpolationProblem {
    type Error = Error;

    fn try_from(r: ProblemRepr) -> Result<Self> {
        InterpolationProblem::new(r.u, r.y, r.f, r.omega1, r.omega2)
    }
}

impl From<InterpolationProblem> for ProblemRepr {
    fn from(p: InterpolationProblem) -> Self {
        Self { u: p.u_dim, y: p.y_dim, f: p.f, omega1: p.omega1, omega2: p.omega2 }
    }
}

impl InterpolationProblem {
    pub fn new(u_dim: usize, y_dim: usize, f: Subspace, omega1: CMatrix, omega2: CMatrix) -> Result<Self> {
        let k = f.dim();
        if f.ambient_dim() != u_dim || omega1.shape() != (y_dim, k) || omega2.shape() != (u_dim, k) {
            return Err(Error::DimensionMismatch(format!(
                "problem with U={u_dim}, Y={y_dim}, F in C^{} of dim {k}, ω1 {:?}, ω2 {:?}",
                f.ambient_dim(),
                omega1.shape(),
                omega2.shape()
            )));
        }
        let norm = operator_norm(&vstack(&[&omega1, &omega2]));
        if norm > 1.0 + OMEGA_SLACK {
            return Err(Error::NotAContraction { norm });
        }
        Ok(Self { u_dim, y_dim, f, omega1, omega2 })
    }

    /// `F = U` with `ω = [ω1; ω2]` given on the standard basis.
    pub fn full(omega1: CMatrix, omega2: CMatrix) -> Result<Self> {
        let u = omega2.nrows();
        Self::new(u, omega1.nrows(), Subspace::full(u), omega1, omega2)
    }

    pub fn u_dim(&self) -> usize {
        self.u_dim
    }

    pub fn y_dim(&self) -> usize {
        self.y_dim
    }

    pub fn f(&self) -> &Subspace {
        &self.f
    }

    pub fn omega1(&self) -> &CMatrix {
        &self.omega1
    }

    pub fn omega2(&self) -> &CMatrix {
        &self.omega2
    }

    pub fn omega(&self) -> CMatrix {
        vstack(&[&self.omega1, &self.omega2])
    }

    /// `ω P_F` as an operator `U -> Y ⊕ U`, independent of the basis of `F`.
    pub fn ambient_omega(&self) -> CMatrix {
        self.omega() * self.f.basis().adjoint()
    }
}

/// Random problem with `‖ω‖` drawn uniformly from `[0.3, 1]`.
pub fn random_problem(rng: &mut InstanceRng, u_dim: usize, y_dim: usize, f_dim: usize) -> InterpolationProblem {
    use rand::Rng;
    let f = random::subspace(rng, u_dim, f_dim);
    let norm = rng.random_range(0.3..=1.0);
    let omega = random::with_norm(rng, y_dim + u_dim, f_dim, norm);
    split_problem(u_dim, y_dim, f, omega)
}

/// `F = U` and `ω` a Haar isometry, so the solution is unique whenever
/// `ω2` is onto.
pub fn random_isometric_problem(rng: &mut InstanceRng, u_dim: usize, y_dim: usize) -> InterpolationProblem {
    let omega = random::isometry(rng, y_dim + u_dim, u_dim);
    split_problem(u_dim, y_dim, Subspace::full(u_dim), omega)
}

fn split_problem(u_dim: usize, y_dim: usize, f: Subspace, omega: CMatrix) -> InterpolationProblem {
    let omega1 = omega.rows(0, y_dim).into_owned();
    let omega2 = omega.rows(y_dim, u_dim).into_owned();
    InterpolationProblem::new(u_dim, y_dim, f, omega1, omega2).expect("generated problem is valid")
}

fn check_z_shape(p: &InterpolationProblem, z: &StateSpace) -> Result<()> {
    if z.in_dim() != p.u_dim || z.out_dim() != p.y_dim + p.u_dim {
        return Err(Error::DimensionMismatch(format!(
            "Z maps {} -> {}, problem needs {} -> {}",
            z.in_dim(),
            z.out_dim(),
            p.u_dim,
            p.y_dim + p.u_dim
        )));
    }
    Ok(())
}

/// `max ‖Z(λ) v_F - ω‖` over `λ = 0` and the grid.
pub fn constraint_residual<Z: AsRef<StateSpace>>(p: &InterpolationProblem, z: &Z, grid: &Grid) -> Result<f64> {
    let z = z.as_ref();
    check_z_shape(p, z)?;
    let omega = p.omega();
    let mut worst: f64 = 0.0;
    for &lam in std::iter::once(&C64::new(0.0, 0.0)).chain(grid.points()) {
        let v = z.value(lam).ok_or(Error::SingularResolvent { condition: f64::INFINITY })?;
        worst = worst.max(operator_norm(&(v * p.f.basis() - &omega)));
    }
    Ok(worst)
}

/// Taylor coefficients `0..=degree` of `H = Z_Y (I - λ Z_U)^{-1}`.
pub fn solve_from_z<Z: AsRef<StateSpace>>(p: &InterpolationProblem, z: &Z, degree: usize, grid: &Grid) -> Result<PolyOpFn> {
    let residual = constraint_residual(p, z, grid)?;
    if residual > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolated { residual });
    }
    let coeffs = z.as_ref().coeffs(degree);
    let top = coeffs.map_coeffs(|m| m.rows(0, p.y_dim).into_owned());
    let bottom = coeffs.map_coeffs(|m| m.rows(p.y_dim, p.u_dim).into_owned());
    let lp = series::times_lambda(&bottom, degree);
    Ok(series::feedback(&top, &lp, degree)?.with_contractive_bound(1.0))
}

/// Exact realization of the solution produced by `Z`.
pub fn solution_realization<Z: AsRef<StateSpace>>(p: &InterpolationProblem, z: &Z) -> Result<StateSpace> {
    check_z_shape(p, z.as_ref())?;
    feedback_through(z.as_ref(), p.y_dim, &shift_realization(p.u_dim))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub recurrence_residual: f64,
    pub partial_gram_excess: f64,
    pub grid_sup_norm: f64,
    pub degree: usize,
}

impl SolutionReport {
    pub fn passes(&self, tol_recurrence: f64, tol_contract: f64) -> bool {
        self.recurrence_residual <= tol_recurrence && self.partial_gram_excess <= tol_contract
    }
}

/// Coefficientwise residual of the interpolation conditions plus the
/// contraction diagnostics of the truncated `Γ`.
pub fn verify_solution(p: &InterpolationProblem, h: &PolyOpFn, degree: usize, grid: &Grid) -> Result<SolutionReport> {
    if h.out_dim() != p.y_dim || h.in_dim() != p.u_dim {
        return Err(Error::DimensionMismatch(format!(
            "H maps {} -> {}, problem needs {} -> {}",
            h.in_dim(),
            h.out_dim(),
            p.u_dim,
            p.y_dim
        )));
    }
    let vf = p.f.basis();
    let mut residual = operator_norm(&(h.coeff(0) * vf - &p.omega1));
    for n in 1..=degree {
        residual = residual.max(operator_norm(&(h.coeff(n) * vf - h.coeff(n - 1) * &p.omega2)));
    }
    let truncated = h.truncated(degree);
    let grid_sup_norm = grid
        .points()
        .iter()
        .map(|&lam| operator_norm(&truncated.eval_poly(lam)))
        .fold(0.0, f64::max);
    Ok(SolutionReport {
        recurrence_residual: residual,
        partial_gram_excess: gram_excess(h, degree),
        grid_sup_norm,
        degree,
    })
}

/// The column operator `Γ: U -> H²(Y)` of a function given by a
/// realization, with its Gramian computed in closed form.
#[derive(Clone, Debug)]
pub struct ColumnOperator {
    ss: StateSpace,
    obs: CMatrix,
    gram: CMatrix,
    defect: Defect,
}

impl ColumnOperator {
    pub fn from_realization(ss: StateSpace) -> Result<Self> {
        let obs = ss.observability_gramian()?;
        let gram = ss.gram_with(&obs);
        let defect = defect_from_gram(&gram, DEFECT_TOL)?;
        Ok(Self { ss, obs, gram, defect })
    }

    pub fn from_poly(h: &PolyOpFn) -> Result<Self> {
        Self::from_realization(StateSpace::fir(h))
    }

    pub fn realization(&self) -> &StateSpace {
        &self.ss
    }

    pub fn in_dim(&self) -> usize {
        self.ss.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.ss.out_dim()
    }

    /// `Γ*Γ = Σ H_n* H_n`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::max_eigenvalue(&self.gram).max(0.0).sqrt()
    }

    pub fn defect(&self) -> &Defect {
        &self.defect
    }

    pub fn defect_dim(&self) -> usize {
        self.defect.rank()
    }

    /// `D_Γ` in coordinates of its range, a `defect_dim × in_dim` matrix.
    pub fn defect_coords(&self) -> CMatrix {
        self.defect.coords()
    }

    pub fn coeffs(&self, degree: usize) -> PolyOpFn {
        self.ss.coeffs(degree)
    }

    /// Truncated block column `[H_0; …; H_N]`.
    pub fn column(&self, degree: usize) -> CMatrix {
        column_operator(&self.coeffs(degree), degree)
    }

    /// `N(λ) = Σ_{k≥1} λ^{k-1} Σ_n H_n* H_{n+k}`, so that
    /// `Γ*(I + λS*)(I - λS*)^{-1}Γ = Γ*Γ + 2λN(λ)`.
    pub fn lag_function(&self) -> StateSpace {
        self.ss.lag_function(&self.obs)
    }
}

/// `Ω: F_Γ -> D_Γ` with `Ω D_Γ f = D_Γ ω2 f`, everything in defect
/// coordinates.
#[derive(Clone, Debug)]
pub struct OmegaHat {
    /// `defect_dim × dim F_Γ`.
    pub omega: CMatrix,
    /// `F_Γ` inside the defect coordinate space.
    pub f_gamma: Subspace,
    pub identity_residual: f64,
}

impl OmegaHat {
    /// `Ω P_{F_Γ}` on the whole defect space.
    pub fn central(&self) -> CMatrix {
        &self.omega * self.f_gamma.basis().adjoint()
    }
}

fn gamma_constraint(p: &InterpolationProblem, gamma: &ColumnOperator) -> Result<(CMatrix, CMatrix)> {
    if gamma.in_dim() != p.u_dim || gamma.out_dim() != p.y_dim {
        return Err(Error::DimensionMismatch(format!(
            "Γ maps {} -> H²({}), problem needs {} -> H²({})",
            gamma.in_dim(),
            gamma.out_dim(),
            p.u_dim,
            p.y_dim
        )));
    }
    let dm = gamma.defect_coords();
    Ok((&dm * p.f.basis(), &dm * &p.omega2))
}

pub fn omega_hat(p: &InterpolationProblem, gamma: &ColumnOperator, tol: f64) -> Result<OmegaHat> {
    let (k_full, target) = gamma_constraint(p, gamma)?;
    let f_gamma = orthonormal_range(&k_full, RANK_TOL);
    let k = f_gamma.basis().adjoint() * &k_full;
    let omega = &target * pinv(&k, RANK_TOL);
    let identity_residual = operator_norm(&(&omega * &k - &target));
    if identity_residual > tol {
        return Err(Error::NotASolution(format!(
            "no operator on F_Γ matches D_Γ ω2 (residual {identity_residual:.3e})"
        )));
    }
    let norm = operator_norm(&omega);
    if norm > 1.0 + tol {
        return Err(Error::NotASolution(format!("Ω has norm {norm:.6} > 1")));
    }
    Ok(OmegaHat { omega, f_gamma, identity_residual })
}

/// `max ‖C(λ) D_Γ v_F - D_Γ ω2‖` over `λ = 0` and the grid.
pub fn membership_residual(cfun: &SchurRealization, p: &InterpolationProblem, gamma: &ColumnOperator, grid: &Grid) -> Result<f64> {
    let (k_full, target) = gamma_constraint(p, gamma)?;
    let d = gamma.defect_dim();
    if cfun.in_dim() != d || cfun.out_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "parameter must act on the {d}-dimensional defect space, got {} -> {}",
            cfun.in_dim(),
            cfun.out_dim()
        )));
    }
    let mut worst: f64 = 0.0;
    for &lam in std::iter::once(&C64::new(0.0, 0.0)).chain(grid.points()) {
        worst = worst.max(operator_norm(&(cfun.eval(lam)? * &k_full - &target)));
    }
    Ok(worst)
}

pub fn parameter_membership(cfun: &SchurRealization, p: &InterpolationProblem, gamma: &ColumnOperator, tol: f64, grid: &Grid) -> bool {
    let ok_constraint = matches!(membership_residual(cfun, p, gamma, grid), Ok(r) if r <= tol);
    let ok_norm = matches!(cfun.grid_sup_norm(grid), Ok(s) if s <= 1.0 + tol);
    ok_constraint && ok_norm
}

/// The constant member `Ω P_{F_Γ}` of the parameter set.
pub fn central_c(p: &InterpolationProblem, gamma: &ColumnOperator, tol: f64) -> Result<SchurRealization> {
    let om = omega_hat(p, gamma, tol)?;
    let mut c = om.central();
    let norm = operator_norm(&c);
    if norm > 1.0 {
        // within tol of the unit ball; pull back onto it
        c = c.unscale(norm);
    }
    SchurRealization::constant(c)
}

/// Dimensions `(in, out)` of the free parameter in [`fiber_member`].
pub fn fiber_parameter_dims(p: &InterpolationProblem, gamma: &ColumnOperator, tol: f64) -> Result<(usize, usize)> {
    let om = omega_hat(p, gamma, tol)?;
    completion_parameter_dims(&om.f_gamma, &om.omega)
}

/// General member `C = Ω ⊕ D_{Ω*} X` of the parameter set.
pub fn fiber_member(p: &InterpolationProblem, gamma: &ColumnOperator, x: &SchurRealization, tol: f64) -> Result<SchurRealization> {
    let om = omega_hat(p, gamma, tol)?;
    complete_row(&om.f_gamma, &om.omega, x)
}

/// The function `Z_C = [H (I + λR)^{-1}; R (I + λR)^{-1}]` with
/// `R(λ) = N(λ) + D_Γ* C(λ)(I - λC(λ))^{-1} D_Γ`, which equals
/// `[2H(W + I)^{-1}; λ^{-1}(W - I)(W + I)^{-1}]` for `W = I + 2λR`.
#[derive(Clone, Debug)]
pub struct FiberZ {
    h: StateSpace,
    lag: StateSpace,
    dm: CMatrix,
    c: SchurRealization,
    ss: StateSpace,
    w0_error: f64,
}

impl AsRef<StateSpace> for FiberZ {
    fn as_ref(&self) -> &StateSpace {
        &self.ss
    }
}

impl FiberZ {
    /// Realization of `Z_C`; not minimal and not a contractive colligation
    /// in general.
    pub fn realization(&self) -> &StateSpace {
        &self.ss
    }

    pub fn parameter(&self) -> &SchurRealization {
        &self.c
    }

    /// `‖W(0) - I‖`.
    pub fn w0_error(&self) -> f64 {
        self.w0_error
    }

    fn r_value(&self, lambda: C64) -> Result<CMatrix> {
        let cv = self.c.eval(lambda)?;
        let d = cv.nrows();
        let q = solve_checked(&(identity(d) - &cv * lambda), &cv, crate::schur::HERGLOTZ_MAX_CONDITION)?;
        let n = self
            .lag
            .value(lambda)
            .ok_or(Error::SingularResolvent { condition: f64::INFINITY })?;
        Ok(n + self.dm.adjoint() * q * &self.dm)
    }

    /// `W(λ) = I + 2λR(λ)`.
    pub fn w_eval(&self, lambda: C64) -> Result<CMatrix> {
        let r = self.r_value(lambda)?;
        Ok(identity(r.nrows()) + r * (lambda * 2.0))
    }

    /// Direct pointwise evaluation.
    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        if lambda.norm() >= 1.0 {
            return Err(Error::DomainError { lambda });
        }
        let r = self.r_value(lambda)?;
        let hv = self.h.value(lambda).ok_or(Error::SingularResolvent { condition: f64::INFINITY })?;
        let m = identity(r.nrows()) + &r * lambda;
        let top = vstack(&[&hv, &r]);
        let xt = solve_checked(&m.adjoint(), &top.adjoint(), FIBER_MAX_CONDITION)?;
        Ok(xt.adjoint())
    }

    pub fn taylor(&self, n: usize) -> CMatrix {
        self.ss.taylor(n)
    }

    pub fn coeffs(&self, degree: usize) -> PolyOpFn {
        self.ss.coeffs(degree)
    }

    pub fn grid_sup_norm(&self, grid: &Grid) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for &lam in grid.points() {
            sup = sup.max(operator_norm(&self.eval(lam)?));
        }
        Ok(sup)
    }
}

/// Builds `Z_C` for a member `C` of the parameter set of the solution
/// whose column operator is `gamma`.
pub fn z_from_c(p: &InterpolationProblem, gamma: &ColumnOperator, cfun: &SchurRealization, tol: f64, grid: &Grid) -> Result<FiberZ> {
    let residual = membership_residual(cfun, p, gamma, grid)?;
    if residual > tol {
        return Err(Error::NotInParameterSet { residual });
    }
    let dm = gamma.defect_coords();
    let u = p.u_dim;
    let w0_error = operator_norm(&(gamma.gram() + dm.adjoint() * &dm - identity(u)));
    if w0_error > W0_TOL {
        return Err(Error::WNotNormalizedAtZero { error: w0_error });
    }
    let d = dm.nrows();
    let cs = cfun.state_space();
    // Q(λ) = C(λ)(I - λC(λ))^{-1}
    let q = feedback_through(&cs.stack_outputs(cs)?, d, &shift_realization(d))?;
    let lag = gamma.lag_function();
    let r = lag.add(&q.sandwich(&dm.adjoint(), &dm))?;
    let h = gamma.realization().clone();
    let stacked = h.stack_outputs(&r)?;
    let y = p.y_dim;
    // [H; R; R] with the last block fed back through -λI
    let top = StateSpace {
        a: stacked.a.clone(),
        b: stacked.b.clone(),
        c: vstack(&[&stacked.c, &stacked.c.rows(y, u).into_owned()]),
        d: vstack(&[&stacked.d, &stacked.d.rows(y, u).into_owned()]),
    };
    let neg_shift = StateSpace { c: -identity(u), ..shift_realization(u) };
    let ss = feedback_through(&top, y + u, &neg_shift)?;
    Ok(FiberZ { h, lag, dm, c: cfun.clone(), ss, w0_error })
}

/// `ω` isometric and `ω2` onto `U`; then the problem has one solution.
pub fn uniqueness_certificate(p: &InterpolationProblem) -> bool {
    let omega = p.omega();
    let isometric = omega.ncols() == 0 || min_singular_value(&omega) >= 1.0 - 1e-10;
    let onto = orthonormal_range(&p.omega2, RANK_TOL).dim() == p.u_dim;
    isometric && onto
}
