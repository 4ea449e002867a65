//! Contractive multipliers on model spaces `H = H²(U) ⊖ ΘH²(E)`.
//!
//! Inner functions are `λ·B_1⋯B_m` (Blaschke–Potapov factors) or
//! `λ^N V0`, always carried by a unitary colligation `(A, B, C, 0)`. For
//! such a colligation `x -> C(I - λA)^{-1}x` is a unitary map of `C^n`
//! onto `H`, and all model-space bookkeeping happens in these state
//! coordinates:
//!
//! - constants `u` sit at `C*u`, and `λH0` is `ker C`;
//! - `H0 = H²(U) ⊖ ΦH²(E)` with `Φ = λ^{-1}Θ` is `A ker C`;
//! - `ΦE_E e` sits at `Be`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{multiplication_operator, shift_and_embed, toeplitz, Grid, PolyOpFn};
use crate::lifting::{central_c, z_from_c, ColumnOperator, FiberZ, InterpolationProblem};
use crate::linalg::{
    amax_or_zero, block_diag, condition_number, identity, operator_norm, orthonormal_range, singular_values, vstack,
    zeros, CMatrix, Subspace, C64, RANK_TOL,
};
use crate::random::{self, InstanceRng};
use crate::realization::{feedback_through, shift_realization, StateSpace};
use crate::series;

/// Tolerance on the unitarity of an inner function's colligation.
pub const UNITARY_TOL: f64 = 1e-10;
/// Condition bound on `Δ(z) = I - Θ(z)C(z)`.
pub const DELTA_MAX_CONDITION: f64 = 1e10;

/// Factor `I - VV* + ((λ - a)/(1 - āλ)) VV*` with `V` orthonormal columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpFactor {
    pub a: C64,
    #[serde(rename = "V", with = "crate::json::matrix")]
    pub v: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSpec {
    /// `λ · B_1(λ) ⋯ B_m(λ)` on `C^dim`.
    BpProduct { dim: usize, factors: Vec<BpFactor> },
    /// `λ^N V0` with `V0` unitary.
    Power {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "V0", with = "crate::json::matrix")]
        v0: CMatrix,
    },
}

/// Inner function with `Θ(0) = 0` and a unitary colligation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InnerSpec", into = "InnerSpec")]
pub struct InnerFn {
    spec: InnerSpec,
    ss: StateSpace,
}

impl TryFrom<InnerSpec> for InnerFn {
    type Error = Error;

    fn try_from(spec: InnerSpec) -> Result<Self> {
        InnerFn::new(spec)
    }
}

impl From<InnerFn> for InnerSpec {
    fn from(t: InnerFn) -> Self {
        t.spec
    }
}

fn factor_realization(f: &BpFactor, dim: usize) -> Result<StateSpace> {
    let (rows, k) = f.v.shape();
    if rows != dim || k == 0 {
        return Err(Error::DimensionMismatch(format!(
            "factor basis is {rows}x{k}, need {dim} rows and at least one column"
        )));
    }
    Subspace::new(f.v.clone())?;
    if f.a.norm() >= 1.0 {
        return Err(Error::InvalidInput(format!("factor zero {} not inside the disk", f.a)));
    }
    let s = (1.0 - f.a.norm_sqr()).sqrt();
    let p = &f.v * f.v.adjoint();
    StateSpace::new(
        identity(k) * f.a.conj(),
        f.v.adjoint().scale(s),
        f.v.scale(s),
        identity(dim) - p * (f.a + 1.0),
    )
}

impl InnerFn {
    pub fn new(spec: InnerSpec) -> Result<Self> {
        let ss = match &spec {
            InnerSpec::BpProduct { dim, factors } => {
                let mut ss = shift_realization(*dim);
                for f in factors {
                    ss = ss.cascade(&factor_realization(f, *dim)?)?;
                }
                ss
            }
            InnerSpec::Power { n, v0 } => {
                if *n == 0 {
                    return Err(Error::InvalidInput("power inner function needs N >= 1".into()));
                }
                let d = v0.nrows();
                if v0.ncols() != d {
                    return Err(Error::InvalidInput("V0 must be square".into()));
                }
                let mut coeffs = vec![zeros(d, d); *n];
                coeffs.push(v0.clone());
                StateSpace::fir(&PolyOpFn::new(d, d, coeffs)?)
            }
        };
        let m = ss.colligation();
        let err = amax_or_zero(&(m.adjoint() * &m - identity(m.ncols())));
        if err > UNITARY_TOL || m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!("colligation is not unitary (error {err:.3e})")));
        }
        if amax_or_zero(&ss.d) > 0.0 {
            return Err(Error::InvalidInput("inner function must vanish at zero".into()));
        }
        Ok(Self { spec, ss })
    }

    /// `Θ(λ) = λ I_dim`.
    pub fn shift(dim: usize) -> Self {
        Self::new(InnerSpec::BpProduct { dim, factors: Vec::new() }).expect("shift is inner")
    }

    /// `Θ(λ) = λ^n I_dim`.
    pub fn power(n: usize, dim: usize) -> Result<Self> {
        Self::new(InnerSpec::Power { n, v0: identity(dim) })
    }

    pub fn bp_product(dim: usize, factors: Vec<BpFactor>) -> Result<Self> {
        Self::new(InnerSpec::BpProduct { dim, factors })
    }

    pub fn spec(&self) -> &InnerSpec {
        &self.spec
    }

    pub fn realization(&self) -> &StateSpace {
        &self.ss
    }

    /// `dim U = dim E`.
    pub fn dim(&self) -> usize {
        self.ss.out_dim()
    }

    /// McMillan degree, equal to `dim H`.
    pub fn degree(&self) -> usize {
        self.ss.state_dim()
    }

    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        if lambda.norm() >= 1.0 {
            return Err(Error::DomainError { lambda });
        }
        self.ss.value(lambda).ok_or(Error::SingularResolvent { condition: f64::INFINITY })
    }

    pub fn coeffs(&self, degree: usize) -> PolyOpFn {
        self.ss.coeffs(degree)
    }

    /// `O(λ) = C(I - λA)^{-1}`, the unitary map of state coordinates onto `H`.
    pub fn coordinate_map(&self) -> StateSpace {
        let n = self.degree();
        StateSpace {
            a: self.ss.a.clone(),
            b: identity(n),
            c: &self.ss.c * &self.ss.a,
            d: self.ss.c.clone(),
        }
    }

    /// Orthonormal basis of `ker C`, the coordinates of `λH0`.
    pub fn kernel_of_c(&self) -> Subspace {
        Subspace::from_orthonormal(self.ss.c.adjoint()).complement()
    }
}

/// Random `λ · B_1⋯B_m` on `C^dim` with zeros `|a| ≤ max_zero`.
pub fn random_bp(rng: &mut InstanceRng, dim: usize, factors: usize, max_zero: f64) -> InnerFn {
    use rand::Rng;
    let list = (0..factors)
        .map(|_| {
            let r = max_zero * rng.random::<f64>().sqrt();
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let k = rng.random_range(1..=dim);
            BpFactor { a: C64::from_polar(r, phase), v: random::isometry(rng, dim, k) }
        })
        .collect();
    InnerFn::bp_product(dim, list).expect("random factors are valid")
}

/// Truncated model space with its state-coordinate bookkeeping.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    degree: usize,
    /// `[C; CA; …; CA^N]`, the truncated coordinate map.
    coords: CMatrix,
    basis: Subspace,
    /// Orthonormal coordinates of `H0`.
    h0_coords: CMatrix,
    h0_basis: Subspace,
}

impl ModelSpace {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn coords(&self) -> &CMatrix {
        &self.coords
    }

    /// Orthonormal basis of the truncated `H` inside `H²_N(U)`.
    pub fn basis(&self) -> &Subspace {
        &self.basis
    }

    pub fn h0_coords(&self) -> &CMatrix {
        &self.h0_coords
    }

    pub fn h0_basis(&self) -> &Subspace {
        &self.h0_basis
    }
}

pub fn required_degree(theta: &InnerFn) -> usize {
    2 * theta.degree() + 4
}

pub fn model_space(theta: &InnerFn, degree: usize) -> Result<ModelSpace> {
    let required = required_degree(theta);
    if degree < required {
        return Err(Error::DegreeTooSmall { degree, required });
    }
    let o = theta.coordinate_map();
    let coords = crate::hardy::column_operator(&o.coeffs(degree), degree);
    let basis = orthonormal_range(&coords, RANK_TOL);
    let h0_coords = &theta.ss.a * theta.kernel_of_c().basis();
    let h0_basis = orthonormal_range(&(&coords * &h0_coords), RANK_TOL);
    Ok(ModelSpace { degree, coords, basis, h0_coords, h0_basis })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `‖O_N* O_N - I‖`, the truncation loss of the coordinate map.
    pub coordinate_isometry: f64,
    /// `‖Σ_k Θ_k* C A^k‖`, which is `M_Θ* O = 0` (`H ⊥ ΘH²(E)`) in closed
    /// form through the observability Gramian.
    pub theta_orthogonality: f64,
    /// `‖T_N(Θ)* basis‖`, the same statement in the truncation; carries
    /// the `‖A^N‖` tail and is kept out of [`DecompositionReport::max_residual`].
    pub truncated_theta_orthogonality: f64,
    /// `E_U U ⊂ H` at coordinates `C*`.
    pub constants_residual: f64,
    /// `λH0 ⊥ E_U U` and `λ·(A x) = x` on `ker C`.
    pub first_decomposition: f64,
    /// `ΦE_E E` at coordinates `B`, orthogonal to `H0`.
    pub second_decomposition: f64,
    /// `Rh0 = h0`, `Qh0 = λh0` are isometries into `H`.
    pub rq_residual: f64,
    pub dim_h: usize,
    pub dim_h0: usize,
}

impl DecompositionReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.coordinate_isometry,
            self.theta_orthogonality,
            self.constants_residual,
            self.first_decomposition,
            self.second_decomposition,
            self.rq_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_decompositions(theta: &InnerFn, ms: &ModelSpace) -> Result<DecompositionReport> {
    let n_deg = ms.degree;
    let u = theta.dim();
    let n = theta.degree();
    let (a, b, c) = (&theta.ss.a, &theta.ss.b, &theta.ss.c);
    let o = &ms.coords;
    let coordinate_isometry = amax_or_zero(&(o.adjoint() * o - identity(n)));
    let t = toeplitz(&theta.coeffs(n_deg), n_deg);
    let truncated_theta_orthogonality = operator_norm(&(t.adjoint() * ms.basis.basis()));
    let gram = theta.ss.observability_gramian()?;
    let theta_orthogonality = operator_norm(&(theta.ss.d.adjoint() * c + b.adjoint() * &gram * a));
    let (s, e) = shift_and_embed(u, n_deg);
    let constants_residual = operator_norm(&(o * c.adjoint() - &e));

    let ker = theta.kernel_of_c();
    let kb = ker.basis();
    let lam_h0 = o * kb;
    let first = operator_norm(&(e.adjoint() * &lam_h0))
        .max(operator_norm(&(&s * o * a * kb - &lam_h0)))
        .max((ker.dim() + u) as f64 - n as f64);

    // Φ_k = Θ_{k+1}
    let phi = theta.coeffs(n_deg + 1);
    let phi_col = vstack(&(0..=n_deg).map(|k| phi.coeff(k + 1)).collect::<Vec<_>>().iter().collect::<Vec<_>>());
    let h0 = o * &ms.h0_coords;
    let phi_e = o * b;
    let second = operator_norm(&(&phi_e - &phi_col))
        .max(operator_norm(&(h0.adjoint() * &phi_e)))
        .max(((ms.h0_coords.ncols() + b.ncols()) as f64 - n as f64).abs());

    let q = a.adjoint() * &ms.h0_coords;
    let m = ms.h0_coords.ncols();
    let rq = amax_or_zero(&(ms.h0_coords.adjoint() * &ms.h0_coords - identity(m)))
        .max(amax_or_zero(&(q.adjoint() * &q - identity(m))))
        .max(operator_norm(&(&s * &h0 - o * &q)));

    Ok(DecompositionReport {
        coordinate_isometry,
        theta_orthogonality,
        truncated_theta_orthogonality,
        constants_residual,
        first_decomposition: first,
        second_decomposition: second,
        rq_residual: rq,
        dim_h: ms.dim(),
        dim_h0: ms.h0_basis.dim(),
    })
}

/// Number of singular values of the truncated `T_N(Θ)*` below `tol`;
/// approximates `dim H` independently of the state coordinates.
pub fn near_kernel_dimension(theta: &InnerFn, degree: usize, tol: f64) -> usize {
    let t = toeplitz(&theta.coeffs(degree), degree);
    let sv = singular_values(&t.adjoint());
    let deficit = t.nrows() - sv.len();
    sv.iter().filter(|&&s| s < tol).count() + deficit
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultReport {
    pub truncated_norm: f64,
    pub tail_mass: f64,
    pub passed: bool,
}

/// Norm of `f -> Hf` on the truncated model space.
pub fn mult_contraction_test(h: &PolyOpFn, ms: &ModelSpace, tol: f64) -> Result<MultReport> {
    let m = multiplication_operator(h, &ms.basis, ms.degree)?;
    let truncated_norm = operator_norm(&m.matrix);
    Ok(MultReport { truncated_norm, tail_mass: m.tail_mass, passed: truncated_norm <= 1.0 + tol })
}

/// `K̃ = H·O`: the multiplier composed with the coordinate map.
pub fn coordinate_multiplier(theta: &InnerFn, h: &StateSpace) -> Result<StateSpace> {
    if h.in_dim() != theta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "multiplier acts on C^{}, model space lives in H²(C^{})",
            h.in_dim(),
            theta.dim()
        )));
    }
    h.cascade(&theta.coordinate_map())
}

/// Exact `‖M_H|_H‖` from the Gramian of `H·O`.
pub fn exact_mult_norm(theta: &InnerFn, h: &StateSpace) -> Result<f64> {
    let k = coordinate_multiplier(theta, h)?;
    let p = k.observability_gramian()?;
    Ok(crate::linalg::max_eigenvalue(&k.gram_with(&p)).max(0.0).sqrt())
}

fn check_theta_z(theta: &InnerFn, z: &StateSpace, y_dim: usize) -> Result<()> {
    let u = theta.dim();
    if z.in_dim() != u || z.out_dim() != y_dim + u {
        return Err(Error::DimensionMismatch(format!(
            "Z maps {} -> {}, need {u} -> {y_dim}+{u}",
            z.in_dim(),
            z.out_dim()
        )));
    }
    Ok(())
}

/// Coefficients of `H = Z_Y (I - Θ Z_E)^{-1}` by series recursion.
pub fn h_from_z_theta<Z: AsRef<StateSpace>>(theta: &InnerFn, z: &Z, y_dim: usize, degree: usize) -> Result<PolyOpFn> {
    check_theta_z(theta, z.as_ref(), y_dim)?;
    let u = theta.dim();
    let zc = z.as_ref().coeffs(degree);
    let top = zc.map_coeffs(|m| m.rows(0, y_dim).into_owned());
    let ze = zc.map_coeffs(|m| m.rows(y_dim, u).into_owned());
    let lp = series::product(&theta.coeffs(degree), &ze, degree)?;
    series::feedback(&top, &lp, degree)
}

/// Exact realization of `Z_Y (I - Θ Z_E)^{-1}`.
pub fn h_realization_theta<Z: AsRef<StateSpace>>(theta: &InnerFn, z: &Z, y_dim: usize) -> Result<StateSpace> {
    check_theta_z(theta, z.as_ref(), y_dim)?;
    feedback_through(z.as_ref(), y_dim, &theta.ss)
}

/// The problem on `H` in state coordinates: `F = ker C` (that is `λH0`),
/// `ω1 = 0`, `ω2 = A|_F` (the map `λh0 -> h0`).
pub fn theta_problem(theta: &InnerFn, y_dim: usize) -> Result<InterpolationProblem> {
    let f = theta.kernel_of_c();
    let omega2 = &theta.ss.a * f.basis();
    InterpolationProblem::new(theta.degree(), y_dim, f.clone(), zeros(y_dim, f.dim()), omega2)
}

/// A `Z ∈ S(U, Y ⊕ E)` recovered from a contractive multiplier.
#[derive(Clone, Debug)]
pub struct ThetaZ {
    fiber: FiberZ,
    left: CMatrix,
    right: CMatrix,
    z: StateSpace,
    c_fn: StateSpace,
    pub max_delta_condition: f64,
}

impl AsRef<StateSpace> for ThetaZ {
    fn as_ref(&self) -> &StateSpace {
        &self.z
    }
}

impl ThetaZ {
    pub fn realization(&self) -> &StateSpace {
        &self.z
    }

    /// `C(z) = E_E* M_Φ* G(z) E_U`.
    pub fn c_function(&self) -> &StateSpace {
        &self.c_fn
    }

    pub fn fiber(&self) -> &FiberZ {
        &self.fiber
    }

    pub fn eval(&self, lambda: C64) -> Result<CMatrix> {
        Ok(&self.left * self.fiber.eval(lambda)? * &self.right)
    }

    pub fn grid_sup_norm(&self, grid: &Grid) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for &lam in grid.points() {
            sup = sup.max(operator_norm(&self.eval(lam)?));
        }
        Ok(sup)
    }
}

/// Reverse construction: the multiplier `h` (a contraction on `H`) is
/// written as `Γ` for the problem [`theta_problem`], its central
/// parameter yields `W = [F; G]`, and `Z = [F C*; B* G C*]`.
pub fn z_from_h_theta(theta: &InnerFn, h: &StateSpace, tol: f64, grid: &Grid) -> Result<ThetaZ> {
    let norm = exact_mult_norm(theta, h)?;
    if norm > 1.0 + tol {
        return Err(Error::NotAContraction { norm });
    }
    let y = h.out_dim();
    let p = theta_problem(theta, y)?;
    let gamma = ColumnOperator::from_realization(coordinate_multiplier(theta, h)?)?;
    let c = central_c(&p, &gamma, tol)?;
    let fiber = z_from_c(&p, &gamma, &c, tol, grid)?;
    let left = block_diag(&identity(y), &theta.ss.b.adjoint());
    let right = theta.ss.c.adjoint();
    let z = fiber.realization().sandwich(&left, &right);
    let c_fn = z.output_rows(y, theta.dim());
    let u = theta.dim();
    let mut max_delta_condition: f64 = 1.0;
    for &lam in grid.points() {
        let cv = c_fn.value(lam).ok_or(Error::SingularResolvent { condition: f64::INFINITY })?;
        let delta = identity(u) - theta.eval(lam)? * cv;
        let condition = condition_number(&delta);
        if condition > DELTA_MAX_CONDITION {
            return Err(Error::SingularResolvent { condition });
        }
        max_delta_condition = max_delta_condition.max(condition);
    }
    Ok(ThetaZ { fiber, left, right, z, c_fn, max_delta_condition })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    /// `‖S_Y Γ R - Γ Q‖`.
    pub intertwining_residual: f64,
    /// `‖Γ - T_N(K) O_N‖`, the coefficientwise form of `(Γf)(λ) = K(λ)f(λ)`.
    pub pointwise_residual: f64,
    pub intertwines: bool,
    pub multiplies: bool,
    #[serde(skip)]
    pub k: Option<PolyOpFn>,
}

impl PointwiseReport {
    /// Both sides of the equivalence agree.
    pub fn consistent(&self) -> bool {
        self.intertwines == self.multiplies
    }
}

/// `gamma` maps state coordinates of `H` into `H²_N(Y)`; `K` is read off
/// as `Γ E_U`, i.e. `Γ C*`.
pub fn pointwise_mult_check(gamma: &CMatrix, theta: &InnerFn, ms: &ModelSpace, tol: f64) -> Result<PointwiseReport> {
    let n_deg = ms.degree;
    let n = theta.degree();
    if gamma.ncols() != n || !gamma.nrows().is_multiple_of(n_deg + 1) {
        return Err(Error::DimensionMismatch(format!(
            "Γ is {:?}, need (N+1)·dim Y rows and {n} columns",
            gamma.shape()
        )));
    }
    let y = gamma.nrows() / (n_deg + 1);
    let (s, _) = shift_and_embed(y, n_deg);
    let r = &ms.h0_coords;
    let q = theta.ss.a.adjoint() * r;
    let intertwining_residual = operator_norm(&(&s * gamma * r - gamma * &q));
    let k = if y == 0 {
        PolyOpFn::zero(0, theta.dim(), n_deg)
    } else {
        crate::hardy::column_to_poly(&(gamma * theta.ss.c.adjoint()), y)?
    };
    let pointwise_residual = operator_norm(&(gamma - toeplitz(&k, n_deg) * &ms.coords));
    Ok(PointwiseReport {
        intertwining_residual,
        pointwise_residual,
        intertwines: intertwining_residual <= tol,
        multiplies: pointwise_residual <= tol,
        k: Some(k),
    })
}

/// Truncated matrix of `f -> Hf` in state coordinates.
pub fn multiplier_matrix(h: &PolyOpFn, ms: &ModelSpace) -> CMatrix {
    toeplitz(&h.truncated(ms.degree), ms.degree) * &ms.coords
}
