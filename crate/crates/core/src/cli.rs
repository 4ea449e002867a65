//! Batch front end: instance generation, solving, verification and the
//! roundtrip suites, each summarized in a versioned JSON report.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::hardy::{column_operator, Grid, PolyOpFn};
use crate::lifting::{
    central_c, constraint_residual, random_problem, solution_realization, solve_from_z, uniqueness_certificate,
    verify_solution, z_from_c, ColumnOperator, InterpolationProblem,
};
use crate::linalg::{operator_norm, zeros};
use crate::modelspace::{
    check_decompositions, exact_mult_norm, h_realization_theta, model_space, mult_contraction_test, random_bp,
    required_degree, z_from_h_theta, InnerFn,
};
use crate::random::{self, InstanceRng};
use crate::rcl::{
    data_set_from_omega, embedded_omega, gamma_to_b, random_data_set, underlying_contraction, validate_data_set,
    verify_rcl, RclDataSet,
};
use crate::schur::{completion_parameter_dims, constrained_completion, random_constrained, random_isometric_schur, SchurRealization};

pub const SCHEMA: &str = "liftkit/1";
pub const GRID_ENV: &str = "LIFTKIT_GRID";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Coefficientwise tolerance for roundtrips through a parameterization.
const ROUNDTRIP_TOL: f64 = 1e-7;
/// Coefficientwise tolerance for the model-space reverse roundtrip.
const THETA_ROUNDTRIP_TOL: f64 = 1e-6;
const W0_CHECK_TOL: f64 = 1e-10;
const OMEGA_ROUNDTRIP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gen,
    Solve,
    Verify,
    Fiber,
    Rcl,
    Modelspace,
    Selftest,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Gen => "gen",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Fiber => "fiber",
            Command::Rcl => "rcl",
            Command::Modelspace => "modelspace",
            Command::Selftest => "selftest",
        };
        f.write_str(s)
    }
}

/// Dimensions of generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dims {
    pub u: usize,
    pub y: usize,
    pub f: usize,
    /// State dimension of free Schur parameters.
    pub state: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Self { u: 3, y: 2, f: 2, state: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub degree: usize,
    pub dims: Dims,
    pub tol_verify: f64,
    pub tol_contract: f64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub grid_radii: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            degree: 24,
            dims: Dims::default(),
            tol_verify: 1e-9,
            tol_contract: 1e-8,
            input: None,
            output: None,
            grid_radii: None,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.degree < 4 {
            return Err(format!("degree must be at least 4, got {}", self.degree));
        }
        for (name, t) in [("tol-verify", self.tol_verify), ("tol-contract", self.tol_contract)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(format!("{name} must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> crate::Result<Grid> {
        match &self.grid_radii {
            Some(r) => Grid::circles(r, Grid::POINTS_PER_CIRCLE),
            None => Ok(Grid::default()),
        }
    }
}

/// Comma-separated radii, as accepted by `LIFTKIT_GRID`.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let radii = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad grid radius {t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if radii.is_empty() || radii.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(format!("grid radii must lie in [0, 1), got {s:?}"));
    }
    Ok(radii)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tol`.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value <= tol }
    }

    /// Passes when `value > tol`; used for rejections.
    pub fn above(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value > tol }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Command,
    pub seed: u64,
    pub degree: usize,
    pub status: Status,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<Value>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

type Step<T> = std::result::Result<T, Failure>;

struct Suite {
    checks: Vec<Check>,
    artifact: Option<Value>,
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let mut report = Report {
        schema: SCHEMA,
        command: cfg.command,
        seed: cfg.seed,
        degree: cfg.degree,
        status: Status::Pass,
        checks: Vec::new(),
        failures: Vec::new(),
        error: None,
        artifact: None,
    };
    let result = cfg.validate().map_err(Failure::Usage).and_then(|_| dispatch(cfg));
    let exit_code = match result {
        Ok(suite) => {
            report.failures = suite.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            report.checks = suite.checks;
            let written = match (&cfg.output, suite.artifact) {
                (Some(path), Some(artifact)) => write_json(path, &artifact),
                (None, artifact) => {
                    report.artifact = artifact;
                    Ok(())
                }
                (Some(_), None) => Ok(()),
            };
            match written {
                Err(Failure::Usage(msg)) | Err(Failure::Numeric(msg)) => {
                    report.error = Some(msg);
                    report.status = Status::Error;
                    EXIT_USAGE
                }
                Ok(()) if report.failures.is_empty() => EXIT_PASS,
                Ok(()) => {
                    report.status = Status::Fail;
                    EXIT_VERIFY
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            report.status = Status::Error;
            report.error = Some(msg);
            EXIT_USAGE
        }
        Err(Failure::Numeric(msg)) => {
            report.status = Status::Error;
            report.error = Some(msg);
            EXIT_NUMERIC
        }
    };
    Outcome { exit_code, report }
}

fn dispatch(cfg: &RunConfig) -> Step<Suite> {
    let grid = cfg.grid().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rng = random::rng(cfg.seed);
    match cfg.command {
        Command::Gen => gen(cfg, &grid, &mut rng),
        Command::Solve => solve(cfg, &grid, &mut rng),
        Command::Verify => verify(cfg, &grid),
        Command::Fiber => {
            let p = match read_input(cfg)? {
                Some(v) => problem_from_value(v)?,
                None => random_problem(&mut rng, cfg.dims.u, cfg.dims.y, cfg.dims.f),
            };
            fiber_suite(cfg, &grid, &mut rng, &p)
        }
        Command::Rcl => {
            let ds = match read_input(cfg)? {
                Some(v) => from_value::<RclDataSet>(v)?,
                None => random_data_set(&mut rng, 2, 2, 1),
            };
            rcl_suite(cfg, &grid, &mut rng, &ds)
        }
        Command::Modelspace => {
            let theta = match read_input(cfg)? {
                Some(v) => from_value::<InnerFn>(v)?,
                None => random_bp(&mut rng, 2, 2, 0.5),
            };
            modelspace_suite(cfg, &grid, &mut rng, &theta)
        }
        Command::Selftest => selftest(cfg, &grid, &mut rng),
    }
}

fn read_input(cfg: &RunConfig) -> Step<Option<Value>> {
    let Some(path) = &cfg.input else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    let v = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("parsing {}: {e}", path.display())))?;
    Ok(Some(v))
}

fn write_json(path: &PathBuf, v: &Value) -> Step<()> {
    let text = serde_json::to_string_pretty(v).expect("artifact serializes");
    std::fs::write(path, text + "\n").map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Step<T> {
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("invalid input: {e}")))
}

fn field<T: for<'de> Deserialize<'de>>(v: &Value, key: &str) -> Step<Option<T>> {
    v.get(key).map(|x| from_value(x.clone())).transpose()
}

/// Accepts a bare problem or an object carrying it under `"problem"`.
fn problem_from_value(v: Value) -> Step<InterpolationProblem> {
    match v.get("problem") {
        Some(p) => from_value(p.clone()),
        None => from_value(v),
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("value serializes")
}

/// Constrained completion with the zero free parameter.
fn default_z(p: &InterpolationProblem) -> crate::Result<SchurRealization> {
    let (i, o) = completion_parameter_dims(p.f(), &p.omega())?;
    constrained_completion(p, &SchurRealization::constant(zeros(o, i))?)
}

fn gen(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng) -> Step<Suite> {
    let d = cfg.dims;
    let p = random_problem(rng, d.u, d.y, d.f);
    let z = random_constrained(&p, d.state, rng)?;
    let checks = vec![
        Check::at_most("omega_norm_excess", (operator_norm(&p.omega()) - 1.0).max(0.0), 0.0),
        Check::at_most("constraint_residual", constraint_residual(&p, &z, grid)?, cfg.tol_contract),
    ];
    Ok(Suite { checks, artifact: Some(json!({ "problem": to_value(&p), "Z": to_value(&z) })) })
}

fn solution_checks(cfg: &RunConfig, p: &InterpolationProblem, h: &PolyOpFn, grid: &Grid) -> Step<Vec<Check>> {
    let rep = verify_solution(p, h, cfg.degree, grid)?;
    Ok(vec![
        Check::at_most("recurrence_residual", rep.recurrence_residual, cfg.tol_verify),
        Check::at_most("partial_gram_excess", rep.partial_gram_excess, cfg.tol_contract),
    ])
}

fn solve(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng) -> Step<Suite> {
    let (p, z) = match read_input(cfg)? {
        Some(v) => {
            let p = problem_from_value(v.clone())?;
            let z = match field::<SchurRealization>(&v, "Z")? {
                Some(z) => z,
                None => default_z(&p)?,
            };
            (p, z)
        }
        None => {
            let d = cfg.dims;
            let p = random_problem(rng, d.u, d.y, d.f);
            let z = random_constrained(&p, d.state, rng)?;
            (p, z)
        }
    };
    let mut checks = vec![Check::at_most("constraint_residual", constraint_residual(&p, &z, grid)?, cfg.tol_contract)];
    let h = solve_from_z(&p, &z, cfg.degree, grid)?;
    checks.extend(solution_checks(cfg, &p, &h, grid)?);
    let artifact = json!({ "problem": to_value(&p), "Z": to_value(&z), "N": cfg.degree, "H": to_value(&h) });
    Ok(Suite { checks, artifact: Some(artifact) })
}

fn verify(cfg: &RunConfig, grid: &Grid) -> Step<Suite> {
    let v = read_input(cfg)?.ok_or_else(|| Failure::Usage("verify needs --in".into()))?;
    let p = problem_from_value(v.clone())?;
    let h: PolyOpFn = field(&v, "H")?.ok_or_else(|| Failure::Usage("input has no \"H\"".into()))?;
    let degree = cfg.degree.min(h.degree());
    let cfg = RunConfig { degree, ..cfg.clone() };
    Ok(Suite { checks: solution_checks(&cfg, &p, &h, grid)?, artifact: None })
}

fn fiber_suite(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng, p: &InterpolationProblem) -> Step<Suite> {
    let n = cfg.degree;
    let z = random_constrained(p, cfg.dims.state, rng)?;
    let hss = solution_realization(p, &z)?;
    let h = hss.coeffs(n);
    let gamma = ColumnOperator::from_realization(hss)?;
    let c = central_c(p, &gamma, cfg.tol_contract)?;
    let fz = z_from_c(p, &gamma, &c, cfg.tol_contract, grid)?;
    let back = solution_realization(p, &fz)?.coeffs(n);
    let checks = vec![
        Check::at_most("fiber_roundtrip", h.max_coeff_distance(&back, n - 4), ROUNDTRIP_TOL),
        Check::at_most("w0_error", fz.w0_error(), W0_CHECK_TOL),
        Check::at_most("fiber_constraint", constraint_residual(p, &fz, grid)?, cfg.tol_contract),
        Check::at_most("fiber_sup_norm_excess", (fz.grid_sup_norm(grid)? - 1.0).max(0.0), cfg.tol_contract),
    ];
    let artifact = json!({
        "problem": to_value(p),
        "H": to_value(&h),
        "C": to_value(fz.parameter()),
        "Z_C": to_value(&fz.coeffs(n)),
        "unique": uniqueness_certificate(p),
    });
    Ok(Suite { checks, artifact: Some(artifact) })
}

fn rcl_suite(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng, ds: &RclDataSet) -> Step<Suite> {
    let n = cfg.degree;
    let mut checks = vec![Check::at_most("data_set_invalid", if validate_data_set(ds, 1e-10) { 0.0 } else { 1.0 }, 0.0)];
    let uc = underlying_contraction(ds, cfg.tol_contract)?;
    checks.push(Check::at_most("generator_residual", uc.generator_residual, cfg.tol_contract));
    let z = random_constrained(&uc.problem, cfg.dims.state, rng)?;
    let h = solve_from_z(&uc.problem, &z, n, grid)?;
    let gamma = column_operator(&h, n);
    let b = gamma_to_b(ds, &gamma, cfg.tol_contract)?;
    let rep = verify_rcl(ds, &b, n)?;
    checks.push(Check::at_most("rcl_projection", rep.projection_residual, cfg.tol_contract));
    checks.push(Check::at_most("rcl_intertwining", rep.intertwining_residual, cfg.tol_contract));
    checks.push(Check::at_most("rcl_norm_excess", (rep.norm - 1.0).max(0.0), cfg.tol_contract));

    // Unit-sized bump on the first coefficient breaks the intertwining.
    let mut bumped = gamma.clone();
    if bumped.nrows() > 0 && bumped.ncols() > 0 {
        bumped[(0, 0)] += 0.25;
        let bad = gamma_to_b(ds, &bumped.unscale(operator_norm(&bumped).max(1.0)), cfg.tol_contract)?;
        let bad_rep = verify_rcl(ds, &bad, n)?;
        checks.push(Check::above("perturbed_rejected", bad_rep.intertwining_residual, cfg.tol_contract));
    }

    let again = underlying_contraction(&data_set_from_omega(&uc.problem), cfg.tol_contract)?;
    let drift = operator_norm(&(again.ambient_omega() - embedded_omega(&uc.problem)));
    checks.push(Check::at_most("omega_roundtrip", drift, OMEGA_ROUNDTRIP_TOL));
    let artifact = json!({ "data_set": to_value(ds), "problem": to_value(&uc.problem), "report": to_value(&rep) });
    Ok(Suite { checks, artifact: Some(artifact) })
}

fn modelspace_suite(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng, theta: &InnerFn) -> Step<Suite> {
    let n = cfg.degree;
    let ms = model_space(theta, n)?;
    let dec = check_decompositions(theta, &ms)?;
    let mut checks = vec![
        Check::at_most("decomposition_residual", dec.max_residual(), cfg.tol_verify),
        Check::at_most("model_space_dim_mismatch", (dec.dim_h as f64 - theta.degree() as f64).abs(), 0.0),
    ];
    let (u, y) = (theta.dim(), cfg.dims.y);
    let z = random_isometric_schur(rng, y + u, u, cfg.dims.state)?;
    let hss = h_realization_theta(theta, &z, y)?;
    let h = hss.coeffs(n);
    let mult = mult_contraction_test(&h, &ms, 1e-7)?;
    let exact = exact_mult_norm(theta, &hss)?;
    checks.push(Check::at_most("mult_norm_excess", (mult.truncated_norm - 1.0).max(0.0), 1e-7));
    checks.push(Check::at_most("exact_mult_norm_excess", (exact - 1.0).max(0.0), 1e-7));
    let tz = z_from_h_theta(theta, &hss, cfg.tol_contract, grid)?;
    let back = h_realization_theta(theta, &tz, y)?.coeffs(n);
    let keep = n.saturating_sub(theta.degree() + 4);
    checks.push(Check::at_most("theta_roundtrip", h.max_coeff_distance(&back, keep), THETA_ROUNDTRIP_TOL));
    checks.push(Check::at_most("recovered_z_sup_norm_excess", (tz.grid_sup_norm(grid)? - 1.0).max(0.0), 1e-7));
    checks.push(Check::at_most(
        "delta_condition",
        tz.max_delta_condition,
        crate::modelspace::DELTA_MAX_CONDITION,
    ));
    let artifact = json!({
        "theta": to_value(theta),
        "required_degree": required_degree(theta),
        "decompositions": to_value(&dec),
        "H": to_value(&h),
        "mult_norm": mult.truncated_norm,
        "exact_mult_norm": exact,
    });
    Ok(Suite { checks, artifact: Some(artifact) })
}

fn prefixed(prefix: &str, suite: Suite) -> Vec<Check> {
    suite
        .checks
        .into_iter()
        .map(|c| Check { name: format!("{prefix}.{}", c.name), ..c })
        .collect()
}

/// Worst value per check name across trials: the largest residual, or the
/// smallest margin for rejection checks.
fn merge_max(into: &mut Vec<Check>, new: Vec<Check>) {
    for c in new {
        match into.iter_mut().find(|o| o.name == c.name) {
            Some(o) => {
                let rejection = c.name.ends_with("_rejected");
                if rejection && c.value < o.value || !rejection && c.value > o.value {
                    o.value = c.value;
                }
                o.pass &= c.pass;
            }
            None => into.push(c),
        }
    }
}

fn selftest(cfg: &RunConfig, grid: &Grid, rng: &mut InstanceRng) -> Step<Suite> {
    let d = cfg.dims;
    let mut all = Vec::new();

    let scalar = InterpolationProblem::full(
        crate::linalg::from_real_rows(&[&[0.6]]),
        crate::linalg::from_real_rows(&[&[0.8]]),
    )?;
    let h = solve_from_z(&scalar, &default_z(&scalar)?, cfg.degree, grid)?;
    let closed = (0..=cfg.degree)
        .map(|k| (h.coeff(k)[(0, 0)].re - 0.6 * 0.8f64.powi(k as i32)).abs() + h.coeff(k)[(0, 0)].im.abs())
        .fold(0.0, f64::max);
    all.push(Check::at_most("scalar.closed_form", closed, 1e-12));

    const TRIALS: usize = 4;
    for _ in 0..TRIALS {
        let p = random_problem(rng, d.u, d.y, d.f);
        let z = random_constrained(&p, d.state, rng)?;
        let h = solve_from_z(&p, &z, cfg.degree, grid)?;
        merge_max(&mut all, prefixed("solve", Suite { checks: solution_checks(cfg, &p, &h, grid)?, artifact: None }));
        let suite = fiber_suite(cfg, grid, rng, &p)?;
        merge_max(&mut all, prefixed("fiber", suite));
        let ds = random_data_set(rng, 2, 2, 1);
        merge_max(&mut all, prefixed("rcl", rcl_suite(cfg, grid, rng, &ds)?));
        let theta = random_bp(rng, 2, 2, 0.5);
        if cfg.degree >= required_degree(&theta) {
            merge_max(&mut all, prefixed("modelspace", modelspace_suite(cfg, grid, rng, &theta)?));
        }
    }
    Ok(Suite { checks: all, artifact: None })
}
