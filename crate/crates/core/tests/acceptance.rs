//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary prints in
//! order; exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;

use liftkit::hardy::{column_operator, Grid};
use liftkit::lifting::{
    central_c, random_isometric_problem, random_problem, solution_realization, solve_from_z, uniqueness_certificate,
    verify_solution, z_from_c, ColumnOperator, InterpolationProblem,
};
use liftkit::linalg::{from_real_rows, max_eigenvalue, operator_norm, CMatrix, C64};
use liftkit::modelspace::{
    check_decompositions, exact_mult_norm, h_from_z_theta, h_realization_theta, model_space, multiplier_matrix,
    mult_contraction_test, pointwise_mult_check, random_bp, theta_problem, z_from_h_theta, BpFactor, InnerFn,
    InnerSpec,
};
use liftkit::random::{self, InstanceRng};
use liftkit::rcl::{
    data_set_from_omega, embedded_omega, gamma_to_b, random_data_set, underlying_contraction, verify_rcl,
};
use liftkit::schur::{random_constrained, random_isometric_schur, SchurRealization};
use liftkit::PolyOpFn;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_dims(rng: &mut InstanceRng) -> (usize, usize, usize) {
    let u = rng.random_range(1..=3);
    let y = rng.random_range(1..=3);
    let f = rng.random_range(0..=u);
    (u, y, f)
}

fn ac1_scalar_closed_form() -> Outcome {
    let n = 24;
    let grid = Grid::default();
    let mut worst: f64 = 0.0;
    for (a, b) in [(0.6, 0.8), (0.3, -0.5), (0.0, 0.9), (0.5, 0.0), (-0.7, 0.2)] {
        let p = InterpolationProblem::full(from_real_rows(&[&[a]]), from_real_rows(&[&[b]])).map_err(e2s)?;
        let z = SchurRealization::constant(from_real_rows(&[&[a], &[b]])).map_err(e2s)?;
        let h = solve_from_z(&p, &z, n, &grid).map_err(e2s)?;
        let oracle = common::geometric(a, b, n);
        for (k, want) in oracle.iter().enumerate() {
            let got = h.coeff(k)[(0, 0)];
            worst = worst.max((got - C64::new(*want, 0.0)).norm());
        }
        let gamma = ColumnOperator::from_realization(solution_realization(&p, &z).map_err(e2s)?).map_err(e2s)?;
        let limit = a.abs() / (1.0 - b * b).sqrt();
        let col = gamma.norm();
        ensure((col - limit).abs() <= 1e-12, || format!("column norm {col} vs {limit} for a={a}, b={b}"))?;
    }
    ensure(worst <= 1e-12, || format!("coefficient residual {worst:.2e}"))?;
    let p = InterpolationProblem::full(from_real_rows(&[&[0.6]]), from_real_rows(&[&[0.8]])).map_err(e2s)?;
    ensure(uniqueness_certificate(&p), || "isometric scalar problem not certified unique".into())?;
    let z = SchurRealization::constant(from_real_rows(&[&[0.6], &[0.8]])).map_err(e2s)?;
    let h = solve_from_z(&p, &z, n, &grid).map_err(e2s)?;
    let partial = max_eigenvalue(&h.partial_gram(n));
    let oracle = 1.0 - 0.64f64.powi(n as i32 + 1);
    ensure((partial - oracle).abs() <= 1e-12, || format!("partial Gram {partial} vs {oracle}"))?;
    ensure(1.0 - partial <= 1e-3, || format!("partial Gram gap {}", 1.0 - partial))?;
    Ok(format!("coeff residual {worst:.1e}, partial Gram gap {:.2e}", 1.0 - partial))
}

fn ac2_soundness() -> Outcome {
    let n = 24;
    let grid = Grid::default();
    let mut rng = random::rng(20);
    let (mut rec, mut gram): (f64, f64) = (0.0, 0.0);
    for trial in 0..100 {
        let (u, y, f) = random_dims(&mut rng);
        let p = random_problem(&mut rng, u, y, f);
        let state = rng.random_range(0..=3);
        let z = random_constrained(&p, state, &mut rng).map_err(e2s)?;
        let h = solve_from_z(&p, &z, n, &grid).map_err(|e| format!("trial {trial}: {e}"))?;
        let rep = verify_solution(&p, &h, n, &grid).map_err(e2s)?;
        rec = rec.max(rep.recurrence_residual);
        gram = gram.max(rep.partial_gram_excess);
    }
    ensure(rec <= 1e-9 && gram <= 1e-8, || format!("recurrence {rec:.2e}, Gram excess {gram:.2e}"))?;
    Ok(format!("100 pairs, recurrence {rec:.1e}, Gram excess {gram:.1e}"))
}

fn ac3_fiber_roundtrip() -> Outcome {
    let n = 24;
    let grid = Grid::default();
    let mut rng = random::rng(30);
    let (mut rt, mut w0, mut cons): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for trial in 0..50 {
        let (u, y, f) = random_dims(&mut rng);
        let p = random_problem(&mut rng, u, y, f);
        let z = random_constrained(&p, rng.random_range(0..=2), &mut rng).map_err(e2s)?;
        let hss = solution_realization(&p, &z).map_err(e2s)?;
        let h = hss.coeffs(n);
        let gamma = ColumnOperator::from_realization(hss).map_err(e2s)?;
        let c = central_c(&p, &gamma, 1e-8).map_err(|e| format!("trial {trial}: {e}"))?;
        let fz = z_from_c(&p, &gamma, &c, 1e-8, &grid).map_err(|e| format!("trial {trial}: {e}"))?;
        let back = solve_from_z(&p, &fz, n, &grid).map_err(|e| format!("trial {trial}: {e}"))?;
        rt = rt.max(h.max_coeff_distance(&back, n - 4));
        w0 = w0.max(fz.w0_error());
        cons = cons.max(liftkit::lifting::constraint_residual(&p, &fz, &grid).map_err(e2s)?);
    }
    ensure(rt <= 1e-7 && w0 <= 1e-10 && cons <= 1e-8, || {
        format!("roundtrip {rt:.2e}, W(0) {w0:.2e}, constraint {cons:.2e}")
    })?;
    Ok(format!("50 instances, roundtrip {rt:.1e}, W(0) {w0:.1e}, constraint {cons:.1e}"))
}

fn ac4_rcl_equivalence() -> Outcome {
    let n = 20;
    let tol = 1e-8;
    let grid = Grid::default();
    let mut rng = random::rng(40);
    let (mut pos, mut neg) = (0, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let hp = rng.random_range(1..=2);
        let k = rng.random_range(1..=2);
        let h0 = rng.random_range(1..=k);
        let ds = random_data_set(&mut rng, hp, k, h0);
        let uc = underlying_contraction(&ds, tol).map_err(|e| format!("trial {trial}: {e}"))?;
        let p = &uc.problem;
        let z = random_constrained(p, 2, &mut rng).map_err(e2s)?;
        let h = solve_from_z(p, &z, n, &grid).map_err(e2s)?;

        let mut bump = PolyOpFn::zero(h.out_dim(), h.in_dim(), n).into_coeffs();
        bump[0] = random::with_norm(&mut rng, h.out_dim(), h.in_dim(), 0.1);
        bump[1] = random::with_norm(&mut rng, h.out_dim(), h.in_dim(), 0.1);
        let bumped = PolyOpFn::new(
            h.out_dim(),
            h.in_dim(),
            (0..=n).map(|i| h.coeff(i) + &bump[i]).collect(),
        )
        .map_err(e2s)?;

        for (candidate, is_solution) in [(&h, true), (&bumped, false)] {
            let rep = verify_solution(p, candidate, n, &grid).map_err(e2s)?;
            let solves = rep.recurrence_residual <= tol && rep.partial_gram_excess <= tol;
            let b = gamma_to_b(&ds, &column_operator(candidate, n), f64::INFINITY).map_err(e2s)?;
            let rcl = verify_rcl(&ds, &b, n).map_err(e2s)?;
            let lifts = rcl.passes(tol);
            ensure(solves == lifts, || format!("trial {trial}: equation {solves}, lifting {lifts}"))?;
            ensure(solves == is_solution, || format!("trial {trial}: expected solution={is_solution}"))?;
            if is_solution {
                worst = worst.max(rep.recurrence_residual).max(rcl.projection_residual).max(rcl.intertwining_residual);
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    Ok(format!("{pos} solutions lift, {neg} perturbed rejected, worst residual {worst:.1e}"))
}

fn ac5_omega_roundtrip() -> Outcome {
    let mut rng = random::rng(50);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let (u, y, f) = random_dims(&mut rng);
        let p = random_problem(&mut rng, u, y, f);
        let uc = underlying_contraction(&data_set_from_omega(&p), 1e-9).map_err(|e| format!("trial {trial}: {e}"))?;
        worst = worst.max(operator_norm(&(uc.ambient_omega() - embedded_omega(&p))));
    }
    ensure(worst <= 1e-10, || format!("drift {worst:.2e}"))?;
    Ok(format!("100 ω, drift {worst:.1e}"))
}

fn ac6_uniqueness() -> Outcome {
    let n = 24;
    let grid = Grid::default();
    let mut rng = random::rng(60);
    let mut same: f64 = 0.0;
    for _ in 0..5 {
        let (u, y) = (rng.random_range(1..=3), rng.random_range(1..=2));
        let p = random_isometric_problem(&mut rng, u, y);
        ensure(uniqueness_certificate(&p), || "isometric onto problem not certified".into())?;
        let h0 = solve_from_z(&p, &random_constrained(&p, 2, &mut rng).map_err(e2s)?, n, &grid).map_err(e2s)?;
        for _ in 1..20 {
            let z = random_constrained(&p, 2, &mut rng).map_err(e2s)?;
            let h = solve_from_z(&p, &z, n, &grid).map_err(e2s)?;
            same = same.max(h.max_coeff_distance(&h0, n));
        }
    }
    ensure(same <= 1e-8, || format!("certified instance spread {same:.2e}"))?;
    let mut min_spread = f64::INFINITY;
    for _ in 0..5 {
        let u = rng.random_range(2..=3);
        let y = rng.random_range(1..=2);
        let p = random_problem(&mut rng, u, y, u - 1);
        ensure(!uniqueness_certificate(&p), || "proper subspace certified".into())?;
        let hs = (0..20)
            .map(|s| {
                let mut r = random::rng(1000 + s);
                let z = random_constrained(&p, 2, &mut r)?;
                solve_from_z(&p, &z, n, &grid)
            })
            .collect::<liftkit::Result<Vec<_>>>()
            .map_err(e2s)?;
        let mut spread: f64 = 0.0;
        for i in 0..hs.len() {
            for j in i + 1..hs.len() {
                spread = spread.max(hs[i].max_coeff_distance(&hs[j], n));
            }
        }
        min_spread = min_spread.min(spread);
    }
    ensure(min_spread > 1e-4, || format!("uncertified instance spread only {min_spread:.2e}"))?;
    Ok(format!("certified spread {same:.1e}, uncertified spread >= {min_spread:.2e}"))
}

fn theta_family(rng: &mut InstanceRng, i: usize) -> InnerFn {
    let d = 1 + i % 2;
    match i % 3 {
        0 => InnerFn::shift(d),
        1 => InnerFn::power(2, d).expect("power inner"),
        _ => random_bp(rng, d, 1, 0.5),
    }
}

fn ac7_forward() -> Outcome {
    let n = 32;
    let mut rng = random::rng(70);
    let (mut excess, mut cross, mut oracle_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..50 {
        let theta = theta_family(&mut rng, i);
        let (u, y) = (theta.dim(), rng.random_range(1..=2));
        let state = rng.random_range(1..=2);
        let z = random_isometric_schur(&mut rng, y + u, u, state).map_err(e2s)?;
        let ms = model_space(&theta, n).map_err(e2s)?;
        let h = h_from_z_theta(&theta, &z, y, n).map_err(e2s)?;
        let mult = mult_contraction_test(&h, &ms, 1e-7).map_err(e2s)?;
        let exact = exact_mult_norm(&theta, &h_realization_theta(&theta, &z, y).map_err(e2s)?).map_err(e2s)?;
        ensure(mult.passed, || format!("trial {i}: truncated norm {}", mult.truncated_norm))?;
        excess = excess.max(mult.truncated_norm - 1.0).max(exact - 1.0);
        if i % 3 == 0 {
            let p = theta_problem(&theta, y).map_err(e2s)?;
            let direct = solve_from_z(&p, &z, n, &Grid::default()).map_err(e2s)?;
            cross = cross.max(h.max_coeff_distance(&direct, n));
        }
        if i % 3 == 1 {
            let oracle = common::poly_mult_norm(h.coeffs(), 2, n);
            oracle_gap = oracle_gap.max((oracle - mult.truncated_norm).abs());
        }
    }
    // Z ≡ [c; s]: ‖M_H‖² = c²/(1 - s²) on constants
    let (c, s) = (0.6, 0.5);
    let z = SchurRealization::constant(from_real_rows(&[&[c], &[s]])).map_err(e2s)?;
    let theta = InnerFn::shift(1);
    let exact = exact_mult_norm(&theta, &h_realization_theta(&theta, &z, 1).map_err(e2s)?).map_err(e2s)?;
    let closed = (c * c / (1.0 - s * s)).sqrt();
    ensure((exact - closed).abs() <= 1e-12, || format!("closed form {exact} vs {closed}"))?;
    ensure(excess <= 1e-7, || format!("norm excess {excess:.2e}"))?;
    ensure(cross <= 1e-10, || format!("Θ=λ cross-check {cross:.2e}"))?;
    ensure(oracle_gap <= 1e-10, || format!("Θ=λ² Toeplitz oracle gap {oracle_gap:.2e}"))?;
    Ok(format!("50 Z, norm excess {:.1e}, Θ=λ cross-check {cross:.1e}", excess.max(0.0)))
}

fn ac8_reverse() -> Outcome {
    let n = 32;
    let grid = Grid::default();
    let mut rng = random::rng(80);
    let (mut worst, mut cond, mut sup): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..25 {
        let theta = match i % 4 {
            0 => InnerFn::shift(1),
            1 => InnerFn::power(2, 1).map_err(e2s)?,
            2 => random_bp(&mut rng, 2, 1, 0.5),
            _ => random_bp(&mut rng, 1, 2, 0.5),
        };
        let (u, y) = (theta.dim(), rng.random_range(1..=2));
        let state = rng.random_range(1..=2);
        let z = random_isometric_schur(&mut rng, y + u, u, state).map_err(e2s)?;
        let h = h_realization_theta(&theta, &z, y).map_err(e2s)?;
        let tz = z_from_h_theta(&theta, &h, 1e-8, &grid).map_err(|e| format!("trial {i}: {e}"))?;
        let back = h_from_z_theta(&theta, &tz, y, n).map_err(|e| format!("trial {i}: {e}"))?;
        let keep = n - theta.degree() - 4;
        worst = worst.max(h.coeffs(n).max_coeff_distance(&back, keep));
        cond = cond.max(tz.max_delta_condition);
        sup = sup.max(tz.grid_sup_norm(&grid).map_err(e2s)?);
    }
    ensure(worst <= 1e-6, || format!("roundtrip {worst:.2e}"))?;
    ensure(cond <= 1e10, || format!("Δ condition {cond:.2e}"))?;
    ensure(sup <= 1.0 + 1e-7, || format!("recovered Z sup norm {sup}"))?;
    Ok(format!("25 roundtrips, residual {worst:.1e}, max cond Δ {cond:.1e}"))
}

fn ac9_model_space_identities() -> Outcome {
    let n = 32;
    let mut rng = random::rng(90);
    let mut thetas = vec![InnerFn::shift(2), InnerFn::power(2, 1).map_err(e2s)?, InnerFn::power(3, 2).map_err(e2s)?];
    let v = from_real_rows(&[&[0.6], &[0.8]]);
    thetas.push(InnerFn::bp_product(2, vec![BpFactor { a: C64::new(0.5, 0.0), v }]).map_err(e2s)?);
    for _ in 0..4 {
        thetas.push(random_bp(&mut rng, 2, 2, 0.5));
    }
    let mut dec: f64 = 0.0;
    for theta in &thetas {
        let ms = model_space(theta, n).map_err(e2s)?;
        dec = dec.max(check_decompositions(theta, &ms).map_err(e2s)?.max_residual());
        if let InnerSpec::BpProduct { dim, factors } = theta.spec() {
            let list: Vec<(C64, CMatrix)> = factors.iter().map(|f| (f.a, f.v.clone())).collect();
            let oracle = common::bp_theta_coeffs(*dim, &list, n);
            let gap = common::max_diff(&oracle, theta.coeffs(n).coeffs(), n);
            ensure(gap <= 1e-12, || format!("Θ coefficients differ from oracle by {gap:.2e}"))?;
            let brute = common::kernel_dimension(&oracle, n, 1e-3);
            ensure(brute == ms.dim(), || format!("dim H {} vs brute force {brute}", ms.dim()))?;
        }
    }
    ensure(dec <= 1e-9, || format!("decomposition residual {dec:.2e}"))?;

    let nontrivial: Vec<&InnerFn> = thetas.iter().filter(|t| t.kernel_of_c().dim() > 0).collect();
    let (mut pos, mut neg) = (0, 0);
    for i in 0..50 {
        let theta = nontrivial[i % nontrivial.len()];
        let ms = model_space(theta, n).map_err(e2s)?;
        let y = rng.random_range(1..=2);
        let deg = rng.random_range(0..=3);
        let h = PolyOpFn::new(y, theta.dim(), (0..=deg).map(|_| random::gaussian(&mut rng, y, theta.dim())).collect()).map_err(e2s)?;
        let gamma = multiplier_matrix(&h, &ms);
        let rep = pointwise_mult_check(&gamma, theta, &ms, 1e-9).map_err(e2s)?;
        ensure(rep.intertwines && rep.multiplies, || format!("positive {i} rejected: {rep:?}"))?;
        pos += 1;

        let c = theta.kernel_of_c().basis().column(0).into_owned();
        let yv = random::gaussian(&mut rng, gamma.nrows(), 1);
        let bad = &gamma + yv.unscale(yv.norm()) * c.adjoint();
        let rep = pointwise_mult_check(&bad, theta, &ms, 1e-9).map_err(e2s)?;
        ensure(!rep.intertwines && !rep.multiplies, || format!("negative {i}: {rep:?}"))?;
        neg += 1;
    }
    Ok(format!("decomposition residual {dec:.1e}, {pos} positives and {neg} negatives consistent"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("scalar closed form", ac1_scalar_closed_form),
        ("solution soundness", ac2_soundness),
        ("fiber roundtrip", ac3_fiber_roundtrip),
        ("lifting equivalence", ac4_rcl_equivalence),
        ("underlying contraction roundtrip", ac5_omega_roundtrip),
        ("uniqueness", ac6_uniqueness),
        ("model-space forward", ac7_forward),
        ("model-space reverse", ac8_reverse),
        ("model-space identities", ac9_model_space_identities),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("AC {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("AC {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
