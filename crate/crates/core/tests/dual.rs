//! Dual-construction tests against hand-solved instances and
//! cross-checks between the generic Gram dual and its specializations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sosdual_core::dual::{
    build_dual, build_fractional_dual, build_linear_fractional_dual, build_quadratic_dual,
    MinimaxProblem, RationalMinimaxProblem, RobustMode, RobustProblem,
};
use sosdual_core::{Polynomial, SolveStatus, SolverConfig, SosOptions};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn x(dim: usize, i: usize) -> Polynomial {
    Polynomial::var(dim, i)
}

/// min over x ≥ -2 of max{2x^4 - x, 5x^2 + x}. Hand analysis: the optimum
/// is 0 at x = 0, with dual multipliers δ = (1/2, 1/2), λ = 0, μ = 0 and
/// the identity x^4 + (5/2) x^2 as the sum-of-squares witness.
#[test]
fn quartic_pair_minimax() {
    let t = x(1, 0);
    let p1 = t.mul(&t).mul(&t).mul(&t).scale(2.0).sub(&t);
    let p2 = t.mul(&t).scale(5.0).add(&t);
    let g1 = t.scale(-1.0).add_constant(-2.0); // -x - 2 ≤ 0  ⟺  x ≥ -2
    let prob = MinimaxProblem::new(1, vec![p1, p2], vec![g1]).unwrap();
    let dual = build_dual(&prob).unwrap();
    let sol = dual.solve(&cfg()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.solver_report.message);
    let v = sol.value.unwrap();
    assert!(v.abs() < 1e-6, "dual value {v}, expected 0");
    assert!(sol.attained);
    let cert = sol.certificate.unwrap();
    assert!((cert.delta[0] - 0.5).abs() < 1e-4, "delta {:?}", cert.delta);
    assert!((cert.delta[1] - 0.5).abs() < 1e-4);
    assert!(cert.lambda[0].abs() < 1e-5);
    assert!(cert.identity_residual < 1e-6);
    assert!(cert.gram_min_eigenvalue > -1e-7);
}

/// min over x ≥ 0 of (x^2 + 1)/(x + 2). The dual reduces to
/// 1 - 2μ ≥ (λ + μ)^2 / 4 with λ = 0 optimal, giving μ* = 2√5 - 4,
/// matching the primal minimum at x = √5 - 2.
#[test]
fn fractional_quadratic_over_affine() {
    let t = x(1, 0);
    let num = t.mul(&t).add_constant(1.0);
    let den = t.add_constant(2.0);
    let g = t.scale(-1.0); // -x ≤ 0
    let base = MinimaxProblem::new(1, vec![num.clone()], vec![g]).unwrap();
    let prob = RationalMinimaxProblem::new(base, den.clone()).unwrap();
    let dual = build_fractional_dual(&prob, &SosOptions::default()).unwrap();
    let sol = dual.solve(&cfg()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.solver_report.message);
    let v = sol.value.unwrap();
    let expected = 2.0 * 5.0f64.sqrt() - 4.0;
    assert!(
        (v - expected).abs() < 1e-6,
        "dual value {v}, expected {expected}"
    );
    // Primal cross-check at the analytic minimizer x* = √5 - 2.
    let xs = 5.0f64.sqrt() - 2.0;
    let ratio = num.eval(&[xs]).unwrap() / den.eval(&[xs]).unwrap();
    assert!((ratio - expected).abs() < 1e-12);
    let cert = sol.certificate.unwrap();
    assert!(cert.identity_residual < 1e-6);
}

/// min over x ≥ 1 of 1/x: the infimum 0 is not attained by the primal,
/// yet the dual attains μ* = 0 with explicit multipliers.
#[test]
fn unattained_infimum_dual_attains() {
    let t = x(1, 0);
    let num = Polynomial::constant(1, 1.0);
    let den = t.clone();
    let g = t.scale(-1.0).add_constant(1.0); // 1 - x ≤ 0  ⟺  x ≥ 1
    let base = MinimaxProblem::new(1, vec![num], vec![g]).unwrap();
    let prob = RationalMinimaxProblem::new(base, den).unwrap();
    let dual = build_fractional_dual(&prob, &SosOptions::default()).unwrap();
    let sol = dual.solve(&cfg()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.solver_report.message);
    let v = sol.value.unwrap();
    assert!(v.abs() < 1e-6, "dual value {v}, expected 0");
    assert!(sol.attained);
    let cert = sol.certificate.unwrap();
    assert!(cert.identity_residual < 1e-6);
    assert!(cert.gram_min_eigenvalue > -1e-7);
}

/// A concave (non-affine) denominator passes the precondition check; a
/// convex non-affine one is rejected.
#[test]
fn fractional_precondition() {
    let t = x(1, 0);
    let base = || {
        MinimaxProblem::new(1, vec![Polynomial::constant(1, 1.0)], vec![t.scale(-1.0)]).unwrap()
    };
    // q = 3 - x^2 is concave.
    let concave = t.mul(&t).scale(-1.0).add_constant(3.0);
    let prob = RationalMinimaxProblem::new(base(), concave).unwrap();
    assert!(build_fractional_dual(&prob, &SosOptions::default()).is_ok());
    // q = 1 + x^2 is convex, not concave: rejected.
    let convex = t.mul(&t).add_constant(1.0);
    let prob = RationalMinimaxProblem::new(base(), convex).unwrap();
    assert!(matches!(
        build_fractional_dual(&prob, &SosOptions::default()),
        Err(sosdual_core::DualError::Precondition(_))
    ));
}

/// Unconstrained min of max{x} is unbounded below; the dual SDP is
/// infeasible and the solver certifies it.
#[test]
fn unbounded_primal_infeasible_dual() {
    let t = x(1, 0);
    let prob = MinimaxProblem::new(1, vec![t], vec![]).unwrap();
    let dual = build_dual(&prob).unwrap();
    let sol = dual.solve(&cfg()).unwrap();
    assert_eq!(
        sol.status,
        SolveStatus::PrimalInfeasible,
        "{}",
        sol.solver_report.message
    );
    assert!(!sol.attained);
}

/// Generic Gram dual and the quadratic LMI dual agree on random convex
/// quadratic minimax instances.
#[test]
fn quadratic_specialization_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for trial in 0..12 {
        let n = 1 + trial % 3;
        let prob = random_convex_quadratic_minimax(&mut rng, n, 2, 2);
        let generic = build_dual(&prob).unwrap().solve(&cfg()).unwrap();
        let special = build_quadratic_dual(&prob).unwrap().solve(&cfg()).unwrap();
        assert_eq!(generic.status, SolveStatus::Optimal, "trial {trial}");
        assert_eq!(special.status, SolveStatus::Optimal, "trial {trial}");
        let (a, b) = (generic.value.unwrap(), special.value.unwrap());
        assert!(
            (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
            "trial {trial}: generic {a} vs LMI {b}"
        );
    }
}

/// Generic fractional dual and the LP dual agree on random
/// linear-fractional instances, and both match the hand value on
/// (x + 1)/(x + 2) over [0, 1].
#[test]
fn linear_fractional_specialization_agrees() {
    let t = x(1, 0);
    let base = MinimaxProblem::new(
        1,
        vec![t.add_constant(1.0)],
        vec![t.scale(-1.0), t.add_constant(-1.0)],
    )
    .unwrap();
    let prob = RationalMinimaxProblem::new(base, t.add_constant(2.0)).unwrap();
    let lp = build_linear_fractional_dual(&prob).unwrap().solve(&cfg()).unwrap();
    let generic = build_fractional_dual(&prob, &SosOptions::default())
        .unwrap()
        .solve(&cfg())
        .unwrap();
    assert_eq!(lp.status, SolveStatus::Optimal);
    assert_eq!(generic.status, SolveStatus::Optimal);
    let (a, b) = (lp.value.unwrap(), generic.value.unwrap());
    // (x+1)/(x+2) is increasing, so the minimum over [0,1] is 1/2 at x=0.
    assert!((a - 0.5).abs() < 1e-6, "LP dual value {a}");
    assert!((a - b).abs() < 1e-6, "LP {a} vs generic {b}");

    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for trial in 0..10 {
        let n = 1 + trial % 3;
        let prob = random_linear_fractional(&mut rng, n);
        let lp = build_linear_fractional_dual(&prob).unwrap().solve(&cfg()).unwrap();
        let generic = build_fractional_dual(&prob, &SosOptions::default())
            .unwrap()
            .solve(&cfg())
            .unwrap();
        assert_eq!(lp.status, SolveStatus::Optimal, "trial {trial}");
        assert_eq!(generic.status, SolveStatus::Optimal, "trial {trial}");
        let (a, b) = (lp.value.unwrap(), generic.value.unwrap());
        assert!(
            (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
            "trial {trial}: LP {a} vs generic {b}"
        );
    }
}

/// The robust counterpart is order-insensitive in value and identical to
/// solving the concatenated minimax directly.
#[test]
fn robust_counterpart_matches_minimax() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let n = 2;
    let scenarios: Vec<Polynomial> = (0..3)
        .map(|_| random_convex_quadratic(&mut rng, n))
        .collect();
    let box_constraints = vec![
        x(n, 0).add_constant(-3.0),
        x(n, 0).scale(-1.0).add_constant(-3.0),
        x(n, 1).add_constant(-3.0),
        x(n, 1).scale(-1.0).add_constant(-3.0),
    ];
    let robust = RobustProblem {
        dim: n,
        mode: RobustMode::FiniteScenarios,
        objective_scenarios: scenarios.clone(),
        constraint_scenarios: vec![box_constraints.clone()],
    };
    let counterpart = robust.counterpart().unwrap();
    assert_eq!(counterpart.objectives.len(), 3);
    assert_eq!(counterpart.constraints.len(), 4);
    let direct = MinimaxProblem::new(n, scenarios.clone(), box_constraints.clone()).unwrap();
    let v1 = build_dual(&counterpart).unwrap().solve(&cfg()).unwrap();
    let v2 = build_dual(&direct).unwrap().solve(&cfg()).unwrap();
    assert_eq!(v1.status, SolveStatus::Optimal);
    // Same program, same construction order: values agree bitwise.
    assert_eq!(v1.value.unwrap().to_bits(), v2.value.unwrap().to_bits());

    // Permuting scenarios leaves the optimal value unchanged (tightened
    // tolerances keep the two solves comparable).
    let mut permuted = scenarios.clone();
    permuted.rotate_left(1);
    let perm_prob = MinimaxProblem::new(n, permuted, box_constraints).unwrap();
    let mut tight = cfg();
    tight.feas_tol = 1e-10;
    tight.gap_tol = 1e-10;
    let a = build_dual(&direct).unwrap().solve(&tight).unwrap();
    let b = build_dual(&perm_prob).unwrap().solve(&tight).unwrap();
    let (av, bv) = (a.value.unwrap(), b.value.unwrap());
    assert!(
        (av - bv).abs() <= 1e-8 * (1.0 + av.abs()),
        "permuted value {bv} vs {av}"
    );
}

/// Translating all data by a shift leaves the dual optimal value
/// unchanged (the minimax optimum is translation covariant).
#[test]
fn shift_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let n = 2;
    let p1 = random_convex_quadratic(&mut rng, n);
    let p2 = random_convex_quadratic(&mut rng, n);
    let g = vec![
        x(n, 0).mul(&x(n, 0)).add(&x(n, 1).mul(&x(n, 1))).add_constant(-4.0),
    ];
    let prob = MinimaxProblem::new(n, vec![p1.clone(), p2.clone()], g.clone()).unwrap();

    let shift = [0.3, -0.7];
    let shifted = |p: &Polynomial| translate(p, &shift);
    let prob_shifted = MinimaxProblem::new(
        n,
        vec![shifted(&p1), shifted(&p2)],
        g.iter().map(shifted).collect(),
    )
    .unwrap();

    let mut tight = cfg();
    tight.feas_tol = 1e-10;
    tight.gap_tol = 1e-10;
    let a = build_dual(&prob).unwrap().solve(&tight).unwrap();
    let b = build_dual(&prob_shifted).unwrap().solve(&tight).unwrap();
    assert_eq!(a.status, SolveStatus::Optimal);
    assert_eq!(b.status, SolveStatus::Optimal);
    let (av, bv) = (a.value.unwrap(), b.value.unwrap());
    assert!(
        (av - bv).abs() <= 1e-7 * (1.0 + av.abs()),
        "shifted value {bv} vs {av}"
    );
}

/// Certificates reconstruct the multiplier identity independently.
#[test]
fn certificate_identity_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(90210);
    for trial in 0..8 {
        let n = 1 + trial % 2;
        let prob = random_convex_quadratic_minimax(&mut rng, n, 2, 1);
        let dual = build_dual(&prob).unwrap();
        let sol = dual.solve(&cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let cert = sol.certificate.unwrap();
        assert!(
            cert.identity_residual < 1e-6,
            "trial {trial}: residual {}",
            cert.identity_residual
        );
        assert!(cert.gram_min_eigenvalue > -1e-6, "trial {trial}");
        assert!(cert.delta.iter().all(|&d| d >= -1e-9), "trial {trial}");
        assert!(cert.lambda.iter().all(|&l| l >= -1e-9), "trial {trial}");
        let sum: f64 = cert.delta.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6, "trial {trial}: simplex sum {sum}");
    }
}

// ---------- helpers ----------

fn random_convex_quadratic(rng: &mut ChaCha8Rng, n: usize) -> Polynomial {
    let l: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut f = Polynomial::zero(n);
    for i in 0..n {
        for j in 0..n {
            let mij: f64 = (0..n).map(|k| l[i][k] * l[j][k]).sum::<f64>()
                + if i == j { 0.1 } else { 0.0 };
            f = f.add(&x(n, i).mul(&x(n, j)).scale(mij));
        }
    }
    for i in 0..n {
        f = f.add(&x(n, i).scale(rng.random_range(-1.0..1.0)));
    }
    f.add_constant(rng.random_range(-1.0..1.0))
}

fn random_convex_quadratic_minimax(
    rng: &mut ChaCha8Rng,
    n: usize,
    r: usize,
    m: usize,
) -> MinimaxProblem {
    let objectives: Vec<Polynomial> =
        (0..r).map(|_| random_convex_quadratic(rng, n)).collect();
    // Constraints with a guaranteed interior point at the origin:
    // convex quadratic minus a positive margin at 0.
    let constraints: Vec<Polynomial> = (0..m)
        .map(|_| {
            let g = random_convex_quadratic(rng, n);
            let at0 = g.eval(&vec![0.0; n]).unwrap();
            g.add_constant(-at0 - rng.random_range(0.5..1.5))
        })
        .collect();
    MinimaxProblem::new(n, objectives, constraints).unwrap()
}

fn random_linear_fractional(rng: &mut ChaCha8Rng, n: usize) -> RationalMinimaxProblem {
    let mut affine = |scale: f64| {
        let mut f = Polynomial::constant(n, rng.random_range(-scale..scale));
        for i in 0..n {
            f = f.add(&x(n, i).scale(rng.random_range(-scale..scale)));
        }
        f
    };
    let objectives: Vec<Polynomial> = (0..2).map(|_| affine(1.0)).collect();
    // Box [-1, 1]^n keeps the feasible set compact.
    let mut constraints = Vec::new();
    for i in 0..n {
        constraints.push(x(n, i).add_constant(-1.0));
        constraints.push(x(n, i).scale(-1.0).add_constant(-1.0));
    }
    // Denominator positive on the box: β ≥ 1 + Σ|b_u| with radius 1.
    let mut den = Polynomial::zero(n);
    let mut absum = 0.0;
    for i in 0..n {
        let b: f64 = rng.random_range(-0.5..0.5);
        absum += b.abs();
        den = den.add(&x(n, i).scale(b));
    }
    let den = den.add_constant(1.0 + absum + rng.random_range(0.0..1.0));
    let base = MinimaxProblem::new(n, objectives, constraints).unwrap();
    RationalMinimaxProblem::new(base, den).unwrap()
}

/// `p(x + shift)` expanded via repeated single-variable substitution.
fn translate(p: &Polynomial, shift: &[f64]) -> Polynomial {
    let n = p.dim();
    let mut out = Polynomial::zero(n);
    for (alpha, coeff) in p.terms() {
        // Expand prod_i (x_i + s_i)^{a_i}.
        let mut expanded = Polynomial::constant(n, coeff);
        for (i, &a) in alpha.exponents().iter().enumerate() {
            let base = x(n, i).add_constant(shift[i]);
            for _ in 0..a {
                expanded = expanded.mul(&base);
            }
        }
        out = out.add(&expanded);
    }
    out
}
