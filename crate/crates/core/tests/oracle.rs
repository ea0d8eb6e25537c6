//! Oracle tests: the tableau simplex against brute-force vertex
//! enumeration, and the cutting-plane / Dinkelbach pipeline against
//! hand-solved problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sosdual_core::dual::{MinimaxProblem, RationalMinimaxProblem};
use sosdual_core::oracle::{
    find_slater_point, solve_fractional_primal, solve_lp_inequalities, solve_primal, LpOutcome,
    OracleOptions, PrimalReport,
};
use sosdual_core::Polynomial;

fn x(dim: usize, i: usize) -> Polynomial {
    Polynomial::var(dim, i)
}

fn opts() -> OracleOptions {
    OracleOptions::default()
}

/// Brute-force reference for 2-variable inequality LPs: enumerate all
/// row-pair intersections, keep the feasible ones, take the best.
fn brute_force_2d(c: &[f64; 2], rows: &[Vec<f64>], rhs: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let (a1, b1) = (&rows[i], rhs[i]);
            let (a2, b2) = (&rows[j], rhs[j]);
            let det = a1[0] * a2[1] - a1[1] * a2[0];
            if det.abs() < 1e-9 {
                continue;
            }
            let px = (b1 * a2[1] - a1[1] * b2) / det;
            let py = (a1[0] * b2 - b1 * a2[0]) / det;
            let feasible = rows
                .iter()
                .zip(rhs)
                .all(|(r, h)| r[0] * px + r[1] * py <= h + 1e-7);
            if feasible {
                let v = c[0] * px + c[1] * py;
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7_2026_0823);
    for trial in 0..40 {
        // Box keeps every instance bounded; extra random halfspaces.
        let mut rows = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let mut rhs = vec![5.0, 5.0, 5.0, 5.0];
        for _ in 0..4 {
            let a = [
                rng.random_range(-1.0f64..1.0),
                rng.random_range(-1.0f64..1.0),
            ];
            if a[0].abs() + a[1].abs() < 0.1 {
                continue;
            }
            rows.push(a.to_vec());
            // Keep the origin feasible so the instance stays nonempty.
            rhs.push(rng.random_range(0.1..3.0));
        }
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let reference = brute_force_2d(&c, &rows, &rhs).expect("box-bounded LP has vertices");
        match solve_lp_inequalities(&c, &rows, &rhs).unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert!(
                    (value - reference).abs() <= 1e-6 * (1.0 + reference.abs()),
                    "trial {trial}: simplex {value} vs brute force {reference}"
                );
                for (r, h) in rows.iter().zip(&rhs) {
                    let lhs: f64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();
                    assert!(lhs <= h + 1e-7, "trial {trial}: row violated");
                }
            }
            other => panic!("trial {trial}: unexpected outcome {other:?}"),
        }
    }
}

#[test]
fn simplex_detects_unbounded() {
    // minimize -x0 with only x0 ≥ 0: unbounded below.
    let out = solve_lp_inequalities(&[-1.0], &[vec![-1.0]], &[0.0]).unwrap();
    assert!(matches!(out, LpOutcome::Unbounded));
}

#[test]
fn simplex_detects_infeasible() {
    // x ≤ -1 and x ≥ 1 simultaneously.
    let out = solve_lp_inequalities(&[1.0], &[vec![1.0], vec![-1.0]], &[-1.0, -1.0]).unwrap();
    assert!(matches!(out, LpOutcome::Infeasible));
}

#[test]
fn simplex_handles_degeneracy() {
    // Many redundant rows through the optimum at the origin; Bland's rule
    // must terminate and the duplicated constraints must not confuse it.
    let rows = vec![
        vec![-1.0, 0.0],
        vec![0.0, -1.0],
        vec![-1.0, -1.0],
        vec![-2.0, -1.0],
        vec![-1.0, -2.0],
        vec![1.0, 1.0],
    ];
    let rhs = vec![0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
    match solve_lp_inequalities(&[1.0, 1.0], &rows, &rhs).unwrap() {
        LpOutcome::Optimal { value, .. } => assert!(value.abs() <= 1e-9, "value {value}"),
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn unconstrained_quadratic_minimum() {
    // min (x-3)^2 + (y+1)^2 = 0 at (3, -1); Newton polish should land
    // essentially exactly.
    let (u, v) = (x(2, 0), x(2, 1));
    let p = u
        .add_constant(-3.0)
        .square()
        .add(&v.add_constant(1.0).square());
    let prob = MinimaxProblem::new(2, vec![p], vec![]).unwrap();
    let r = match solve_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!(r.converged);
    assert!(!r.boundary_flag);
    assert!(r.value.abs() < 1e-9, "value {}", r.value);
    assert!((r.minimizer[0] - 3.0).abs() < 1e-5, "{:?}", r.minimizer);
    assert!((r.minimizer[1] + 1.0).abs() < 1e-5);
    assert!(r.lower_bound <= r.value + 1e-9);
    assert_eq!(r.active_set, vec![0]);
}

#[test]
fn quartic_pair_hand_value() {
    // min over x ≥ -2 of max{2x^4 - x, 5x^2 + x}: optimum 0 at x = 0 with
    // both pieces active.
    let t = x(1, 0);
    let p1 = t.square().square().scale(2.0).sub(&t);
    let p2 = t.square().scale(5.0).add(&t);
    let g1 = t.scale(-1.0).add_constant(-2.0);
    let prob = MinimaxProblem::new(1, vec![p1, p2], vec![g1]).unwrap();
    let r = match solve_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!(r.converged);
    assert!(r.value.abs() < 1e-6, "value {}", r.value);
    assert!(r.minimizer[0].abs() < 1e-3, "minimizer {:?}", r.minimizer);
    assert_eq!(r.active_set, vec![0, 1]);
    assert!(!r.boundary_flag);
    assert!(r.lower_bound <= 1e-9 && r.lower_bound >= -1e-4);
    assert_eq!(r.feasibility_residual, 0.0);
}

#[test]
fn constrained_quadratic_hand_value() {
    // min x^2 + y^2 s.t. x + y ≥ 2: optimum 2 at (1, 1).
    let (u, v) = (x(2, 0), x(2, 1));
    let p = u.square().add(&v.square());
    let g = u.add(&v).scale(-1.0).add_constant(2.0); // 2 - x - y ≤ 0
    let prob = MinimaxProblem::new(2, vec![p], vec![g]).unwrap();
    let r = match solve_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!(r.converged);
    assert!((r.value - 2.0).abs() < 1e-5, "value {}", r.value);
    assert!((r.minimizer[0] - 1.0).abs() < 1e-2, "{:?}", r.minimizer);
    assert!((r.minimizer[1] - 1.0).abs() < 1e-2);
    assert!(r.feasibility_residual <= 1e-8);
    assert!(r.lower_bound <= r.value + 1e-9 && r.lower_bound >= 2.0 - 1e-4);
}

#[test]
fn infeasible_problem_reported() {
    // x^2 + 1 ≤ 0 is impossible; the minimum violation over any box is 1.
    let t = x(1, 0);
    let g = t.square().add_constant(1.0);
    let prob = MinimaxProblem::new(1, vec![t.clone()], vec![g]).unwrap();
    match solve_primal(&prob, &opts()).unwrap() {
        PrimalReport::Infeasible(rep) => {
            assert!(
                (rep.min_violation - 1.0).abs() < 1e-4,
                "violation {}",
                rep.min_violation
            );
            assert!(rep.witness[0].abs() < 1e-2);
        }
        PrimalReport::Solved(r) => panic!("expected infeasibility, got {r:?}"),
    }
}

#[test]
fn unbounded_below_hits_expanded_boundary() {
    // min x over the whole line: every box puts the minimizer on the
    // boundary, so after all expansions the flag must remain set.
    let t = x(1, 0);
    let prob = MinimaxProblem::new(1, vec![t], vec![]).unwrap();
    let r = match solve_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!(r.boundary_flag);
    // Default half-width 10 expanded three times by ×4 reaches 640.
    assert!(r.value <= -600.0, "value {}", r.value);
}

#[test]
fn fractional_hand_value_interior() {
    // min over x ≥ 0 of (x^2 + 1)/(x + 2) = 2√5 - 4 at x = √5 - 2.
    let t = x(1, 0);
    let num = t.square().add_constant(1.0);
    let den = t.add_constant(2.0);
    let g = t.scale(-1.0);
    let base = MinimaxProblem::new(1, vec![num], vec![g]).unwrap();
    let prob = RationalMinimaxProblem::new(base, den).unwrap();
    let r = match solve_fractional_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    let expected = 2.0 * 5.0f64.sqrt() - 4.0;
    assert!(r.converged);
    assert!(!r.boundary_flag);
    assert!(
        (r.value - expected).abs() < 1e-5,
        "value {} vs {expected}",
        r.value
    );
    assert!(
        (r.minimizer[0] - (5.0f64.sqrt() - 2.0)).abs() < 1e-2,
        "minimizer {:?}",
        r.minimizer
    );
    assert!(r.lower_bound <= r.value + 1e-9);
    assert!(r.lower_bound >= expected - 1e-3, "lower {}", r.lower_bound);
}

#[test]
fn fractional_unattained_infimum_flags_boundary() {
    // min over x ≥ 1 of 1/x: the infimum 0 is approached as x → ∞ but
    // never attained, so the minimizer keeps landing on the box edge.
    let t = x(1, 0);
    let num = Polynomial::constant(1, 1.0);
    let den = t.clone();
    let g = t.scale(-1.0).add_constant(1.0);
    let base = MinimaxProblem::new(1, vec![num], vec![g]).unwrap();
    let prob = RationalMinimaxProblem::new(base, den).unwrap();
    let r = match solve_fractional_primal(&prob, &opts()).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!(r.boundary_flag, "expected a persistent boundary flag");
    assert!(r.value > 0.0 && r.value < 0.02, "value {}", r.value);
    assert!(r.lower_bound <= r.value + 1e-9);
}

#[test]
fn fractional_on_explicit_box() {
    // min over [0, 1] of (x + 1)/(x + 2): increasing ratio, optimum 1/2 at
    // x = 0. With an explicit box the region is part of the problem, so a
    // boundary optimum is legitimate and no expansion happens.
    let t = x(1, 0);
    let num = t.add_constant(1.0);
    let den = t.add_constant(2.0);
    let base = MinimaxProblem::new(1, vec![num], vec![]).unwrap();
    let prob = RationalMinimaxProblem::new(base, den).unwrap();
    let mut o = opts();
    o.box_override = Some(vec![(0.0, 1.0)]);
    let r = match solve_fractional_primal(&prob, &o).unwrap() {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(i) => panic!("spurious infeasibility {i:?}"),
    };
    assert!((r.value - 0.5).abs() < 1e-6, "value {}", r.value);
    assert!(r.boundary_flag, "optimum sits at the box corner x = 0");
}

#[test]
fn slater_point_search() {
    // Unit disk: origin is strictly feasible.
    let (u, v) = (x(2, 0), x(2, 1));
    let g = u.square().add(&v.square()).add_constant(-1.0);
    let p = find_slater_point(2, std::slice::from_ref(&g), &opts()).unwrap();
    let p = p.expect("disk has interior points");
    assert!(g.eval(&p).unwrap() <= -1e-6);

    // {x : x^2 ≤ 0} = {0} has no strictly feasible point.
    let t = x(1, 0);
    let g0 = t.square();
    assert!(find_slater_point(1, &[g0], &opts()).unwrap().is_none());
}

#[test]
fn random_convex_quadratic_minimax_sandwich() {
    // Random smooth convex instances: the certified lower bound and the
    // incumbent upper bound must bracket a directly-computed minimum.
    let mut rng = ChaCha8Rng::seed_from_u64(31_2026_0823);
    for trial in 0..10 {
        let n = 1 + (trial % 2);
        // Strictly convex separable quadratic with known minimum.
        let mut p = Polynomial::zero(n);
        let mut center = vec![0.0; n];
        let mut known = 0.0;
        for (i, ci) in center.iter_mut().enumerate().take(n) {
            let a = rng.random_range(0.5..2.0);
            let c = rng.random_range(-2.0..2.0);
            *ci = c;
            p = p.add(&x(n, i).add_constant(-c).square().scale(a));
        }
        let shift = rng.random_range(-1.0..1.0);
        p = p.add_constant(shift);
        known += shift;
        let prob = MinimaxProblem::new(n, vec![p], vec![]).unwrap();
        let r = match solve_primal(&prob, &opts()).unwrap() {
            PrimalReport::Solved(r) => r,
            PrimalReport::Infeasible(i) => panic!("trial {trial}: {i:?}"),
        };
        assert!(r.converged, "trial {trial}");
        assert!(
            (r.value - known).abs() <= 1e-6 * (1.0 + known.abs()),
            "trial {trial}: value {} vs known {known}",
            r.value
        );
        assert!(r.lower_bound <= known + 1e-6 * (1.0 + known.abs()));
        for (mi, ci) in r.minimizer.iter().zip(&center) {
            assert!((mi - ci).abs() < 1e-4, "trial {trial}");
        }
    }
}
