//! Generator guarantees: convexity certificates, strict interior points,
//! compactness and denominator positivity of random instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sosdual_core::dual::RobustMode;
use sosdual_core::gen::{
    convex_quadratic, fractional_instance, minimax_instance, random_sos, robust_instance,
    sos_convex_poly, witnessed_negative,
};
use sosdual_core::sos::{is_sos, is_sos_convex, SosOptions};

#[test]
fn generated_objectives_are_sos_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(11_2026_0823);
    let opts = SosOptions::default();
    for n in 1..=3 {
        for _ in 0..3 {
            let q = convex_quadratic(&mut rng, n);
            assert!(is_sos_convex(&q, &opts).unwrap().is_sos());
            let p = sos_convex_poly(&mut rng, n);
            assert!(is_sos_convex(&p, &opts).unwrap().is_sos());
        }
    }
}

#[test]
fn generated_sos_and_refutations_behave() {
    let mut rng = ChaCha8Rng::seed_from_u64(12_2026_0823);
    let opts = SosOptions::default();
    for n in 1..=2 {
        for _ in 0..3 {
            let s = random_sos(&mut rng, n, 2, 2);
            assert!(is_sos(&s, &opts).unwrap().is_sos());
            let (f, w) = witnessed_negative(&mut rng, n, 2);
            assert!((f.eval(&w).unwrap() + 1.0).abs() < 1e-9);
            assert!(!is_sos(&f, &opts).unwrap().is_sos());
        }
    }
}

#[test]
fn minimax_instances_have_strict_interior() {
    let mut rng = ChaCha8Rng::seed_from_u64(13_2026_0823);
    for trial in 0..10 {
        let n = 1 + trial % 3;
        let (prob, xbar) = minimax_instance(&mut rng, n, 2, 2);
        assert_eq!(prob.dim, n);
        for g in &prob.constraints {
            assert!(
                g.eval(&xbar).unwrap() < -1e-3,
                "trial {trial}: interior point not strictly feasible"
            );
        }
    }
}

#[test]
fn fractional_instances_have_positive_denominators() {
    let mut rng = ChaCha8Rng::seed_from_u64(14_2026_0823);
    for trial in 0..10 {
        let n = 1 + trial % 2;
        let (prob, xbar) = fractional_instance(&mut rng, n, 2, 2);
        assert!(prob.denominator.eval(&xbar).unwrap() >= 1.0);
        // Lower bound 1 must hold on the whole oracle search region; check
        // the corners of [-10, 10]^n, enough for an affine function.
        for corner in 0..(1usize << n) {
            let x: Vec<f64> = (0..n)
                .map(|i| if corner >> i & 1 == 1 { 10.0 } else { -10.0 })
                .collect();
            assert!(
                prob.denominator.eval(&x).unwrap() >= 1.0 - 1e-12,
                "trial {trial}: denominator dips below 1 at {x:?}"
            );
        }
    }
}

#[test]
fn robust_instances_flatten_consistently() {
    let mut rng = ChaCha8Rng::seed_from_u64(15_2026_0823);
    let (prob, xbar) = robust_instance(&mut rng, 2, 3, 2, 2, RobustMode::FiniteScenarios);
    assert_eq!(prob.objective_scenarios.len(), 3);
    assert_eq!(prob.constraint_scenarios.len(), 2);
    let flat = prob.counterpart().unwrap();
    assert_eq!(flat.objectives.len(), 3);
    assert_eq!(
        flat.constraints.len(),
        prob.constraint_scenarios.iter().map(Vec::len).sum::<usize>()
    );
    for g in &flat.constraints {
        assert!(g.eval(&xbar).unwrap() < -1e-3);
    }
}
