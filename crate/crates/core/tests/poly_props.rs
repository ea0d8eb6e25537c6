//! Property tests for polynomial arithmetic: ring identities checked both
//! coefficient-wise and through evaluation at random points.

use proptest::prelude::*;
use sosdual_core::Polynomial;

/// Random polynomial over `dim` variables with bounded degree and term
/// count; coefficients stay small so products remain well-scaled.
fn poly_strategy(dim: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    let term = (
        prop::collection::vec(0u32..=max_deg, dim),
        -3.0f64..3.0,
    )
        .prop_filter("total degree within bound", move |(e, _)| {
            e.iter().sum::<u32>() <= max_deg
        });
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        Polynomial::from_terms(dim, terms).expect("dimensions agree by construction")
    })
}

fn point_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim)
}

/// Coefficient-wise near-equality, scaled by the larger coefficient norm.
fn close(a: &Polynomial, b: &Polynomial) -> bool {
    let scale = 1.0 + a.max_abs_coefficient().max(b.max_abs_coefficient());
    a.sub(b).max_abs_coefficient() <= 1e-9 * scale
}

proptest! {
    #[test]
    fn addition_commutes(
        (f, g) in (1usize..=3).prop_flat_map(|d| (poly_strategy(d, 4), poly_strategy(d, 4)))
    ) {
        prop_assert!(close(&f.add(&g), &g.add(&f)));
    }

    #[test]
    fn multiplication_distributes(
        (f, g, h) in (1usize..=3).prop_flat_map(|d| {
            (poly_strategy(d, 3), poly_strategy(d, 3), poly_strategy(d, 3))
        })
    ) {
        let lhs = f.add(&g).mul(&h);
        let rhs = f.mul(&h).add(&g.mul(&h));
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(
        (f, g, x) in (1usize..=3).prop_flat_map(|d| {
            (poly_strategy(d, 3), poly_strategy(d, 3), point_strategy(d))
        })
    ) {
        let sum = f.add(&g).eval(&x).unwrap();
        let prod = f.mul(&g).eval(&x).unwrap();
        let (fx, gx) = (f.eval(&x).unwrap(), g.eval(&x).unwrap());
        let scale = 1.0 + fx.abs() + gx.abs() + fx.abs() * gx.abs();
        prop_assert!((sum - (fx + gx)).abs() <= 1e-8 * scale);
        prop_assert!((prod - fx * gx).abs() <= 1e-7 * scale);
    }

    #[test]
    fn squares_are_pointwise_nonnegative(
        (f, x) in (1usize..=3).prop_flat_map(|d| (poly_strategy(d, 3), point_strategy(d)))
    ) {
        let v = f.square().eval(&x).unwrap();
        prop_assert!(v >= -1e-9 * (1.0 + v.abs()));
    }

    #[test]
    fn gradient_is_linear(
        (f, g, x) in (1usize..=3).prop_flat_map(|d| {
            (poly_strategy(d, 4), poly_strategy(d, 4), point_strategy(d))
        })
    ) {
        let sum_grad = f.add(&g).gradient();
        let f_grad = f.gradient();
        let g_grad = g.gradient();
        for i in 0..x.len() {
            let lhs = sum_grad[i].eval(&x).unwrap();
            let rhs = f_grad[i].eval(&x).unwrap() + g_grad[i].eval(&x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs() + rhs.abs()));
        }
    }

    #[test]
    fn term_records_round_trip(
        f in (1usize..=3).prop_flat_map(|d| poly_strategy(d, 4))
    ) {
        let back = Polynomial::from_records(f.dim(), &f.to_records()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn hessian_is_symmetric_second_partial(
        (f, x) in (1usize..=3).prop_flat_map(|d| (poly_strategy(d, 4), point_strategy(d)))
    ) {
        let n = f.dim();
        let h = f.hessian();
        let grad = f.gradient();
        for (i, gi) in grad.iter().enumerate().take(n) {
            for j in 0..n {
                let hij = h.entry(i, j).eval(&x).unwrap();
                let dji = gi.partial(j).eval(&x).unwrap();
                prop_assert!((hij - dji).abs() <= 1e-9 * (1.0 + hij.abs()));
            }
        }
    }
}
