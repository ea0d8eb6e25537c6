//! Seeded random instance generators.
//!
//! Every generator takes the random source explicitly so callers control
//! seeding and determinism. Construction guarantees the properties the
//! rest of the crate relies on: objectives are SOS-convex by
//! construction, constraint sets have a strictly feasible point that is
//! returned alongside the problem, ball constraints keep feasible sets
//! compact, and rational instances have denominators bounded away from
//! zero on the region the oracle searches.

use crate::dual::{MinimaxProblem, RationalMinimaxProblem, RobustMode, RobustProblem};
use crate::poly::{MonomialBasis, Polynomial};
use rand::Rng;
use std::collections::BTreeMap;

fn from_map(dim: usize, acc: BTreeMap<Vec<u32>, f64>) -> Polynomial {
    Polynomial::from_terms(dim, acc).expect("generator exponents match the dimension")
}

/// Strictly convex quadratic `x'(LL' + 0.1 I)x + b'x + c` with entries of
/// `L` in `[-1, 1]`, `b` in `[-2, 2]`, `c` in `[-1, 1]`.
pub fn convex_quadratic(rng: &mut impl Rng, n: usize) -> Polynomial {
    let mut l = vec![vec![0.0f64; n]; n];
    for (i, row) in l.iter_mut().enumerate() {
        for v in row.iter_mut().take(i + 1) {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let mut aij: f64 = (0..n).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                aij += 0.1;
            }
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            *acc.entry(e).or_default() += aij;
        }
    }
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = 1;
        *acc.entry(e).or_default() += rng.random_range(-2.0..2.0);
    }
    *acc.entry(vec![0; n]).or_default() += rng.random_range(-1.0..1.0);
    from_map(n, acc)
}

/// SOS-convex quartic: a strictly convex quadratic plus nonnegative
/// multiples of pure fourth powers `x_t^4`. The Hessian is a diagonal
/// nonnegative quadratic correction on top of a positive definite
/// constant matrix, so SOS-convexity holds by construction.
pub fn sos_convex_poly(rng: &mut impl Rng, n: usize) -> Polynomial {
    let mut p = convex_quadratic(rng, n);
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for t in 0..n {
        let theta: f64 = rng.random_range(0.0..0.5);
        if theta > 0.0 {
            let mut e = vec![0u32; n];
            e[t] = 4;
            acc.insert(e, theta);
        }
    }
    p = p.add(&from_map(n, acc));
    p
}

/// Explicit sum of `terms` squared random polynomials of degree at most
/// `half_degree`.
pub fn random_sos(rng: &mut impl Rng, n: usize, half_degree: u32, terms: usize) -> Polynomial {
    let basis = MonomialBasis::new(n, half_degree).expect("small generator basis");
    let monos = basis.monomials();
    let mut out = Polynomial::zero(n);
    for _ in 0..terms.max(1) {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let picks = (n + 2).min(monos.len());
        for _ in 0..picks {
            let m = &monos[rng.random_range(0..monos.len())];
            *acc.entry(m.exponents().to_vec()).or_default() +=
                rng.random_range(-1.0f64..1.0);
        }
        out = out.add(&from_map(n, acc).square());
    }
    out
}

/// A polynomial that is provably not a sum of squares, together with the
/// witness point where it is negative: `σ − (σ(w) + 1)` for a random sum
/// of squares `σ` evaluates to `−1` at `w`.
pub fn witnessed_negative(
    rng: &mut impl Rng,
    n: usize,
    half_degree: u32,
) -> (Polynomial, Vec<f64>) {
    let sigma = random_sos(rng, n, half_degree, 2);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let at_w = sigma.eval(&w).expect("dimension matches");
    (sigma.add_constant(-(at_w + 1.0)), w)
}

/// Minimax instance with SOS-convex objectives and convex quadratic
/// constraints. The first constraint (when `m ≥ 1`) is a ball keeping the
/// feasible set compact; every constraint is strictly negative at the
/// returned interior point.
pub fn minimax_instance(
    rng: &mut impl Rng,
    n: usize,
    r: usize,
    m: usize,
) -> (MinimaxProblem, Vec<f64>) {
    let xbar: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let objectives: Vec<Polynomial> = (0..r.max(1))
        .map(|_| {
            if rng.random_bool(0.5) {
                sos_convex_poly(rng, n)
            } else {
                convex_quadratic(rng, n)
            }
        })
        .collect();
    let mut constraints = Vec::with_capacity(m);
    for i in 0..m {
        if i == 0 {
            let radius: f64 = rng.random_range(2.0..5.0);
            let mut ball = Polynomial::zero(n);
            for (t, c) in xbar.iter().enumerate() {
                ball = ball.add(&Polynomial::var(n, t).add_constant(-c).square());
            }
            constraints.push(ball.add_constant(-radius * radius));
        } else {
            let h = convex_quadratic(rng, n);
            let margin: f64 = rng.random_range(0.1..1.0);
            let at_xbar = h.eval(&xbar).expect("dimension matches");
            constraints.push(h.add_constant(-at_xbar - margin));
        }
    }
    let problem =
        MinimaxProblem::new(n, objectives, constraints).expect("generated data is valid");
    (problem, xbar)
}

/// Rational minimax instance: a compact minimax base (ball constraint
/// always present) over an affine denominator bounded below by one on
/// `[-10, 10]^n`, which contains the feasible set.
pub fn fractional_instance(
    rng: &mut impl Rng,
    n: usize,
    r: usize,
    m: usize,
) -> (RationalMinimaxProblem, Vec<f64>) {
    let (base, xbar) = minimax_instance(rng, n, r, m.max(1));
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
    let c0 = 1.0 + rng.random_range(0.0..1.0) + b.iter().map(|v| v.abs()).sum::<f64>() * 10.0;
    let mut den = Polynomial::constant(n, c0);
    for (i, bi) in b.iter().enumerate() {
        den = den.add(&Polynomial::var(n, i).scale(*bi));
    }
    let problem = RationalMinimaxProblem::new(base, den).expect("generated data is valid");
    (problem, xbar)
}

/// Robust instance: scenario realizations are independent draws of the
/// same shapes used by [`minimax_instance`], with a shared ball keeping
/// the counterpart compact and strictly feasible at the returned point.
pub fn robust_instance(
    rng: &mut impl Rng,
    n: usize,
    scenarios: usize,
    base_constraints: usize,
    realizations: usize,
    mode: RobustMode,
) -> (RobustProblem, Vec<f64>) {
    let (template, xbar) =
        minimax_instance(rng, n, scenarios.max(1), base_constraints.max(1));
    let mut constraint_scenarios: Vec<Vec<Polynomial>> = template
        .constraints
        .iter()
        .map(|g| vec![g.clone()])
        .collect();
    for per in constraint_scenarios.iter_mut().skip(1) {
        for _ in 1..realizations.max(1) {
            let h = convex_quadratic(rng, n);
            let margin: f64 = rng.random_range(0.1..1.0);
            let at_xbar = h.eval(&xbar).expect("dimension matches");
            per.push(h.add_constant(-at_xbar - margin));
        }
    }
    let problem = RobustProblem {
        dim: n,
        mode,
        objective_scenarios: template.objectives.clone(),
        constraint_scenarios,
    };
    (problem, xbar)
}
