//! Fixed, seeded workloads shared by the benchmark suite so that runs are
//! comparable across machines and commits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sosdual_core::gen;
use sosdual_core::{MinimaxProblem, Polynomial, RationalMinimaxProblem};

/// Two-objective quartic/quadratic instance with value zero.
pub fn quartic_pair() -> MinimaxProblem {
    let p1 = Polynomial::from_terms(1, [(vec![4], 2.0), (vec![1], -1.0)]).expect("valid");
    let p2 = Polynomial::from_terms(1, [(vec![2], 5.0), (vec![1], 1.0)]).expect("valid");
    let g = Polynomial::from_terms(1, [(vec![1], -1.0), (vec![0], -2.0)]).expect("valid");
    MinimaxProblem::new(1, vec![p1, p2], vec![g]).expect("valid")
}

/// Seeded compact minimax instance in `n` variables.
pub fn generated_minimax(n: usize) -> MinimaxProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(2026_0823 + n as u64);
    gen::minimax_instance(&mut rng, n, 2, 2).0
}

/// Seeded compact ratio instance in `n` variables.
pub fn generated_fractional(n: usize) -> RationalMinimaxProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(9_2026_0823 + n as u64);
    gen::fractional_instance(&mut rng, n, 2, 1).0
}

/// Seeded explicit sum of squares in `n` variables of degree `2 * hd`.
pub fn generated_sos(n: usize, hd: u32) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(77_2026_0823 + n as u64);
    gen::random_sos(&mut rng, n, hd, 5)
}
