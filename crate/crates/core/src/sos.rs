//! Sum-of-squares certification.
//!
//! A polynomial `f` of even degree `2k` is a sum of squares exactly when it
//! admits a Gram representation `f(x) = y(x)' Q y(x)` with `Q ⪰ 0`, where
//! `y(x)` stacks all monomials of degree at most `k`. Matching coefficients
//! turns this into a semidefinite feasibility problem: for every exponent
//! `α`, the entries of `Q` over index pairs `(i, j)` with `y_i + y_j = α`
//! must sum (off-diagonal pairs twice) to the coefficient `f_α`.
//!
//! Instead of bare feasibility, this module solves the max-margin program
//!
//! ```text
//! maximize   t
//! s.t.       ⟨S, B_α⟩ + t·tr(B_α) = f_α   for all α
//!            S ⪰ 0, t free
//! ```
//!
//! whose optimum `t*` is the largest attainable smallest eigenvalue over
//! all Gram representations of `f`. The program is always feasible and
//! bounded, so the decision never hinges on infeasibility detection:
//! `t* ≥ -cert_tol` yields a certificate `Q = S + t*·I`, while
//! `t* < -cert_tol` refutes membership with margin `t*` (every Gram matrix
//! of `f` has an eigenvalue at or below `t*`). Decisions are made on the
//! coefficient-normalized polynomial, so they are invariant under positive
//! scaling of `f`.
//!
//! Matrix extension: a symmetric polynomial matrix `F(x)` is a
//! sum-of-squares matrix when the scalarization `z' F(x) z` is a sum of
//! squares of polynomials linear in `z`; restricting the basis to
//! `x^β z_i` is lossless because squares of mixed `z`-degrees cannot
//! produce a form of `z`-degree exactly two. A polynomial is SOS-convex
//! when its Hessian is a sum-of-squares matrix.

use crate::poly::{MonomialBasis, MultiIndex, PolyError, Polynomial, SymmetricMatrixPoly};
use crate::solver::{ConicProgram, SolveStatus, SolverConfig, SolverError};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SosError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("feasibility program rejected: {0}")]
    Solver(#[from] SolverError),
}

/// Options for SOS certification.
#[derive(Debug, Clone)]
pub struct SosOptions {
    /// Margin tolerance on the normalized max-margin optimum: values of
    /// `t*` at or above `-cert_tol` certify, below refute.
    pub cert_tol: f64,
    /// Conic solver configuration for the underlying SDP.
    pub solver: SolverConfig,
}

impl Default for SosOptions {
    fn default() -> Self {
        SosOptions {
            cert_tol: 1e-7,
            solver: SolverConfig::default(),
        }
    }
}

/// A Gram-matrix certificate: `f(x) = y(x)' Q y(x)` with `Q` numerically
/// positive semidefinite.
#[derive(Debug, Clone)]
pub struct SosCertificate {
    /// Monomial basis `y`.
    pub basis: Vec<MultiIndex>,
    /// Gram matrix `Q` (symmetric, size = basis length).
    pub gram: DMatrix<f64>,
    /// Smallest eigenvalue of `Q`.
    pub min_eigenvalue: f64,
    /// Largest absolute coefficient mismatch between `y' Q y` and `f`.
    pub residual: f64,
}

impl SosCertificate {
    /// Expand `y(x)' Q y(x)` back into a polynomial.
    pub fn reconstruction(&self, dim: usize) -> Polynomial {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (i, yi) in self.basis.iter().enumerate() {
            for (j, yj) in self.basis.iter().enumerate() {
                let q = self.gram[(i, j)];
                if q != 0.0 {
                    *acc.entry(combine(yi, yj).exponents().to_vec()).or_default() += q;
                }
            }
        }
        Polynomial::from_terms(dim, acc)
            .expect("basis monomials share the polynomial dimension")
    }

    /// Largest absolute coefficient difference between the reconstruction
    /// and `f` (recomputed from scratch; independent of stored `residual`).
    pub fn check_against(&self, f: &Polynomial) -> f64 {
        let diff = self.reconstruction(f.dim()).sub(f);
        diff.max_abs_coefficient()
    }
}

/// Refutation data for a polynomial that is not a sum of squares.
#[derive(Debug, Clone)]
pub struct SosRefutation {
    /// Max-margin optimum when an SDP was solved: the largest attainable
    /// smallest Gram eigenvalue (negative). `None` for structural
    /// refutations (odd degree, unrepresentable support).
    pub margin: Option<f64>,
    pub reason: String,
}

/// Outcome of a certification query.
#[derive(Debug, Clone)]
pub enum SosDecision {
    Sos(Box<SosCertificate>),
    NotSos(SosRefutation),
    /// The underlying SDP could not be solved to sufficient accuracy.
    Indeterminate(String),
}

impl SosDecision {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosDecision::Sos(_))
    }

    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            SosDecision::Sos(c) => Some(c),
            _ => None,
        }
    }
}

fn combine(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    let e: Vec<u32> = a
        .exponents()
        .iter()
        .zip(b.exponents())
        .map(|(x, y)| x + y)
        .collect();
    MultiIndex::new(e)
}

/// For each product exponent `α`, the index pairs `(i, j)` with `i ≤ j`
/// and `y_i + y_j = α`.
pub fn gram_links(basis: &[MultiIndex]) -> BTreeMap<MultiIndex, Vec<(usize, usize)>> {
    let mut links: BTreeMap<MultiIndex, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            links
                .entry(combine(&basis[i], &basis[j]))
                .or_default()
                .push((i, j));
        }
    }
    links
}

/// Drop basis monomials that are forced out of every Gram representation
/// of a polynomial supported on `support`.
///
/// If the squared monomial `2y_i` is outside the support and `(i, i)` is
/// the only index pair producing it, the diagonal entry `Q_ii` must vanish
/// in every representation; positive semidefiniteness then zeroes the
/// whole row and column, so `y_i` can be removed outright. Removals can
/// expose further forced zeroes, hence the fixed-point loop. Pruning
/// never changes the certified/refuted decision, and it restores a strict
/// interior to problems whose Gram corner entries were pinned to the cone
/// boundary.
pub fn prune_gram_basis(
    basis: &[MultiIndex],
    support: &BTreeSet<MultiIndex>,
) -> Vec<MultiIndex> {
    let mut keep: Vec<MultiIndex> = basis.to_vec();
    loop {
        let links = gram_links(&keep);
        let mut drop = vec![false; keep.len()];
        let mut removed = false;
        for (i, y) in keep.iter().enumerate() {
            let sq = combine(y, y);
            if support.contains(&sq) {
                continue;
            }
            if let Some(pairs) = links.get(&sq) {
                if pairs.len() == 1 && pairs[0] == (i, i) {
                    drop[i] = true;
                    removed = true;
                }
            }
        }
        if !removed {
            return keep;
        }
        keep = keep
            .into_iter()
            .zip(drop)
            .filter_map(|(y, d)| (!d).then_some(y))
            .collect();
    }
}

/// Decide whether `f` is a sum of squares of polynomials spanned by the
/// given monomial basis.
pub fn is_sos_with_basis(
    f: &Polynomial,
    basis: &[MultiIndex],
    opts: &SosOptions,
) -> Result<SosDecision, SosError> {
    let s = basis.len();
    if f.is_zero() {
        return Ok(SosDecision::Sos(Box::new(SosCertificate {
            basis: basis.to_vec(),
            gram: DMatrix::zeros(s, s),
            min_eigenvalue: 0.0,
            residual: 0.0,
        })));
    }
    if s == 0 {
        return Ok(SosDecision::NotSos(SosRefutation {
            margin: None,
            reason: "empty basis cannot represent a nonzero polynomial".into(),
        }));
    }
    for b in basis {
        if b.dim() != f.dim() {
            return Err(SosError::Poly(PolyError::DimensionMismatch {
                expected: f.dim(),
                got: b.dim(),
            }));
        }
    }
    let support: BTreeSet<MultiIndex> = f
        .terms()
        .filter(|(_, c)| *c != 0.0)
        .map(|(alpha, _)| alpha.clone())
        .collect();
    let basis = prune_gram_basis(basis, &support);
    let s = basis.len();
    let links = gram_links(&basis);
    for (alpha, coeff) in f.terms() {
        if coeff != 0.0 && !links.contains_key(alpha) {
            return Ok(SosDecision::NotSos(SosRefutation {
                margin: None,
                reason: format!(
                    "monomial {alpha} of f cannot be matched by any admissible \
                     product of two basis monomials"
                ),
            }));
        }
    }

    // Normalize coefficients so the margin decision is scale-invariant.
    let scale = f.max_abs_coefficient();
    let mut prog = ConicProgram::new(vec![s], 0, 1);
    for (alpha, pairs) in &links {
        let mut row = prog.expr();
        let mut trace = 0.0;
        for &(i, j) in pairs {
            row.add_psd(0, i, j, 1.0);
            if i == j {
                trace += 1.0;
            }
        }
        row.add_free(0, trace);
        prog.add_equality(row, f.coefficient(alpha) / scale);
    }
    let mut obj = prog.expr();
    obj.add_free(0, 1.0);
    prog.set_objective(obj);

    let report = prog.solve(&opts.solver)?;
    match report.status {
        SolveStatus::Optimal => {
            let t_norm = report.value.expect("optimal report carries a value");
            if t_norm < -opts.cert_tol {
                return Ok(SosDecision::NotSos(SosRefutation {
                    margin: Some(t_norm * scale),
                    reason: format!(
                        "every Gram representation has an eigenvalue at or below \
                         {:.3e} (normalized margin {t_norm:.3e})",
                        t_norm * scale
                    ),
                }));
            }
            let vars = report
                .variables
                .expect("optimal report carries variables");
            let mut gram = vars.psd[0].clone();
            for i in 0..s {
                gram[(i, i)] += t_norm;
            }
            gram *= scale;
            let mut gram = (&gram + gram.transpose()) * 0.5;
            // Polish: project onto the exact coefficient constraints. The
            // link matrices have pairwise disjoint supports, so the
            // least-Frobenius-norm correction splits per product monomial:
            // spread each coefficient residual over its pairs, scaled by
            // the squared norm of the link pattern. The shift is of the
            // order of the solver tolerance and leaves the reconstruction
            // exact to rounding error.
            for (alpha, pairs) in &links {
                let mut acc = 0.0;
                let mut norm = 0.0;
                for &(i, j) in pairs {
                    if i == j {
                        acc += gram[(i, i)];
                        norm += 1.0;
                    } else {
                        acc += 2.0 * gram[(i, j)];
                        norm += 2.0;
                    }
                }
                let nu = (f.coefficient(alpha) - acc) / norm;
                for &(i, j) in pairs {
                    if i == j {
                        gram[(i, i)] += nu;
                    } else {
                        gram[(i, j)] += nu;
                        gram[(j, i)] += nu;
                    }
                }
            }
            let gram = gram;
            let min_eigenvalue = if s == 1 {
                gram[(0, 0)]
            } else {
                SymmetricEigen::new(gram.clone())
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            };
            // Independent reconstruction check.
            let mut residual = 0.0f64;
            for (alpha, pairs) in &links {
                let mut acc = 0.0;
                for &(i, j) in pairs {
                    acc += if i == j {
                        gram[(i, i)]
                    } else {
                        2.0 * gram[(i, j)]
                    };
                }
                residual = residual.max((acc - f.coefficient(alpha)).abs());
            }
            if residual > 1e-6 * (1.0 + scale) {
                return Ok(SosDecision::Indeterminate(format!(
                    "candidate Gram matrix reconstructs f only to residual {residual:.3e}"
                )));
            }
            if min_eigenvalue < -10.0 * opts.cert_tol * scale {
                return Ok(SosDecision::Indeterminate(format!(
                    "candidate Gram matrix has eigenvalue {min_eigenvalue:.3e} \
                     below the certification tolerance"
                )));
            }
            Ok(SosDecision::Sos(Box::new(SosCertificate {
                basis,
                gram,
                min_eigenvalue,
                residual,
            })))
        }
        SolveStatus::Indeterminate => Ok(SosDecision::Indeterminate(format!(
            "SDP did not converge: {}",
            report.message
        ))),
        // The max-margin program is feasible and bounded by construction,
        // so these statuses indicate numerical failure, not structure.
        SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => {
            Ok(SosDecision::Indeterminate(format!(
                "unexpected {:?} report from a feasible bounded program: {}",
                report.status, report.message
            )))
        }
    }
}

/// Decide whether `f` is a sum of squares (full graded basis).
pub fn is_sos(f: &Polynomial, opts: &SosOptions) -> Result<SosDecision, SosError> {
    if f.is_zero() {
        return Ok(SosDecision::Sos(Box::new(SosCertificate {
            basis: Vec::new(),
            gram: DMatrix::zeros(0, 0),
            min_eigenvalue: 0.0,
            residual: 0.0,
        })));
    }
    let d = f.degree();
    if d % 2 == 1 {
        return Ok(SosDecision::NotSos(SosRefutation {
            margin: None,
            reason: format!("degree {d} is odd; sums of squares have even degree"),
        }));
    }
    let basis = MonomialBasis::new(f.dim(), d / 2)?;
    is_sos_with_basis(f, basis.monomials(), opts)
}

/// Decide whether a symmetric polynomial matrix `F(x)` is a sum-of-squares
/// matrix, i.e. `F(x) = L(x)' L(x)` for some polynomial matrix `L`.
pub fn is_sos_matrix(
    m: &SymmetricMatrixPoly,
    opts: &SosOptions,
) -> Result<SosDecision, SosError> {
    let scalar = m.scalarize();
    if scalar.is_zero() {
        return Ok(SosDecision::Sos(Box::new(SosCertificate {
            basis: Vec::new(),
            gram: DMatrix::zeros(0, 0),
            min_eigenvalue: 0.0,
            residual: 0.0,
        })));
    }
    let degf = m.degree();
    // Diagonal entries of L'L are sums of squares, so every factor entry
    // has degree at most ceil(degf / 2); the z-linear mixed basis below is
    // therefore complete as well as sound.
    let kx = degf.div_ceil(2);
    let xb = MonomialBasis::new(m.dim(), kx)?;
    let n = m.dim();
    let size = m.size();
    let mut basis = Vec::with_capacity(xb.len() * size);
    for mono in xb.monomials() {
        let mut e = mono.exponents().to_vec();
        e.resize(n + size, 0);
        for i in 0..size {
            let mut ei = e.clone();
            ei[n + i] = 1;
            basis.push(MultiIndex::new(ei));
        }
    }
    is_sos_with_basis(&scalar, &basis, opts)
}

/// Decide whether `f` is SOS-convex (its Hessian is a sum-of-squares
/// matrix). SOS-convexity implies convexity.
pub fn is_sos_convex(f: &Polynomial, opts: &SosOptions) -> Result<SosDecision, SosError> {
    is_sos_matrix(&f.hessian(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_links_partition_pairs() {
        let basis = MonomialBasis::new(2, 2).unwrap();
        let links = gram_links(basis.monomials());
        let s = basis.len();
        let total: usize = links.values().map(|v| v.len()).sum();
        assert_eq!(total, s * (s + 1) / 2);
        // Every pair appears exactly once.
        let mut seen = std::collections::BTreeSet::new();
        for pairs in links.values() {
            for &p in pairs {
                assert!(seen.insert(p));
            }
        }
    }

    #[test]
    fn combine_adds_exponents() {
        let a = MultiIndex::new(vec![1, 2]);
        let b = MultiIndex::new(vec![0, 3]);
        assert_eq!(combine(&a, &b), MultiIndex::new(vec![1, 5]));
    }
}
