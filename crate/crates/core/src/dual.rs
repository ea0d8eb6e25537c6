//! Mechanical construction of semidefinite / linear-programming duals for
//! convex minimax, robust, and rational optimization problems with
//! SOS-convex polynomial data.
//!
//! The primal template is
//!
//! ```text
//! minimize over x   max_j  p_j(x) / q(x)
//! subject to        g_i(x) ≤ 0
//! ```
//!
//! with `q ≡ 1` in the plain (non-fractional) case. The associated dual
//! searches for the largest lower bound `μ` certified by a sum-of-squares
//! identity:
//!
//! ```text
//! maximize   μ
//! s.t.       Σ_j δ_j p_j + Σ_i λ_i g_i − μ·q  ∈  Σ²   (Gram matrix Q ⪰ 0)
//!            Σ_j δ_j = 1,   δ ≥ 0,  λ ≥ 0,  μ free
//! ```
//!
//! Matching coefficients of the identity against a Gram basis of half the
//! combined degree turns this into one PSD block plus nonnegative and free
//! scalars — exactly the block structure of the conic solver.
//!
//! Two structure-exploiting specializations are provided and must agree
//! with the generic construction on their common domain:
//!
//! * quadratic data → a single `(n+1)×(n+1)` linear matrix inequality
//!   (the LMI matrix is twice the Gram matrix of the degree-2 identity);
//! * affine data with affine denominator → a plain linear program (at
//!   degree 2 the Gram rows force the linear part of the identity to
//!   vanish and its constant term to be a nonnegative scalar).
//!
//! Robust problems over finitely many scenarios (or vertices of a
//! polytopic uncertainty set) reduce to the minimax template by
//! enumerating scenarios.

use crate::poly::{MonomialBasis, MultiIndex, PolyError, Polynomial};
use crate::solver::{
    ConicProgram, SolveReport, SolveStatus, SolverConfig, SolverError,
};
use crate::sos::{gram_links, is_sos_convex, prune_gram_basis, SosError, SosOptions};
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DualError {
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("precondition not satisfied: {0}")]
    Precondition(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sos(#[from] SosError),
}

/// `min_x max_j p_j(x)` subject to `g_i(x) ≤ 0`.
#[derive(Debug, Clone)]
pub struct MinimaxProblem {
    pub dim: usize,
    pub objectives: Vec<Polynomial>,
    pub constraints: Vec<Polynomial>,
}

impl MinimaxProblem {
    pub fn new(
        dim: usize,
        objectives: Vec<Polynomial>,
        constraints: Vec<Polynomial>,
    ) -> Result<Self, DualError> {
        let p = MinimaxProblem {
            dim,
            objectives,
            constraints,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DualError> {
        if self.objectives.is_empty() {
            return Err(DualError::Validation(
                "at least one objective is required".into(),
            ));
        }
        for (what, polys) in [
            ("objective", &self.objectives),
            ("constraint", &self.constraints),
        ] {
            for (k, p) in polys.iter().enumerate() {
                if p.dim() != self.dim {
                    return Err(DualError::Validation(format!(
                        "{what} {k} has dimension {}, problem has {}",
                        p.dim(),
                        self.dim
                    )));
                }
                if !p.max_abs_coefficient().is_finite() {
                    return Err(DualError::Validation(format!(
                        "{what} {k} has a non-finite coefficient"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest degree over all problem data.
    pub fn max_degree(&self) -> u32 {
        self.objectives
            .iter()
            .chain(&self.constraints)
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }
}

/// `min_x max_j p_j(x) / q(x)` subject to `g_i(x) ≤ 0`, with `q` positive
/// on the feasible set.
#[derive(Debug, Clone)]
pub struct RationalMinimaxProblem {
    pub base: MinimaxProblem,
    pub denominator: Polynomial,
}

impl RationalMinimaxProblem {
    pub fn new(base: MinimaxProblem, denominator: Polynomial) -> Result<Self, DualError> {
        if denominator.dim() != base.dim {
            return Err(DualError::Validation(format!(
                "denominator has dimension {}, problem has {}",
                denominator.dim(),
                base.dim
            )));
        }
        if denominator.is_zero() {
            return Err(DualError::Validation("denominator is identically zero".into()));
        }
        if !denominator.max_abs_coefficient().is_finite() {
            return Err(DualError::Validation(
                "denominator has a non-finite coefficient".into(),
            ));
        }
        base.validate()?;
        Ok(RationalMinimaxProblem { base, denominator })
    }
}

/// How a robust problem's uncertainty is described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RobustMode {
    /// Finitely many explicit scenarios.
    FiniteScenarios,
    /// Vertices of a polytopic uncertainty set (data affine in the
    /// uncertain parameter, so vertex enumeration is exact).
    PolytopeVertices,
}

/// Robust program: guard against every scenario simultaneously.
#[derive(Debug, Clone)]
pub struct RobustProblem {
    pub dim: usize,
    pub mode: RobustMode,
    /// Realizations of the objective across scenarios.
    pub objective_scenarios: Vec<Polynomial>,
    /// For each base constraint, its realizations across scenarios.
    pub constraint_scenarios: Vec<Vec<Polynomial>>,
}

impl RobustProblem {
    /// The robust counterpart: a minimax problem over all objective
    /// scenarios with every constraint realization enforced.
    pub fn counterpart(&self) -> Result<MinimaxProblem, DualError> {
        let constraints: Vec<Polynomial> = self
            .constraint_scenarios
            .iter()
            .flatten()
            .cloned()
            .collect();
        MinimaxProblem::new(self.dim, self.objective_scenarios.clone(), constraints)
    }
}

/// Which encoding a built dual uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    /// Gram-matrix SDP over a graded monomial basis.
    SosGram,
    /// Single (n+1)x(n+1) linear matrix inequality (quadratic data).
    QuadraticLmi,
    /// Linear program (affine data, affine denominator).
    LinearFractionalLp,
}

/// A constructed dual: the conic program plus everything needed to read a
/// multiplier certificate back out of a solution.
#[derive(Debug, Clone)]
pub struct DualProgram {
    program: ConicProgram,
    pub kind: DualKind,
    /// Gram basis of the sum-of-squares identity.
    pub basis: Vec<MultiIndex>,
    objectives: Vec<Polynomial>,
    constraints: Vec<Polynomial>,
    denominator: Polynomial,
}

/// Multipliers and Gram matrix certifying the lower bound `mu`.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub mu: f64,
    pub delta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gram_basis: Vec<MultiIndex>,
    pub gram: DMatrix<f64>,
    /// Largest absolute coefficient mismatch in the identity
    /// `Σ δ_j p_j + Σ λ_i g_i − μ q = y' Q y`, recomputed from scratch.
    pub identity_residual: f64,
    /// Smallest eigenvalue of the Gram matrix.
    pub gram_min_eigenvalue: f64,
}

/// Outcome of solving a dual program.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub status: SolveStatus,
    /// Optimal dual value (the certified lower bound) when `Optimal`.
    pub value: Option<f64>,
    /// Whether the dual optimum is attained by explicit multipliers.
    pub attained: bool,
    pub certificate: Option<DualCertificate>,
    pub solver_report: SolveReport,
}

fn even_ceil(d: u32) -> u32 {
    d + (d % 2)
}

impl DualProgram {
    pub fn program(&self) -> &ConicProgram {
        &self.program
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Solve the dual and extract a multiplier certificate.
    pub fn solve(&self, cfg: &SolverConfig) -> Result<DualSolution, DualError> {
        let report = self.program.solve(cfg)?;
        let (value, certificate) = match report.status {
            SolveStatus::Optimal => {
                let vars = report
                    .variables
                    .as_ref()
                    .expect("optimal report carries variables");
                let r = self.objectives.len();
                let m = self.constraints.len();
                let (mu, delta, lambda, gram) = match self.kind {
                    DualKind::SosGram => (
                        vars.free[0],
                        vars.nonneg.as_slice()[..r].to_vec(),
                        vars.nonneg.as_slice()[r..r + m].to_vec(),
                        vars.psd
                            .first()
                            .cloned()
                            .unwrap_or_else(|| DMatrix::zeros(0, 0)),
                    ),
                    DualKind::QuadraticLmi => (
                        vars.free[0],
                        vars.nonneg.as_slice()[..r].to_vec(),
                        vars.nonneg.as_slice()[r..r + m].to_vec(),
                        vars.psd[0].clone() * 0.5,
                    ),
                    DualKind::LinearFractionalLp => (
                        vars.free[0],
                        vars.nonneg.as_slice()[..r].to_vec(),
                        vars.nonneg.as_slice()[r..r + m].to_vec(),
                        DMatrix::from_element(1, 1, vars.nonneg[r + m]),
                    ),
                };
                let cert = self.make_certificate(mu, delta, lambda, gram);
                (Some(mu), Some(cert))
            }
            _ => (None, None),
        };
        Ok(DualSolution {
            status: report.status,
            value,
            attained: matches!(report.status, SolveStatus::Optimal),
            certificate,
            solver_report: report,
        })
    }

    /// Assemble a certificate and verify the sum-of-squares identity with
    /// independent polynomial arithmetic.
    pub fn make_certificate(
        &self,
        mu: f64,
        delta: Vec<f64>,
        lambda: Vec<f64>,
        gram: DMatrix<f64>,
    ) -> DualCertificate {
        let gram = (&gram + gram.transpose()) * 0.5;
        let combo = self.multiplier_combination(mu, &delta, &lambda);
        let cert_stub = crate::sos::SosCertificate {
            basis: self.basis.clone(),
            gram: gram.clone(),
            min_eigenvalue: 0.0,
            residual: 0.0,
        };
        let reconstruction = cert_stub.reconstruction(self.dim());
        let identity_residual = combo.sub(&reconstruction).max_abs_coefficient();
        let gram_min_eigenvalue = if gram.nrows() == 0 {
            0.0
        } else if gram.nrows() == 1 {
            gram[(0, 0)]
        } else {
            SymmetricEigen::new(gram.clone())
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        };
        DualCertificate {
            mu,
            delta,
            lambda,
            gram_basis: self.basis.clone(),
            gram,
            identity_residual,
            gram_min_eigenvalue,
        }
    }

    /// `Σ δ_j p_j + Σ λ_i g_i − μ q` as a polynomial.
    pub fn multiplier_combination(&self, mu: f64, delta: &[f64], lambda: &[f64]) -> Polynomial {
        let mut combo = Polynomial::zero(self.dim());
        for (p, &d) in self.objectives.iter().zip(delta) {
            combo = combo.add(&p.scale(d));
        }
        for (g, &l) in self.constraints.iter().zip(lambda) {
            combo = combo.add(&g.scale(l));
        }
        combo.sub(&self.denominator.scale(mu))
    }

    pub fn dim(&self) -> usize {
        self.objectives[0].dim()
    }
}

/// Build the Gram-matrix SDP dual of a minimax problem (`q ≡ 1`).
pub fn build_dual(problem: &MinimaxProblem) -> Result<DualProgram, DualError> {
    problem.validate()?;
    let q = Polynomial::constant(problem.dim, 1.0);
    build_gram_dual(problem, &q)
}

/// Build the Gram-matrix SDP dual of a rational minimax problem. The
/// denominator must be affine or certified concave (its negation a
/// sum-of-squares-convex polynomial); positivity of `q` on the feasible
/// set is the caller's responsibility.
pub fn build_fractional_dual(
    problem: &RationalMinimaxProblem,
    sos_opts: &SosOptions,
) -> Result<DualProgram, DualError> {
    problem.base.validate()?;
    let q = &problem.denominator;
    if q.degree() > 1 {
        let neg_q = q.scale(-1.0);
        let concave = is_sos_convex(&neg_q, sos_opts)?;
        if !concave.is_sos() {
            return Err(DualError::Precondition(
                "denominator must be affine or certified concave \
                 (negation SOS-convex) for the fractional dual to be exact"
                    .into(),
            ));
        }
    }
    build_gram_dual(&problem.base, q)
}

fn build_gram_dual(problem: &MinimaxProblem, q: &Polynomial) -> Result<DualProgram, DualError> {
    let n = problem.dim;
    let r = problem.objectives.len();
    let m = problem.constraints.len();
    let d = even_ceil(problem.max_degree().max(q.degree()));
    // The multiplier combination Σδp + Σλg − μq is supported on the union
    // of the data supports no matter which multipliers the solver picks, so
    // the Gram basis can be pruned against that union up front. This both
    // shrinks the SDP and removes boundary-pinned Gram entries that would
    // otherwise destroy the strict interior of the feasible set.
    let mut support: BTreeSet<MultiIndex> = BTreeSet::new();
    for p in problem.objectives.iter().chain(&problem.constraints) {
        support.extend(p.terms().filter(|(_, c)| *c != 0.0).map(|(a, _)| a.clone()));
    }
    support.extend(q.terms().filter(|(_, c)| *c != 0.0).map(|(a, _)| a.clone()));
    let full = MonomialBasis::new(n, d / 2)?;
    let basis = prune_gram_basis(full.monomials(), &support);
    let links = gram_links(&basis);
    let s = basis.len();

    let blocks = if s > 0 { vec![s] } else { Vec::new() };
    let mut prog = ConicProgram::new(blocks, r + m, 1);
    let mut alphas: BTreeSet<MultiIndex> = links.keys().cloned().collect();
    alphas.extend(support.iter().cloned());
    for alpha in &alphas {
        let mut row = prog.expr();
        for (j, p) in problem.objectives.iter().enumerate() {
            row.add_nonneg(j, p.coefficient(alpha));
        }
        for (i, g) in problem.constraints.iter().enumerate() {
            row.add_nonneg(r + i, g.coefficient(alpha));
        }
        row.add_free(0, -q.coefficient(alpha));
        if let Some(pairs) = links.get(alpha) {
            for &(i, j) in pairs {
                row.add_psd(0, i, j, -1.0);
            }
        }
        prog.add_equality(row, 0.0);
    }
    let mut simplex = prog.expr();
    for j in 0..r {
        simplex.add_nonneg(j, 1.0);
    }
    prog.add_equality(simplex, 1.0);
    let mut obj = prog.expr();
    obj.add_free(0, 1.0);
    prog.set_objective(obj);

    Ok(DualProgram {
        program: prog,
        kind: DualKind::SosGram,
        basis,
        objectives: problem.objectives.clone(),
        constraints: problem.constraints.clone(),
        denominator: q.clone(),
    })
}

/// Quadratic-data coefficients `h(x) = c0 + b'x + x'Ax` (`A` symmetric).
struct QuadForm {
    c0: f64,
    b: Vec<f64>,
    a: DMatrix<f64>,
}

fn quad_form(h: &Polynomial, n: usize, what: &str) -> Result<QuadForm, DualError> {
    let mut qf = QuadForm {
        c0: 0.0,
        b: vec![0.0; n],
        a: DMatrix::zeros(n, n),
    };
    for (alpha, coeff) in h.terms() {
        match alpha.degree() {
            0 => qf.c0 = coeff,
            1 => {
                let u = alpha
                    .exponents()
                    .iter()
                    .position(|&e| e == 1)
                    .expect("degree-1 exponent");
                qf.b[u] = coeff;
            }
            2 => {
                let exps = alpha.exponents();
                if let Some(u) = exps.iter().position(|&e| e == 2) {
                    qf.a[(u, u)] = coeff;
                } else {
                    let u = exps.iter().position(|&e| e == 1).unwrap();
                    let v = u + 1 + exps[u + 1..].iter().position(|&e| e == 1).unwrap();
                    qf.a[(u, v)] = coeff / 2.0;
                    qf.a[(v, u)] = coeff / 2.0;
                }
            }
            _ => {
                return Err(DualError::Validation(format!(
                    "{what} has degree above 2; the LMI specialization needs \
                     quadratic data"
                )))
            }
        }
    }
    Ok(qf)
}

/// The `(n+1)×(n+1)` data matrix `[[2c0, b'], [b, 2A]]` of a quadratic.
fn lmi_matrix(qf: &QuadForm, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = 2.0 * qf.c0;
    for u in 0..n {
        m[(0, u + 1)] = qf.b[u];
        m[(u + 1, 0)] = qf.b[u];
        for v in 0..n {
            m[(u + 1, v + 1)] = 2.0 * qf.a[(u, v)];
        }
    }
    m
}

/// Build the single-LMI dual for quadratic data (`q ≡ 1`). Agrees with
/// [`build_dual`] because the LMI matrix is twice the degree-2 Gram
/// matrix.
pub fn build_quadratic_dual(problem: &MinimaxProblem) -> Result<DualProgram, DualError> {
    problem.validate()?;
    let n = problem.dim;
    let r = problem.objectives.len();
    let m = problem.constraints.len();
    let mut p_mats = Vec::with_capacity(r);
    for (j, p) in problem.objectives.iter().enumerate() {
        p_mats.push(lmi_matrix(&quad_form(p, n, &format!("objective {j}"))?, n));
    }
    let mut g_mats = Vec::with_capacity(m);
    for (i, g) in problem.constraints.iter().enumerate() {
        g_mats.push(lmi_matrix(&quad_form(g, n, &format!("constraint {i}"))?, n));
    }
    // q ≡ 1 has the matrix [[2, 0], [0, 0]].
    let mut q_mat = DMatrix::zeros(n + 1, n + 1);
    q_mat[(0, 0)] = 2.0;

    let mut prog = ConicProgram::new(vec![n + 1], r + m, 1);
    for u in 0..=n {
        for v in u..=n {
            let mut row = prog.expr();
            for (j, pm) in p_mats.iter().enumerate() {
                row.add_nonneg(j, pm[(u, v)]);
            }
            for (i, gm) in g_mats.iter().enumerate() {
                row.add_nonneg(r + i, gm[(u, v)]);
            }
            row.add_free(0, -q_mat[(u, v)]);
            // Match S entrywise: ⟨·,S⟩ doubles off-diagonal terms.
            row.add_psd(0, u, v, if u == v { -1.0 } else { -0.5 });
            prog.add_equality(row, 0.0);
        }
    }
    let mut simplex = prog.expr();
    for j in 0..r {
        simplex.add_nonneg(j, 1.0);
    }
    prog.add_equality(simplex, 1.0);
    let mut obj = prog.expr();
    obj.add_free(0, 1.0);
    prog.set_objective(obj);

    let basis = MonomialBasis::new(n, 1)?;
    Ok(DualProgram {
        program: prog,
        kind: DualKind::QuadraticLmi,
        basis: basis.monomials().to_vec(),
        objectives: problem.objectives.clone(),
        constraints: problem.constraints.clone(),
        denominator: Polynomial::constant(n, 1.0),
    })
}

/// Affine coefficients `h(x) = c0 + b'x`.
fn affine_form(h: &Polynomial, n: usize, what: &str) -> Result<(f64, Vec<f64>), DualError> {
    if h.degree() > 1 {
        return Err(DualError::Validation(format!(
            "{what} has degree above 1; the LP specialization needs affine data"
        )));
    }
    let mut b = vec![0.0; n];
    let mut c0 = 0.0;
    for (alpha, coeff) in h.terms() {
        if alpha.degree() == 0 {
            c0 = coeff;
        } else {
            let u = alpha.exponents().iter().position(|&e| e == 1).unwrap();
            b[u] = coeff;
        }
    }
    Ok((c0, b))
}

/// Build the linear-programming dual of a linear-fractional problem
/// (affine objectives, constraints, and denominator). Agrees with the
/// generic fractional dual: at degree 2 the Gram rows force the linear
/// part of the identity to vanish and reduce the quadratic block to a
/// nonnegative constant.
pub fn build_linear_fractional_dual(
    problem: &RationalMinimaxProblem,
) -> Result<DualProgram, DualError> {
    problem.base.validate()?;
    let n = problem.base.dim;
    let r = problem.base.objectives.len();
    let m = problem.base.constraints.len();
    let mut p_aff = Vec::with_capacity(r);
    for (j, p) in problem.base.objectives.iter().enumerate() {
        p_aff.push(affine_form(p, n, &format!("objective {j}"))?);
    }
    let mut g_aff = Vec::with_capacity(m);
    for (i, g) in problem.base.constraints.iter().enumerate() {
        g_aff.push(affine_form(g, n, &format!("constraint {i}"))?);
    }
    let (beta, bvec) = affine_form(&problem.denominator, n, "denominator")?;

    // Nonnegative variables: δ (r), λ (m), slack t (1); free: μ.
    let mut prog = ConicProgram::new(vec![], r + m + 1, 1);
    for u in 0..n {
        let mut row = prog.expr();
        for (j, (_, b)) in p_aff.iter().enumerate() {
            row.add_nonneg(j, b[u]);
        }
        for (i, (_, c)) in g_aff.iter().enumerate() {
            row.add_nonneg(r + i, c[u]);
        }
        row.add_free(0, -bvec[u]);
        prog.add_equality(row, 0.0);
    }
    let mut const_row = prog.expr();
    for (j, (alpha, _)) in p_aff.iter().enumerate() {
        const_row.add_nonneg(j, *alpha);
    }
    for (i, (gamma, _)) in g_aff.iter().enumerate() {
        const_row.add_nonneg(r + i, *gamma);
    }
    const_row.add_free(0, -beta);
    const_row.add_nonneg(r + m, -1.0);
    prog.add_equality(const_row, 0.0);
    let mut simplex = prog.expr();
    for j in 0..r {
        simplex.add_nonneg(j, 1.0);
    }
    prog.add_equality(simplex, 1.0);
    let mut obj = prog.expr();
    obj.add_free(0, 1.0);
    prog.set_objective(obj);

    let basis = MonomialBasis::new(n, 0)?;
    Ok(DualProgram {
        program: prog,
        kind: DualKind::LinearFractionalLp,
        basis: basis.monomials().to_vec(),
        objectives: problem.base.objectives.clone(),
        constraints: problem.base.constraints.clone(),
        denominator: problem.denominator.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_ceil_rounds_up() {
        assert_eq!(even_ceil(0), 0);
        assert_eq!(even_ceil(1), 2);
        assert_eq!(even_ceil(2), 2);
        assert_eq!(even_ceil(5), 6);
    }

    #[test]
    fn quad_form_roundtrip() {
        // 3 - x1 + 2 x1 x2 + 4 x2^2
        let f = Polynomial::from_terms(
            2,
            [
                (vec![0, 0], 3.0),
                (vec![1, 0], -1.0),
                (vec![1, 1], 2.0),
                (vec![0, 2], 4.0),
            ],
        )
        .unwrap();
        let qf = quad_form(&f, 2, "f").unwrap();
        assert_eq!(qf.c0, 3.0);
        assert_eq!(qf.b, vec![-1.0, 0.0]);
        assert_eq!(qf.a[(0, 1)], 1.0);
        assert_eq!(qf.a[(1, 0)], 1.0);
        assert_eq!(qf.a[(1, 1)], 4.0);
        assert_eq!(qf.a[(0, 0)], 0.0);
    }

    #[test]
    fn cubic_rejected_by_quadratic_dual() {
        let x = Polynomial::var(1, 0);
        let cubic = x.mul(&x).mul(&x);
        let prob = MinimaxProblem::new(1, vec![cubic], vec![]).unwrap();
        assert!(matches!(
            build_quadratic_dual(&prob),
            Err(DualError::Validation(_))
        ));
    }
}
