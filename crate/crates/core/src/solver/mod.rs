//! Dense primal-dual interior-point conic solver.
//!
//! Solves programs of the form
//!
//! ```text
//! maximize  ⟨obj, x⟩
//! s.t.      ⟨A_i, x⟩ = b_i        i = 1..m
//!           x ∈ K = (⊕ℓ S_+^{sℓ}) ⊕ R_+^{nn} ⊕ R^{free}
//! ```
//!
//! via a homogeneous self-dual embedding with Nesterov–Todd scaling and a
//! Mehrotra predictor-corrector iteration. The Schur complement is formed
//! densely and factored by Cholesky with static regularization and iterative
//! refinement; free variables are handled directly in the KKT system (no
//! splitting). Infeasibility and unboundedness are certified by Farkas
//! vectors / improving rays recovered from the embedding.
//!
//! The solver is deterministic: no randomization, sequential linear algebra,
//! so repeated solves of the same program produce bitwise-identical iterates.

mod ipm;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid program: {0}")]
    Validation(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

/// Solver options. Defaults match the documented tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative primal/dual feasibility tolerance for optimality.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance for optimality.
    pub gap_tol: f64,
    /// Residual threshold for accepting infeasibility/unboundedness
    /// certificates.
    pub infeas_tol: f64,
    /// Predictor-corrector iteration cap.
    pub max_iter: usize,
    /// Static regularization added to the Schur complement diagonal.
    pub static_reg: f64,
    /// Iterative-refinement rounds on each KKT solve.
    pub refine_rounds: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_scale: f64,
    /// τ/κ ratio below which a stalled run is classified as
    /// infeasible/unbounded (with relaxed certificate tolerance) rather
    /// than indeterminate.
    pub tau_kappa_ratio: f64,
    /// Largest allowed PSD block side length.
    pub max_psd_block: usize,
    /// Largest allowed total scalar dimension (svec entries + vector vars).
    pub max_total_dim: usize,
    /// Largest allowed number of equality rows.
    pub max_rows: usize,
    /// Print per-iteration progress to stderr.
    #[serde(default)]
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            infeas_tol: 1e-8,
            max_iter: 200,
            static_reg: 1e-10,
            refine_rounds: 2,
            step_scale: 0.99,
            tau_kappa_ratio: 1e-9,
            max_psd_block: 200,
            max_total_dim: 100_000,
            max_rows: 5_000,
            verbose: false,
        }
    }
}

/// Linear functional over the block variable `x`.
///
/// PSD coefficients are stored as upper-triangle triples `(i, j, v)` with
/// `i <= j`, representing the symmetric matrix `A` with `A_ij = A_ji = v`;
/// the functional contributes `v·X_ii` for diagonal entries and `2v·X_ij`
/// for off-diagonal ones, i.e. the trace inner product `⟨A, X⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    pub psd: Vec<Vec<(usize, usize, f64)>>,
    pub nonneg: Vec<(usize, f64)>,
    pub free: Vec<(usize, f64)>,
}

impl LinExpr {
    fn new(n_psd_blocks: usize) -> Self {
        LinExpr {
            psd: vec![Vec::new(); n_psd_blocks],
            nonneg: Vec::new(),
            free: Vec::new(),
        }
    }

    /// Accumulate `v` onto the symmetric PSD coefficient at `(i, j)`.
    pub fn add_psd(&mut self, block: usize, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let entries = &mut self.psd[block];
        if let Some(e) = entries.iter_mut().find(|e| e.0 == i && e.1 == j) {
            e.2 += v;
        } else {
            entries.push((i, j, v));
        }
    }

    pub fn add_nonneg(&mut self, idx: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        if let Some(e) = self.nonneg.iter_mut().find(|e| e.0 == idx) {
            e.1 += v;
        } else {
            self.nonneg.push((idx, v));
        }
    }

    pub fn add_free(&mut self, idx: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        if let Some(e) = self.free.iter_mut().find(|e| e.0 == idx) {
            e.1 += v;
        } else {
            self.free.push((idx, v));
        }
    }

    /// Canonical form: triples sorted, exact zeros dropped.
    fn canonicalize(&mut self) {
        for entries in &mut self.psd {
            entries.retain(|e| e.2 != 0.0);
            entries.sort_by_key(|a| (a.0, a.1));
        }
        self.nonneg.retain(|e| e.1 != 0.0);
        self.nonneg.sort_by_key(|e| e.0);
        self.free.retain(|e| e.1 != 0.0);
        self.free.sort_by_key(|e| e.0);
    }

    /// Euclidean norm of the functional (off-diagonal PSD entries act on
    /// both `X_ij` and `X_ji`, hence weight 2).
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for entries in &self.psd {
            for &(i, j, v) in entries {
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        for &(_, v) in &self.nonneg {
            s += v * v;
        }
        for &(_, v) in &self.free {
            s += v * v;
        }
        s.sqrt()
    }

    fn scale(&mut self, by: f64) {
        for entries in &mut self.psd {
            for e in entries {
                e.2 *= by;
            }
        }
        for e in &mut self.nonneg {
            e.1 *= by;
        }
        for e in &mut self.free {
            e.1 *= by;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.psd.iter().all(|e| e.is_empty()) && self.nonneg.is_empty() && self.free.is_empty()
    }

    /// Value of the functional at a block point.
    pub fn value_at(&self, x: &BlockPoint) -> f64 {
        let mut acc = 0.0;
        for (blk, entries) in self.psd.iter().enumerate() {
            let m = &x.psd[blk];
            for &(i, j, v) in entries {
                acc += if i == j {
                    v * m[(i, i)]
                } else {
                    2.0 * v * m[(i, j)]
                };
            }
        }
        for &(i, v) in &self.nonneg {
            acc += v * x.nonneg[i];
        }
        for &(i, v) in &self.free {
            acc += v * x.free[i];
        }
        acc
    }

    fn max_entry_finite(&self) -> bool {
        self.psd
            .iter()
            .flatten()
            .all(|&(_, _, v)| v.is_finite())
            && self.nonneg.iter().all(|&(_, v)| v.is_finite())
            && self.free.iter().all(|&(_, v)| v.is_finite())
    }
}

/// Values of all variable blocks (PSD matrices stored dense symmetric).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPoint {
    pub psd: Vec<DMatrix<f64>>,
    pub nonneg: DVector<f64>,
    pub free: DVector<f64>,
}

impl BlockPoint {
    pub fn zeros(psd_sizes: &[usize], nonneg_dim: usize, free_dim: usize) -> Self {
        BlockPoint {
            psd: psd_sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
            nonneg: DVector::zeros(nonneg_dim),
            free: DVector::zeros(free_dim),
        }
    }

    /// Cone interior starting point: identity matrices / ones, free = 0.
    pub fn interior(psd_sizes: &[usize], nonneg_dim: usize, free_dim: usize) -> Self {
        BlockPoint {
            psd: psd_sizes.iter().map(|&s| DMatrix::identity(s, s)).collect(),
            nonneg: DVector::from_element(nonneg_dim, 1.0),
            free: DVector::zeros(free_dim),
        }
    }

    /// Trace inner product over all blocks.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.psd.iter().zip(&other.psd) {
            acc += a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
        }
        acc += self.nonneg.dot(&other.nonneg);
        acc += self.free.dot(&other.free);
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.psd.iter_mut().zip(&other.psd) {
            *x += y * a;
        }
        self.nonneg.axpy(a, &other.nonneg, 1.0);
        self.free.axpy(a, &other.free, 1.0);
    }

    pub fn scale_mut(&mut self, a: f64) {
        for x in &mut self.psd {
            *x *= a;
        }
        self.nonneg *= a;
        self.free *= a;
    }

    /// Force exact symmetry of the PSD blocks (kills accumulated roundoff).
    pub fn symmetrize(&mut self) {
        for x in &mut self.psd {
            let t = x.transpose();
            *x += t;
            *x *= 0.5;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveStatus {
    /// Converged with matching primal/dual objectives.
    Optimal,
    /// The program itself has no feasible point (Farkas certificate).
    PrimalInfeasible,
    /// The program is unbounded, equivalently its dual is infeasible
    /// (improving-ray certificate).
    DualInfeasible,
    /// No optimality or infeasibility certificate within the iteration
    /// budget.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective value (maximization sense) at the recovered point; only
    /// present for `Optimal`.
    pub value: Option<f64>,
    /// Recovered block variables (for `Optimal`).
    pub variables: Option<BlockPoint>,
    /// Relative residuals of the final iterate.
    pub residuals: Residuals,
    pub iterations: usize,
    /// For `DualInfeasible`: direction `x ∈ K` with `⟨A_i, x⟩ ≈ 0` and
    /// `⟨obj, x⟩ = 1` along which the objective improves without bound.
    pub improving_ray: Option<BlockPoint>,
    /// For `PrimalInfeasible`: multipliers `y` (indexed by original row)
    /// with `Σ y_i A_i ∈ -K*` and `Σ y_i b_i = 1`.
    pub infeasibility_certificate: Option<Vec<f64>>,
    pub message: String,
}

/// Conic program in block form; the objective is maximized.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    pub psd_blocks: Vec<usize>,
    pub nonneg_dim: usize,
    pub free_dim: usize,
    equalities: Vec<(LinExpr, f64)>,
    objective: LinExpr,
}

impl ConicProgram {
    pub fn new(psd_blocks: Vec<usize>, nonneg_dim: usize, free_dim: usize) -> Self {
        let objective = LinExpr::new(psd_blocks.len());
        ConicProgram {
            psd_blocks,
            nonneg_dim,
            free_dim,
            equalities: Vec::new(),
            objective,
        }
    }

    /// Fresh zero functional shaped for this program.
    pub fn expr(&self) -> LinExpr {
        LinExpr::new(self.psd_blocks.len())
    }

    pub fn add_equality(&mut self, mut expr: LinExpr, rhs: f64) {
        expr.canonicalize();
        self.equalities.push((expr, rhs));
    }

    pub fn set_objective(&mut self, mut expr: LinExpr) {
        expr.canonicalize();
        self.objective = expr;
    }

    pub fn num_rows(&self) -> usize {
        self.equalities.len()
    }

    pub fn equality(&self, i: usize) -> (&LinExpr, f64) {
        let (e, b) = &self.equalities[i];
        (e, *b)
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    /// Total scalar dimension (svec entries of PSD blocks + vector vars).
    pub fn total_dim(&self) -> usize {
        self.psd_blocks.iter().map(|&s| s * (s + 1) / 2).sum::<usize>()
            + self.nonneg_dim
            + self.free_dim
    }

    pub fn validate(&self, cfg: &SolverConfig) -> Result<(), SolverError> {
        for &s in &self.psd_blocks {
            if s == 0 {
                return Err(SolverError::Validation("empty PSD block".into()));
            }
            if s > cfg.max_psd_block {
                return Err(SolverError::Capacity(format!(
                    "PSD block of size {s} exceeds limit {}",
                    cfg.max_psd_block
                )));
            }
        }
        if self.total_dim() > cfg.max_total_dim {
            return Err(SolverError::Capacity(format!(
                "total dimension {} exceeds limit {}",
                self.total_dim(),
                cfg.max_total_dim
            )));
        }
        if self.num_rows() > cfg.max_rows {
            return Err(SolverError::Capacity(format!(
                "{} equality rows exceed limit {}",
                self.num_rows(),
                cfg.max_rows
            )));
        }
        if self.num_rows() == 0 {
            return Err(SolverError::Validation(
                "program must have at least one equality row".into(),
            ));
        }
        let cone_dim = self.total_dim() - self.free_dim;
        if cone_dim == 0 {
            return Err(SolverError::Validation(
                "program must have at least one conic (PSD or nonnegative) variable".into(),
            ));
        }
        let check_expr = |what: &str, e: &LinExpr| -> Result<(), SolverError> {
            if e.psd.len() != self.psd_blocks.len() {
                return Err(SolverError::Validation(format!(
                    "{what}: functional shaped for {} PSD blocks, program has {}",
                    e.psd.len(),
                    self.psd_blocks.len()
                )));
            }
            for (blk, entries) in e.psd.iter().enumerate() {
                for &(i, j, _) in entries {
                    if i >= self.psd_blocks[blk] || j >= self.psd_blocks[blk] {
                        return Err(SolverError::Validation(format!(
                            "{what}: PSD index ({i},{j}) out of range for block {blk}"
                        )));
                    }
                }
            }
            for &(i, _) in &e.nonneg {
                if i >= self.nonneg_dim {
                    return Err(SolverError::Validation(format!(
                        "{what}: nonnegative index {i} out of range"
                    )));
                }
            }
            for &(i, _) in &e.free {
                if i >= self.free_dim {
                    return Err(SolverError::Validation(format!(
                        "{what}: free index {i} out of range"
                    )));
                }
            }
            if !e.max_entry_finite() {
                return Err(SolverError::Validation(format!(
                    "{what}: non-finite coefficient"
                )));
            }
            Ok(())
        };
        for (idx, (e, rhs)) in self.equalities.iter().enumerate() {
            check_expr(&format!("equality {idx}"), e)?;
            if !rhs.is_finite() {
                return Err(SolverError::Validation(format!(
                    "equality {idx}: non-finite right-hand side"
                )));
            }
        }
        check_expr("objective", &self.objective)?;
        Ok(())
    }

    /// Plain-text dump of the program: a header with block sizes, one line
    /// per equality entry (`row block i j value`), `rhs` lines, and
    /// objective entries prefixed with `obj`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("conic-program v1\n");
        out.push_str("psd");
        for &s in &self.psd_blocks {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        let _ = writeln!(out, "nonneg {}", self.nonneg_dim);
        let _ = writeln!(out, "free {}", self.free_dim);
        let _ = writeln!(out, "rows {}", self.num_rows());
        let dump_expr = |out: &mut String, prefix: &str, e: &LinExpr| {
            for (blk, entries) in e.psd.iter().enumerate() {
                for &(i, j, v) in entries {
                    let _ = writeln!(out, "{prefix} p{blk} {i} {j} {v:.17e}");
                }
            }
            for &(i, v) in &e.nonneg {
                let _ = writeln!(out, "{prefix} n {i} 0 {v:.17e}");
            }
            for &(i, v) in &e.free {
                let _ = writeln!(out, "{prefix} f {i} 0 {v:.17e}");
            }
        };
        for (row, (e, rhs)) in self.equalities.iter().enumerate() {
            dump_expr(&mut out, &row.to_string(), e);
            let _ = writeln!(out, "rhs {row} {rhs:.17e}");
        }
        dump_expr(&mut out, "obj", &self.objective);
        out
    }

    /// Presolve, then run the interior-point iteration.
    pub fn solve(&self, cfg: &SolverConfig) -> Result<SolveReport, SolverError> {
        self.validate(cfg)?;
        let pre = presolve(self);
        if let Some((status, message)) = pre.early_status {
            return Ok(SolveReport {
                status,
                value: None,
                variables: None,
                residuals: Residuals {
                    primal: f64::INFINITY,
                    dual: f64::INFINITY,
                    gap: f64::INFINITY,
                },
                iterations: 0,
                improving_ray: None,
                infeasibility_certificate: None,
                message,
            });
        }
        let mut report = ipm::run(&pre.program, cfg);
        // Map the Farkas certificate back to original row indices.
        if let Some(y) = report.infeasibility_certificate.take() {
            let mut orig = vec![0.0; self.num_rows()];
            for (k, &row) in pre.kept_rows.iter().enumerate() {
                orig[row] = y[k] * pre.row_scale[k];
            }
            report.infeasibility_certificate = Some(orig);
        }
        Ok(report)
    }
}

/// Result of presolve: cleaned program plus the row transform.
pub struct Presolved {
    pub program: ConicProgram,
    /// Original index of each kept row.
    pub kept_rows: Vec<usize>,
    /// Factor by which each kept row was multiplied (rows are scaled to
    /// unit norm, possibly sign-flipped).
    pub row_scale: Vec<f64>,
    /// Set when a trivial contradiction makes the program infeasible.
    pub early_status: Option<(SolveStatus, String)>,
}

/// Remove zero and duplicate equality rows, scale the rest to unit norm,
/// and detect trivially contradictory pairs.
pub fn presolve(prog: &ConicProgram) -> Presolved {
    let mut cleaned = ConicProgram::new(
        prog.psd_blocks.clone(),
        prog.nonneg_dim,
        prog.free_dim,
    );
    cleaned.set_objective(prog.objective.clone());
    let mut kept_rows = Vec::new();
    let mut row_scale = Vec::new();
    let mut early_status = None;

    'rows: for (idx, (expr, rhs)) in prog.equalities.iter().enumerate() {
        let norm = expr.norm();
        if norm <= 1e-14 {
            if rhs.abs() > 1e-12 {
                early_status = Some((
                    SolveStatus::PrimalInfeasible,
                    format!("presolve: zero row {idx} with nonzero right-hand side {rhs}"),
                ));
                break;
            }
            continue; // redundant 0 = 0 row
        }
        let mut scaled = expr.clone();
        let mut factor = 1.0 / norm;
        scaled.scale(factor);
        // Canonical sign: first nonzero coefficient positive.
        if leading_coefficient(&scaled) < 0.0 {
            scaled.scale(-1.0);
            factor = -factor;
        }
        let scaled_rhs = rhs * factor;
        for (k, (kept, kept_rhs)) in cleaned.equalities.iter().enumerate() {
            if exprs_equal(kept, &scaled, 1e-12) {
                if (kept_rhs - scaled_rhs).abs() <= 1e-9 * (1.0 + kept_rhs.abs()) {
                    continue 'rows; // duplicate row, drop
                }
                early_status = Some((
                    SolveStatus::PrimalInfeasible,
                    format!(
                        "presolve: rows {} and {idx} have identical coefficients but \
                         contradictory right-hand sides",
                        kept_rows[k]
                    ),
                ));
                break 'rows;
            }
        }
        cleaned.equalities.push((scaled, scaled_rhs));
        kept_rows.push(idx);
        row_scale.push(factor);
    }

    Presolved {
        program: cleaned,
        kept_rows,
        row_scale,
        early_status,
    }
}

fn leading_coefficient(e: &LinExpr) -> f64 {
    for entries in &e.psd {
        if let Some(&(_, _, v)) = entries.first() {
            return v;
        }
    }
    if let Some(&(_, v)) = e.nonneg.first() {
        return v;
    }
    if let Some(&(_, v)) = e.free.first() {
        return v;
    }
    0.0
}

fn exprs_equal(a: &LinExpr, b: &LinExpr, tol: f64) -> bool {
    if a.psd.len() != b.psd.len()
        || a.nonneg.len() != b.nonneg.len()
        || a.free.len() != b.free.len()
    {
        return false;
    }
    for (ea, eb) in a.psd.iter().zip(&b.psd) {
        if ea.len() != eb.len() {
            return false;
        }
        for (&(i, j, va), &(k, l, vb)) in ea.iter().zip(eb) {
            if i != k || j != l || (va - vb).abs() > tol {
                return false;
            }
        }
    }
    for (&(i, va), &(j, vb)) in a.nonneg.iter().zip(&b.nonneg) {
        if i != j || (va - vb).abs() > tol {
            return false;
        }
    }
    for (&(i, va), &(j, vb)) in a.free.iter().zip(&b.free) {
        if i != j || (va - vb).abs() > tol {
            return false;
        }
    }
    true
}
