//! Independent primal verification.
//!
//! Ground-truth values for minimax and rational minimax problems are
//! computed without touching the conic interior-point machinery: a dense
//! two-phase tableau simplex with Bland's rule solves the master linear
//! programs of a Kelley cutting-plane loop over a bounding box. Gradient
//! cuts are global under-estimators for convex data, so every master
//! optimum is a certified lower bound while every feasible evaluation is
//! an upper bound; the loop stops when the two meet. Ratio objectives are
//! handled by Dinkelbach iteration, which reduces them to a short
//! sequence of parametric minimax subproblems. A Newton step polishes
//! smooth interior optima, and in dimension at most two a grid scan
//! cross-checks the answer.
//!
//! The search box is a computational device, not part of the problem:
//! when the minimizer presses against it the box is enlarged and the
//! solve repeated, and a persistent boundary flag signals an infimum
//! that escapes every bounded region (approached but never attained, or
//! unbounded below). Supplying an explicit box instead makes it part of
//! the feasible set and disables expansion.

use crate::dual::{MinimaxProblem, RationalMinimaxProblem};
use crate::poly::{PolyError, Polynomial};
use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("precondition not satisfied: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

// ---------------------------------------------------------------------------
// Dense two-phase tableau simplex.
// ---------------------------------------------------------------------------

const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Outcome of a linear program handed to the tableau simplex.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Minimize `c·v` subject to `rows[k]·v ≤ rhs[k]` with `v` free.
///
/// Free variables are split into positive and negative parts and every
/// inequality receives a slack; rows with negative right-hand side get a
/// phase-one artificial. Bland's rule guarantees termination under
/// degeneracy. The implementation is deliberately independent of the
/// conic interior-point solver so the two can cross-check each other.
pub fn solve_lp_inequalities(
    c: &[f64],
    rows: &[Vec<f64>],
    rhs: &[f64],
) -> Result<LpOutcome, OracleError> {
    let n = c.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(OracleError::Validation(
            "inconsistent linear program dimensions".into(),
        ));
    }
    let ncols = 2 * n + m;
    let mut a = Vec::with_capacity(m);
    let mut b = rhs.to_vec();
    let mut init_basic = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let mut r = vec![0.0; ncols];
        for j in 0..n {
            r[j] = row[j];
            r[n + j] = -row[j];
        }
        r[2 * n + i] = 1.0;
        if b[i] < 0.0 {
            for v in &mut r {
                *v = -*v;
            }
            b[i] = -b[i];
            init_basic.push(None); // slack coefficient flipped to −1
        } else {
            init_basic.push(Some(2 * n + i));
        }
        a.push(r);
    }
    let mut cost = vec![0.0; ncols];
    for j in 0..n {
        cost[j] = c[j];
        cost[n + j] = -c[j];
    }
    match two_phase(&a, &b, &cost, &init_basic)? {
        RawLp::Infeasible => Ok(LpOutcome::Infeasible),
        RawLp::Unbounded => Ok(LpOutcome::Unbounded),
        RawLp::Optimal(z) => {
            let x: Vec<f64> = (0..n).map(|j| z[j] - z[n + j]).collect();
            let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
            Ok(LpOutcome::Optimal { x, value })
        }
    }
}

enum RawLp {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

fn pivot(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    costs: &mut [Vec<f64>],
    basis: &mut [usize],
    r: usize,
    e: usize,
) {
    let mut prow = std::mem::take(&mut a[r]);
    let inv = 1.0 / prow[e];
    for v in prow.iter_mut() {
        *v *= inv;
    }
    prow[e] = 1.0;
    b[r] *= inv;
    let pb = b[r];
    for (i, row) in a.iter_mut().enumerate() {
        if row.is_empty() {
            continue; // the pivot row itself
        }
        let f = row[e];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * *pv;
            }
            row[e] = 0.0;
            b[i] -= f * pb;
        }
    }
    for crow in costs.iter_mut() {
        let f = crow[e];
        if f != 0.0 {
            for (v, pv) in crow.iter_mut().zip(&prow) {
                *v -= f * *pv;
            }
            crow[e] = 0.0;
        }
    }
    a[r] = prow;
    basis[r] = e;
}

/// Run Bland-rule pivots pricing `costs[price]`; entering columns are
/// restricted to the structural range `0..allowed` (artificials may leave
/// the basis but never re-enter).
fn run_phase(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    costs: &mut [Vec<f64>],
    basis: &mut [usize],
    price: usize,
    allowed: usize,
    pivots: &mut usize,
) -> Result<PhaseEnd, OracleError> {
    loop {
        let enter = costs[price][..allowed]
            .iter()
            .position(|&c| c < -PIVOT_TOL);
        let Some(e) = enter else {
            return Ok(PhaseEnd::Optimal);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..a.len() {
            let aie = a[i][e];
            if aie > PIVOT_TOL {
                let ratio = b[i].max(0.0) / aie;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(PhaseEnd::Unbounded);
        };
        pivot(a, b, costs, basis, r, e);
        *pivots += 1;
        if *pivots > MAX_PIVOTS {
            return Err(OracleError::Numerical(
                "simplex exceeded its pivot budget".into(),
            ));
        }
    }
}

/// Standard-form two-phase simplex. `init_basic[i]` names a column of
/// `a0` usable as the initial basic variable of row `i` (its cost must be
/// zero); rows without one receive an artificial.
fn two_phase(
    a0: &[Vec<f64>],
    b0: &[f64],
    cost0: &[f64],
    init_basic: &[Option<usize>],
) -> Result<RawLp, OracleError> {
    let m = a0.len();
    let n0 = cost0.len();
    let nart = init_basic.iter().filter(|s| s.is_none()).count();
    let ncols = n0 + nart;
    let mut a: Vec<Vec<f64>> = a0
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.resize(ncols, 0.0);
            r
        })
        .collect();
    let mut b = b0.to_vec();
    let mut basis = vec![0usize; m];
    let mut next_art = n0;
    for i in 0..m {
        match init_basic[i] {
            Some(j) => basis[i] = j,
            None => {
                a[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    // Phase-one reduced costs: artificials cost one each, and eliminating
    // the basic artificial columns subtracts their rows.
    let mut c1 = vec![0.0; ncols];
    for v in c1.iter_mut().skip(n0) {
        *v = 1.0;
    }
    for i in 0..m {
        if basis[i] >= n0 {
            for j in 0..ncols {
                c1[j] -= a[i][j];
            }
        }
    }
    let mut c2 = cost0.to_vec();
    c2.resize(ncols, 0.0);
    let mut costs = vec![c1, c2];
    let mut pivots = 0usize;
    if nart > 0 {
        match run_phase(&mut a, &mut b, &mut costs, &mut basis, 0, n0, &mut pivots)? {
            PhaseEnd::Unbounded => {
                // The phase-one objective is bounded below by zero.
                return Err(OracleError::Numerical(
                    "phase one reported an unbounded direction".into(),
                ));
            }
            PhaseEnd::Optimal => {}
        }
        let bnorm = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let z1: f64 = (0..m)
            .filter(|&i| basis[i] >= n0)
            .map(|i| b[i].max(0.0))
            .sum();
        if z1 > 1e-7 * (1.0 + bnorm) {
            return Ok(RawLp::Infeasible);
        }
        // Drive leftover artificials out of the basis where a structural
        // pivot exists; rows without one are redundant and stay inert.
        for r in 0..m {
            if basis[r] >= n0 {
                if let Some(e) = (0..n0).find(|&j| a[r][j].abs() > PIVOT_TOL) {
                    pivot(&mut a, &mut b, &mut costs, &mut basis, r, e);
                }
            }
        }
    }
    match run_phase(&mut a, &mut b, &mut costs, &mut basis, 1, n0, &mut pivots)? {
        PhaseEnd::Unbounded => return Ok(RawLp::Unbounded),
        PhaseEnd::Optimal => {}
    }
    let mut z = vec![0.0; n0];
    for i in 0..m {
        if basis[i] < n0 {
            z[basis[i]] = b[i].max(0.0);
        }
    }
    Ok(RawLp::Optimal(z))
}

// ---------------------------------------------------------------------------
// Oracle options and reports.
// ---------------------------------------------------------------------------

/// Search-region and convergence policy for the oracle.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Half-width of the default search box, centered at the origin.
    pub box_half_width: f64,
    /// Explicit per-coordinate bounds; when set, the box is part of the
    /// problem and is never expanded.
    pub box_override: Option<Vec<(f64, f64)>>,
    /// How many times a soft box may be enlarged (×4 per step) when the
    /// minimizer lands on its boundary.
    pub max_expansions: u32,
    /// Relative upper/lower-bound gap at which the cutting-plane loop
    /// stops.
    pub cp_tol: f64,
    /// Iteration cap per cutting-plane solve.
    pub max_iters: usize,
    /// Cut budget per master variable; the loosest cuts are dropped once
    /// the budget is exceeded.
    pub cut_cap_factor: usize,
    /// Relative tolerance for membership in the active set.
    pub active_tol: f64,
    /// Cross-check the cutting-plane answer on a grid when `dim ≤ 2`.
    pub grid_check: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            box_half_width: 10.0,
            box_override: None,
            max_expansions: 3,
            cp_tol: 1e-6,
            max_iters: 300,
            cut_cap_factor: 40,
            active_tol: 1e-6,
            grid_check: true,
        }
    }
}

/// Result of one oracle run on a feasible problem.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Best established objective value (an upper bound on the infimum
    /// over the final search region).
    pub value: f64,
    pub minimizer: Vec<f64>,
    /// Objectives attaining the value at the minimizer, within the active
    /// tolerance; ascending indices.
    pub active_set: Vec<usize>,
    /// Positive part of the worst constraint value at the minimizer.
    pub feasibility_residual: f64,
    /// True when the minimizer still presses against the search box after
    /// all permitted expansions: the infimum escapes every bounded region
    /// (approached but not attained, or unbounded below).
    pub boundary_flag: bool,
    /// Certified lower bound on the boxed problem (for ratio problems see
    /// [`solve_fractional_primal`]).
    pub lower_bound: f64,
    pub converged: bool,
    /// Total cutting-plane iterations across expansions.
    pub iterations: usize,
}

/// Evidence that no point of the search region satisfies the constraints.
#[derive(Debug, Clone)]
pub struct InfeasibilityReport {
    /// Minimum over the search box of the worst constraint value
    /// (positive whenever this report is produced).
    pub min_violation: f64,
    /// Point attaining that minimum.
    pub witness: Vec<f64>,
}

/// Feasibility verdict and solution from the oracle.
#[derive(Debug, Clone)]
pub enum PrimalReport {
    Solved(OracleResult),
    Infeasible(InfeasibilityReport),
}

impl PrimalReport {
    pub fn solved(&self) -> Option<&OracleResult> {
        match self {
            PrimalReport::Solved(r) => Some(r),
            PrimalReport::Infeasible(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Box handling.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    fn expand(&self) -> BoxRegion {
        let lo = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h) - 2.0 * (h - l))
            .collect();
        let hi = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h) + 2.0 * (h - l))
            .collect();
        BoxRegion { lo, hi }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (l, h))| *xi >= *l && *xi <= *h)
    }

    fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(xi, (l, h))| xi.max(*l).min(*h))
            .collect()
    }

    fn on_boundary(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .any(|(xi, (l, h))| {
                let tol = 1e-6 * (1.0 + (h - l).abs());
                (xi - l).abs() <= tol || (h - xi).abs() <= tol
            })
    }
}

fn initial_box(n: usize, opts: &OracleOptions) -> Result<(BoxRegion, bool), OracleError> {
    match &opts.box_override {
        Some(bounds) => {
            if bounds.len() != n {
                return Err(OracleError::Validation(format!(
                    "box has {} coordinate ranges, problem has dimension {n}",
                    bounds.len()
                )));
            }
            if bounds.iter().any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
                return Err(OracleError::Validation(
                    "box bounds must be finite with lo < hi".into(),
                ));
            }
            let lo = bounds.iter().map(|(l, _)| *l).collect();
            let hi = bounds.iter().map(|(_, h)| *h).collect();
            Ok((BoxRegion { lo, hi }, true))
        }
        None => {
            let w = opts.box_half_width;
            if !(w.is_finite() && w > 0.0) {
                return Err(OracleError::Validation(
                    "box half-width must be positive and finite".into(),
                ));
            }
            Ok((
                BoxRegion {
                    lo: vec![-w; n],
                    hi: vec![w; n],
                },
                false,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Kelley cutting-plane core.
// ---------------------------------------------------------------------------

fn eval_max(polys: &[Polynomial], x: &[f64]) -> Result<f64, OracleError> {
    let mut m = f64::NEG_INFINITY;
    for p in polys {
        m = m.max(p.eval(x)?);
    }
    Ok(m)
}

fn active_indices(
    polys: &[Polynomial],
    x: &[f64],
    tol: f64,
) -> Result<Vec<usize>, OracleError> {
    let vals: Vec<f64> = polys
        .iter()
        .map(|p| p.eval(x))
        .collect::<Result<_, _>>()?;
    let mx = vals.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
    let band = tol * (1.0 + mx.abs());
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= mx - band)
        .map(|(i, _)| i)
        .collect())
}

struct KelleyOut {
    x: Vec<f64>,
    value: f64,
    lower: f64,
    iterations: usize,
    converged: bool,
    has_incumbent: bool,
}

/// Minimize `max_j objectives_j(x)` subject to `constraints ≤ 0` and
/// `x ∈ boxr` by cutting planes. Gradient cuts are exact outer
/// approximations for convex data, so `lower` is a certified bound on the
/// boxed problem no matter how cuts are pruned.
fn kelley_minimax(
    objectives: &[Polynomial],
    constraints: &[Polynomial],
    boxr: &BoxRegion,
    start: &[f64],
    opts: &OracleOptions,
) -> Result<KelleyOut, OracleError> {
    let n = boxr.lo.len();
    let obj_grads: Vec<Vec<Polynomial>> =
        objectives.iter().map(|p| p.gradient()).collect();
    let con_grads: Vec<Vec<Polynomial>> =
        constraints.iter().map(|g| g.gradient()).collect();
    let nv = n + 1; // master variables (x, t)
    let cap = opts.cut_cap_factor.max(4) * nv;

    // Fixed master rows: the box.
    let mut fixed_rows: Vec<Vec<f64>> = Vec::with_capacity(2 * n);
    let mut fixed_rhs: Vec<f64> = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut up = vec![0.0; nv];
        up[i] = 1.0;
        fixed_rows.push(up);
        fixed_rhs.push(boxr.hi[i]);
        let mut dn = vec![0.0; nv];
        dn[i] = -1.0;
        fixed_rows.push(dn);
        fixed_rhs.push(-boxr.lo[i]);
    }
    let mut c_master = vec![0.0; nv];
    c_master[n] = 1.0;

    let mut cuts: Vec<(Vec<f64>, f64)> = Vec::new();
    let add_cuts = |cuts: &mut Vec<(Vec<f64>, f64)>, y: &[f64]| -> Result<(), OracleError> {
        for (p, grads) in objectives.iter().zip(&obj_grads) {
            let gy: Vec<f64> = grads.iter().map(|g| g.eval(y)).collect::<Result<_, _>>()?;
            let py = p.eval(y)?;
            let rhs = gy.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - py;
            let mut row = gy;
            row.push(-1.0);
            push_normalized(cuts, row, rhs);
        }
        for (g, grads) in constraints.iter().zip(&con_grads) {
            let gy: Vec<f64> = grads.iter().map(|gr| gr.eval(y)).collect::<Result<_, _>>()?;
            let gv = g.eval(y)?;
            let rhs = gy.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - gv;
            let mut row = gy;
            row.push(0.0);
            push_normalized(cuts, row, rhs);
        }
        Ok(())
    };

    let start = boxr.clamp(start);
    add_cuts(&mut cuts, &start)?;

    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let start_phi = eval_max(objectives, &start)?;
    let start_viol = eval_max(constraints, &start)?.max(0.0);
    let mut best_any: (Vec<f64>, f64, f64) = (start.clone(), start_phi, start_viol);
    let mut best_gap = f64::INFINITY;
    let mut no_progress = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 0..opts.max_iters {
        iterations = iter + 1;
        let mut rows = fixed_rows.clone();
        let mut rhs = fixed_rhs.clone();
        for (r, h) in &cuts {
            rows.push(r.clone());
            rhs.push(*h);
        }
        let sol = match solve_lp_inequalities(&c_master, &rows, &rhs)? {
            LpOutcome::Optimal { x, value } => (x, value),
            LpOutcome::Infeasible => {
                return Err(OracleError::Numerical(
                    "cutting-plane master program infeasible".into(),
                ))
            }
            LpOutcome::Unbounded => {
                return Err(OracleError::Numerical(
                    "cutting-plane master program unbounded".into(),
                ))
            }
        };
        let (v, tval) = sol;
        let xk: Vec<f64> = v[..n].to_vec();
        lb = lb.max(tval);
        let phi = eval_max(objectives, &xk)?;
        let maxg = eval_max(constraints, &xk)?;
        if maxg <= 1e-8 && phi < ub {
            ub = phi;
            incumbent = Some((xk.clone(), phi));
        }
        if maxg.max(0.0) < best_any.2 - 1e-12
            || (maxg.max(0.0) <= best_any.2 + 1e-12 && phi < best_any.1)
        {
            best_any = (xk.clone(), phi, maxg.max(0.0));
        }
        let gap = ub - lb;
        if ub.is_finite() && gap <= opts.cp_tol * (1.0 + ub.abs()) {
            converged = true;
            break;
        }
        if gap < best_gap - 1e-14 * (1.0 + ub.abs().min(1e300)) {
            best_gap = gap;
            no_progress = 0;
        } else {
            no_progress += 1;
            if no_progress > 60 {
                break;
            }
        }
        add_cuts(&mut cuts, &xk)?;
        if cuts.len() > cap {
            // Keep the cuts that are tightest at the current master
            // optimum; dropping any subset keeps the relaxation valid.
            let mut order: Vec<(f64, usize)> = cuts
                .iter()
                .enumerate()
                .map(|(k, (row, h))| {
                    let slack = h - row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
                    (slack, k)
                })
                .collect();
            order.sort_by(|a, b| a.partial_cmp(b).expect("finite slacks"));
            let mut keep: Vec<usize> = order[..cap].iter().map(|(_, k)| *k).collect();
            keep.sort_unstable();
            cuts = keep.into_iter().map(|k| cuts[k].clone()).collect();
        }
    }

    let (x, value, has_incumbent) = match incumbent {
        Some((x, value)) => (x, value, true),
        None => (best_any.0.clone(), best_any.1, false),
    };
    Ok(KelleyOut {
        x,
        value,
        lower: lb,
        iterations,
        converged: converged && has_incumbent,
        has_incumbent,
    })
}

/// Scale an inequality row to unit max-coefficient so cut magnitudes stay
/// comparable regardless of where on the box they were generated.
fn push_normalized(cuts: &mut Vec<(Vec<f64>, f64)>, row: Vec<f64>, rhs: f64) {
    let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale > 0.0 && scale.is_finite() {
        let inv = 1.0 / scale;
        cuts.push((row.iter().map(|v| v * inv).collect(), rhs * inv));
    }
}

// ---------------------------------------------------------------------------
// Newton polish and grid cross-check.
// ---------------------------------------------------------------------------

/// Refine a smooth interior optimum: when a single objective is active,
/// damped Newton steps on that objective converge far past cutting-plane
/// accuracy. Steps must stay in the box and strictly feasible.
fn newton_polish(
    objective: &Polynomial,
    constraints: &[Polynomial],
    boxr: &BoxRegion,
    x0: &[f64],
    f0: f64,
) -> Option<(Vec<f64>, f64)> {
    let n = x0.len();
    let grad = objective.gradient();
    let hess = objective.hessian();
    let mut x = x0.to_vec();
    let mut fx = f0;
    'outer: for _ in 0..30 {
        let g: Vec<f64> = grad
            .iter()
            .map(|gi| gi.eval(&x).ok())
            .collect::<Option<_>>()?;
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= 1e-13 * (1.0 + fx.abs()) {
            break;
        }
        let h = hess.eval(&x).ok()?;
        let mut hm = DMatrix::from_row_slice(n, n, &h);
        for i in 0..n {
            hm[(i, i)] += 1e-12 + 1e-10 * gnorm;
        }
        let Some(chol) = Cholesky::new(hm) else {
            break;
        };
        let dir = -chol.solve(&DVector::from_column_slice(&g));
        let mut alpha = 1.0f64;
        for _ in 0..40 {
            let xn: Vec<f64> = x
                .iter()
                .zip(dir.iter())
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            if boxr.contains(&xn) {
                let feas = constraints
                    .iter()
                    .map(|gc| gc.eval(&xn).ok())
                    .collect::<Option<Vec<_>>>()?
                    .into_iter()
                    .all(|v| v <= -1e-12);
                if feas || constraints.is_empty() {
                    if let Ok(fnew) = objective.eval(&xn) {
                        if fnew < fx {
                            x = xn;
                            fx = fnew;
                            continue 'outer;
                        }
                    }
                }
            }
            alpha *= 0.5;
        }
        break; // no acceptable step found
    }
    (fx < f0).then_some((x, fx))
}

/// Exhaustive feasible-grid minimum of `max_j objectives_j`; `None` when
/// no grid point is feasible. Used as an independent cross-check in low
/// dimension.
fn grid_scan(
    objectives: &[Polynomial],
    constraints: &[Polynomial],
    boxr: &BoxRegion,
) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
    let n = boxr.lo.len();
    let per_axis = match n {
        1 => 513,
        2 => 65,
        _ => return Ok(None),
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = idx[i] as f64 / (per_axis - 1) as f64;
                boxr.lo[i] + t * (boxr.hi[i] - boxr.lo[i])
            })
            .collect();
        if eval_max(constraints, &x)? <= 1e-9 {
            let phi = eval_max(objectives, &x)?;
            if best.as_ref().is_none_or(|(_, b)| phi < *b) {
                best = Some((x, phi));
            }
        }
        // Odometer increment.
        let mut carry = 0;
        while carry < n {
            idx[carry] += 1;
            if idx[carry] < per_axis {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == n {
            break;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Public oracle entry points.
// ---------------------------------------------------------------------------

enum FeasStart {
    Point(Vec<f64>),
    Infeasible {
        value: f64,
        witness: Vec<f64>,
        on_boundary: bool,
    },
}

fn feasible_start(
    constraints: &[Polynomial],
    boxr: &BoxRegion,
    opts: &OracleOptions,
) -> Result<FeasStart, OracleError> {
    let center = boxr.center();
    if constraints.is_empty() {
        return Ok(FeasStart::Point(center));
    }
    if eval_max(constraints, &center)? <= -1e-9 {
        return Ok(FeasStart::Point(center));
    }
    let out = kelley_minimax(constraints, &[], boxr, &center, opts)?;
    if out.value <= 1e-8 {
        Ok(FeasStart::Point(out.x))
    } else {
        Ok(FeasStart::Infeasible {
            on_boundary: boxr.on_boundary(&out.x),
            value: out.value,
            witness: out.x,
        })
    }
}

/// Search for a point where every constraint is strictly negative.
pub fn find_slater_point(
    dim: usize,
    constraints: &[Polynomial],
    opts: &OracleOptions,
) -> Result<Option<Vec<f64>>, OracleError> {
    for g in constraints {
        if g.dim() != dim {
            return Err(OracleError::Validation(format!(
                "constraint dimension {} does not match problem dimension {dim}",
                g.dim()
            )));
        }
    }
    let (mut boxr, hard) = initial_box(dim, opts)?;
    if constraints.is_empty() {
        return Ok(Some(boxr.center()));
    }
    let mut expansions = 0;
    loop {
        let out = kelley_minimax(constraints, &[], &boxr, &boxr.center(), opts)?;
        if out.value <= -1e-6 {
            return Ok(Some(out.x));
        }
        if !hard && boxr.on_boundary(&out.x) && expansions < opts.max_expansions {
            boxr = boxr.expand();
            expansions += 1;
            continue;
        }
        return Ok(None);
    }
}

/// Independently minimize `max_j p_j(x)` over `{g ≤ 0}` (intersected with
/// the search box) by cutting planes, with Newton polish and a grid
/// cross-check.
pub fn solve_primal(
    problem: &MinimaxProblem,
    opts: &OracleOptions,
) -> Result<PrimalReport, OracleError> {
    problem
        .validate()
        .map_err(|e| OracleError::Validation(e.to_string()))?;
    let n = problem.dim;
    let (mut boxr, hard) = initial_box(n, opts)?;
    let mut expansions = 0u32;
    let mut start = loop {
        match feasible_start(&problem.constraints, &boxr, opts)? {
            FeasStart::Point(x) => break x,
            FeasStart::Infeasible {
                value,
                witness,
                on_boundary,
            } => {
                if !hard && on_boundary && expansions < opts.max_expansions {
                    boxr = boxr.expand();
                    expansions += 1;
                    continue;
                }
                return Ok(PrimalReport::Infeasible(InfeasibilityReport {
                    min_violation: value,
                    witness,
                }));
            }
        }
    };
    let mut total_iters = 0usize;
    loop {
        let out = kelley_minimax(
            &problem.objectives,
            &problem.constraints,
            &boxr,
            &start,
            opts,
        )?;
        total_iters += out.iterations;
        let mut x = out.x.clone();
        let mut value = out.value;

        // Newton polish when exactly one objective is active at a point
        // strictly inside the box and strictly feasible.
        if out.has_incumbent {
            let active = active_indices(&problem.objectives, &x, opts.active_tol)?;
            let strict_feas = eval_max(&problem.constraints, &x)? < -opts.active_tol;
            let interior = !boxr.on_boundary(&x);
            if active.len() == 1
                && interior
                && (problem.constraints.is_empty() || strict_feas)
            {
                if let Some((px, _)) = newton_polish(
                    &problem.objectives[active[0]],
                    &problem.constraints,
                    &boxr,
                    &x,
                    value,
                ) {
                    // Accept on the true minimax objective, not just the
                    // polished piece.
                    let phi = eval_max(&problem.objectives, &px)?;
                    if phi < value && eval_max(&problem.constraints, &px)? <= 1e-8 {
                        x = px;
                        value = phi;
                    }
                }
            }
        }

        if opts.grid_check {
            if let Some((gx, gv)) =
                grid_scan(&problem.objectives, &problem.constraints, &boxr)?
            {
                if gv < value - 1e-9 * (1.0 + value.abs()) {
                    x = gx;
                    value = gv;
                }
            }
        }

        let on_b = boxr.on_boundary(&x);
        if on_b && !hard && expansions < opts.max_expansions {
            expansions += 1;
            boxr = boxr.expand();
            start = x;
            continue;
        }
        let active_set = active_indices(&problem.objectives, &x, opts.active_tol)?;
        let feasibility_residual = eval_max(&problem.constraints, &x)?.max(0.0);
        return Ok(PrimalReport::Solved(OracleResult {
            value,
            minimizer: x,
            active_set,
            feasibility_residual,
            boundary_flag: on_b,
            lower_bound: out.lower,
            converged: out.converged,
            iterations: total_iters,
        }));
    }
}

/// Independently minimize `max_j p_j(x) / q(x)` over `{g ≤ 0}` by
/// Dinkelbach iteration: starting from the ratio at a feasible point,
/// repeatedly minimize `max_j (p_j − μ q)` and update `μ` to the ratio at
/// the subproblem minimizer. The sequence decreases monotonically to the
/// boxed optimum. Requires `q > 0` at every point it visits.
///
/// The reported `lower_bound` is `μ + v / q_min`, where `v ≤ 0` is the
/// certified subproblem bound and `q_min` a bound on the denominator over
/// the feasible box (computed by cutting planes when `q` is affine, and
/// taken heuristically at the minimizer otherwise).
pub fn solve_fractional_primal(
    problem: &RationalMinimaxProblem,
    opts: &OracleOptions,
) -> Result<PrimalReport, OracleError> {
    problem
        .base
        .validate()
        .map_err(|e| OracleError::Validation(e.to_string()))?;
    let q = &problem.denominator;
    if q.dim() != problem.base.dim {
        return Err(OracleError::Validation(
            "denominator dimension does not match the problem".into(),
        ));
    }
    let n = problem.base.dim;
    let (mut boxr, hard) = initial_box(n, opts)?;
    let mut expansions = 0u32;
    let mut start = loop {
        match feasible_start(&problem.base.constraints, &boxr, opts)? {
            FeasStart::Point(x) => break x,
            FeasStart::Infeasible {
                value,
                witness,
                on_boundary,
            } => {
                if !hard && on_boundary && expansions < opts.max_expansions {
                    boxr = boxr.expand();
                    expansions += 1;
                    continue;
                }
                return Ok(PrimalReport::Infeasible(InfeasibilityReport {
                    min_violation: value,
                    witness,
                }));
            }
        }
    };
    let mut total_iters = 0usize;
    loop {
        let din = dinkelbach(problem, &boxr, &start, opts)?;
        total_iters += din.iterations;
        let mut x = din.x.clone();
        let mut mu = din.mu;

        if opts.grid_check {
            if let Some((gx, gmu)) = ratio_grid_scan(problem, &boxr)? {
                if gmu < mu - 1e-9 * (1.0 + mu.abs()) {
                    x = gx;
                    mu = gmu;
                }
            }
        }

        let on_b = boxr.on_boundary(&x);
        if on_b && !hard && expansions < opts.max_expansions {
            expansions += 1;
            boxr = boxr.expand();
            start = x;
            continue;
        }
        let shifted: Vec<Polynomial> = problem
            .base
            .objectives
            .iter()
            .map(|p| p.sub(&q.scale(mu)))
            .collect();
        let active_set = active_indices(&shifted, &x, opts.active_tol)?;
        let feasibility_residual = eval_max(&problem.base.constraints, &x)?.max(0.0);
        return Ok(PrimalReport::Solved(OracleResult {
            value: mu,
            minimizer: x,
            active_set,
            feasibility_residual,
            boundary_flag: on_b,
            lower_bound: din.lower,
            converged: din.converged,
            iterations: total_iters,
        }));
    }
}

struct Dink {
    mu: f64,
    x: Vec<f64>,
    lower: f64,
    converged: bool,
    iterations: usize,
}

fn dinkelbach(
    problem: &RationalMinimaxProblem,
    boxr: &BoxRegion,
    start: &[f64],
    opts: &OracleOptions,
) -> Result<Dink, OracleError> {
    let q = &problem.denominator;
    let base = &problem.base;
    let qs = q.eval(start)?;
    if qs <= 1e-9 {
        return Err(OracleError::Precondition(format!(
            "denominator is {qs:.3e} at the starting point; it must be positive \
             on the feasible region"
        )));
    }
    let mut mu = eval_max(&base.objectives, start)? / qs;
    let mut x = start.to_vec();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut sub_lower = 0.0f64;
    for _ in 0..60 {
        let shifted: Vec<Polynomial> = base
            .objectives
            .iter()
            .map(|p| p.sub(&q.scale(mu)))
            .collect();
        let out = kelley_minimax(&shifted, &base.constraints, boxr, &x, opts)?;
        iterations += out.iterations;
        if !out.has_incumbent {
            return Err(OracleError::Numerical(
                "cutting-plane loop failed to produce a feasible point".into(),
            ));
        }
        x = out.x;
        sub_lower = out.lower;
        let qx = q.eval(&x)?;
        if qx <= 1e-9 {
            return Err(OracleError::Precondition(format!(
                "denominator is {qx:.3e} at a feasible point; it must be positive \
                 on the feasible region"
            )));
        }
        if out.value >= -opts.cp_tol * (1.0 + mu.abs()) {
            converged = out.converged;
            break;
        }
        let mu_next = eval_max(&base.objectives, &x)? / qx;
        if (mu - mu_next).abs() <= 1e-15 * (1.0 + mu.abs()) {
            converged = out.converged;
            break;
        }
        mu = mu_next;
    }
    // Certified denominator minimum when q is affine (cutting planes are
    // exact for affine data); heuristic at the minimizer otherwise.
    let q_min = if q.degree() <= 1 {
        kelley_minimax(
            std::slice::from_ref(q),
            &base.constraints,
            boxr,
            &x,
            opts,
        )?
        .lower
    } else {
        q.eval(&x)?
    };
    let lower = mu + sub_lower.min(0.0) / q_min.max(1e-9);
    Ok(Dink {
        mu,
        x,
        lower,
        converged,
        iterations,
    })
}

/// Feasible-grid minimum of the ratio objective, skipping points where
/// the denominator is not safely positive.
fn ratio_grid_scan(
    problem: &RationalMinimaxProblem,
    boxr: &BoxRegion,
) -> Result<Option<(Vec<f64>, f64)>, OracleError> {
    let n = boxr.lo.len();
    let per_axis = match n {
        1 => 513,
        2 => 65,
        _ => return Ok(None),
    };
    let base = &problem.base;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = idx[i] as f64 / (per_axis - 1) as f64;
                boxr.lo[i] + t * (boxr.hi[i] - boxr.lo[i])
            })
            .collect();
        if eval_max(&base.constraints, &x)? <= 1e-9 {
            let qx = problem.denominator.eval(&x)?;
            if qx > 1e-9 {
                let ratio = eval_max(&base.objectives, &x)? / qx;
                if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                    best = Some((x, ratio));
                }
            }
        }
        let mut carry = 0;
        while carry < n {
            idx[carry] += 1;
            if idx[carry] < per_axis {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == n {
            break;
        }
    }
    Ok(best)
}
