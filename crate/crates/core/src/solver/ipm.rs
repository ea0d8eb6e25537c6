//! Homogeneous self-dual interior-point iteration.
//!
//! Internally the program is minimized: `min c'x, Ax = b, x ∈ K` with
//! `c = -objective`. The embedding tracks `(y, x, τ, z, κ)` with residuals
//!
//! ```text
//! r_p = A x − b τ
//! r_d = −A'y − z + c τ
//! r_g = b'y − c'x − κ
//! ```
//!
//! and complementarity `x∘z → μe`, `τκ → μ`. At convergence either `τ > 0`
//! (recover `x/τ` optimal) or `κ > 0` (recover a Farkas certificate or an
//! improving ray).
//!
//! Each Newton solve eliminates `Δz`, `Δκ` and the cone part of `Δx` with
//! the Nesterov–Todd scaling, leaving the symmetric quasi-definite system
//!
//! ```text
//! [ A W A' + εI   A_F ] [Δy  ]
//! [ A_F'          0   ] [Δx_F]
//! ```
//!
//! which is solved twice per direction (constant and Δτ columns) through a
//! Cholesky factorization of the Schur complement with iterative refinement.

use super::{BlockPoint, ConicProgram, Residuals, SolveReport, SolveStatus, SolverConfig};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// Row coefficients expanded for fast kernels.
struct Pre {
    m: usize,
    psd_sizes: Vec<usize>,
    nn: usize,
    nf: usize,
    /// Per row, per PSD block: symmetric coefficient entries expanded to
    /// ordered pairs, i.e. both `(i,j)` and `(j,i)` for off-diagonals.
    rows_psd_full: Vec<Vec<Vec<(usize, usize, f64)>>>,
    /// Per row: dense nonnegative-block coefficients.
    rows_nn: Vec<DVector<f64>>,
    /// m × f free-block coefficient matrix.
    af: DMatrix<f64>,
    b: DVector<f64>,
    /// Min-form objective `c = -objective`, dense.
    c: BlockPoint,
    b_norm: f64,
    c_norm: f64,
}

impl Pre {
    fn build(prog: &ConicProgram) -> Pre {
        let m = prog.num_rows();
        let psd_sizes = prog.psd_blocks.clone();
        let nn = prog.nonneg_dim;
        let nf = prog.free_dim;
        let mut rows_psd_full = Vec::with_capacity(m);
        let mut rows_nn = Vec::with_capacity(m);
        let mut af = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for r in 0..m {
            let (expr, rhs) = prog.equality(r);
            b[r] = rhs;
            let mut blocks = Vec::with_capacity(psd_sizes.len());
            for entries in &expr.psd {
                let mut full = Vec::with_capacity(2 * entries.len());
                for &(i, j, v) in entries {
                    full.push((i, j, v));
                    if i != j {
                        full.push((j, i, v));
                    }
                }
                blocks.push(full);
            }
            rows_psd_full.push(blocks);
            let mut dense_nn = DVector::zeros(nn);
            for &(i, v) in &expr.nonneg {
                dense_nn[i] = v;
            }
            rows_nn.push(dense_nn);
            for &(i, v) in &expr.free {
                af[(r, i)] = v;
            }
        }
        let mut c = BlockPoint::zeros(&psd_sizes, nn, nf);
        let obj = prog.objective();
        for (blk, entries) in obj.psd.iter().enumerate() {
            for &(i, j, v) in entries {
                c.psd[blk][(i, j)] = -v;
                c.psd[blk][(j, i)] = -v;
            }
        }
        for &(i, v) in &obj.nonneg {
            c.nonneg[i] = -v;
        }
        for &(i, v) in &obj.free {
            c.free[i] = -v;
        }
        let b_norm = b.norm();
        let c_norm = c.norm();
        Pre {
            m,
            psd_sizes,
            nn,
            nf,
            rows_psd_full,
            rows_nn,
            af,
            b,
            c,
            b_norm,
            c_norm,
        }
    }

    /// `⟨A_r, x⟩` over all blocks.
    fn row_dot(&self, r: usize, x: &BlockPoint) -> f64 {
        let mut acc = 0.0;
        for (blk, full) in self.rows_psd_full[r].iter().enumerate() {
            let xm = &x.psd[blk];
            for &(p, q, v) in full {
                acc += v * xm[(p, q)];
            }
        }
        acc += self.rows_nn[r].dot(&x.nonneg);
        for i in 0..self.nf {
            acc += self.af[(r, i)] * x.free[i];
        }
        acc
    }

    fn apply_a(&self, x: &BlockPoint) -> DVector<f64> {
        DVector::from_iterator(self.m, (0..self.m).map(|r| self.row_dot(r, x)))
    }

    /// `Σ_r y_r A_r` as a dense block point (including the free block).
    fn apply_at(&self, y: &DVector<f64>) -> BlockPoint {
        let mut out = BlockPoint::zeros(&self.psd_sizes, self.nn, self.nf);
        for r in 0..self.m {
            let yr = y[r];
            if yr == 0.0 {
                continue;
            }
            for (blk, full) in self.rows_psd_full[r].iter().enumerate() {
                let om = &mut out.psd[blk];
                for &(p, q, v) in full {
                    om[(p, q)] += yr * v;
                }
            }
            out.nonneg.axpy(yr, &self.rows_nn[r], 1.0);
        }
        out.free += self.af.transpose() * y;
        out
    }
}

/// Nesterov–Todd scaling state for one iteration.
struct Scaling {
    /// Per PSD block: factor `R` with `X = RΛR'`, `Z = R'^{-1}ΛR^{-1}`.
    r: Vec<DMatrix<f64>>,
    rinv: Vec<DMatrix<f64>>,
    lambda: Vec<DVector<f64>>,
    /// `W = RR'` (dense congruence matrix).
    w: Vec<DMatrix<f64>>,
    /// Nonnegative block: `w = sqrt(x/z)`, `λ = sqrt(xz)`.
    nn_w2: DVector<f64>,
    nn_lambda: DVector<f64>,
}

fn compute_scaling(x: &BlockPoint, z: &BlockPoint) -> Option<Scaling> {
    let nblk = x.psd.len();
    let mut r = Vec::with_capacity(nblk);
    let mut rinv = Vec::with_capacity(nblk);
    let mut lambda = Vec::with_capacity(nblk);
    let mut w = Vec::with_capacity(nblk);
    for (xm, zm) in x.psd.iter().zip(&z.psd) {
        let s = xm.nrows();
        let lx = Cholesky::new(xm.clone())?.l();
        let lz = Cholesky::new(zm.clone())?.l();
        let prod = lz.transpose() * &lx;
        let svd = prod.svd(true, true);
        let sing = svd.singular_values.clone();
        if sing.iter().any(|&s| s <= 1e-150) {
            return None;
        }
        let v_t = svd.v_t?;
        let sqrt_inv = DVector::from_iterator(s, sing.iter().map(|&s| 1.0 / s.sqrt()));
        // R = L_x V Σ^{-1/2}
        let mut rm = &lx * v_t.transpose();
        for j in 0..s {
            for i in 0..s {
                rm[(i, j)] *= sqrt_inv[j];
            }
        }
        // R^{-1} = Σ^{1/2} V' L_x^{-1}
        let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(s, s))?;
        let mut rinv_m = &v_t * lx_inv;
        for i in 0..s {
            let f = sing[i].sqrt();
            for j in 0..s {
                rinv_m[(i, j)] *= f;
            }
        }
        let wm = &rm * rm.transpose();
        r.push(rm);
        rinv.push(rinv_m);
        lambda.push(sing);
        w.push(wm);
    }
    let n = x.nonneg.len();
    let mut nn_w2 = DVector::zeros(n);
    let mut nn_lambda = DVector::zeros(n);
    for i in 0..n {
        let (xi, zi) = (x.nonneg[i], z.nonneg[i]);
        if xi <= 0.0 || zi <= 0.0 {
            return None;
        }
        nn_w2[i] = xi / zi;
        nn_lambda[i] = (xi * zi).sqrt();
    }
    Some(Scaling {
        r,
        rinv,
        lambda,
        w,
        nn_w2,
        nn_lambda,
    })
}

impl Scaling {
    /// Congruence `W g W` over the cone blocks (free part untouched/zero).
    fn congruence(&self, g: &BlockPoint) -> BlockPoint {
        let mut out = g.clone();
        for (blk, wm) in self.w.iter().enumerate() {
            out.psd[blk] = wm * &g.psd[blk] * wm;
        }
        for i in 0..out.nonneg.len() {
            out.nonneg[i] = self.nn_w2[i] * g.nonneg[i];
        }
        out.free.fill(0.0);
        out
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    let eig = SymmetricEigen::new(sym(m));
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Largest `α` keeping `v + α·dv` in the cone, bounded by `cap`.
struct StepLimiter {
    alpha: f64,
}

impl StepLimiter {
    fn new(cap: f64) -> Self {
        StepLimiter { alpha: cap }
    }
    fn scalar(&mut self, v: f64, dv: f64) {
        if dv < 0.0 {
            self.alpha = self.alpha.min(-v / dv);
        }
    }
}

struct Direction {
    y: DVector<f64>,
    x: BlockPoint,
    z: BlockPoint,
    tau: f64,
    kappa: f64,
}

struct Kkt {
    /// Cholesky factor of the regularized Schur complement `AWA' + εI`.
    chol: Cholesky<f64, nalgebra::Dyn>,
    /// Unregularized Schur complement (for refinement).
    m_mat: DMatrix<f64>,
    af: DMatrix<f64>,
    /// Cholesky factor of the free-block Schur complement `A_F' M^{-1} A_F`.
    sf_chol: Option<Cholesky<f64, nalgebra::Dyn>>,
    refine_rounds: usize,
}

impl Kkt {
    /// Solve `[M A_F; A_F' 0][y; xf] = [alpha; beta]` via the free-block
    /// Schur complement, with iterative refinement.
    fn solve(&self, alpha: &DVector<f64>, beta: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut y, mut xf) = self.solve_once(alpha, beta);
        for _ in 0..self.refine_rounds {
            let ra = alpha - &self.m_mat * &y - &self.af * &xf;
            let rb = beta - self.af.transpose() * &y;
            let (dy, dxf) = self.solve_once(&ra, &rb);
            y += dy;
            xf += dxf;
        }
        (y, xf)
    }

    fn solve_once(&self, alpha: &DVector<f64>, beta: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let w1 = self.chol.solve(alpha);
        if let Some(sf) = &self.sf_chol {
            let rhs = self.af.transpose() * &w1 - beta;
            let xf = sf.solve(&rhs);
            let y = self.chol.solve(&(alpha - &self.af * &xf));
            (y, xf)
        } else {
            (w1, DVector::zeros(0))
        }
    }
}

pub(crate) fn run(prog: &ConicProgram, cfg: &SolverConfig) -> SolveReport {
    let pre = Pre::build(prog);
    let nu = pre.psd_sizes.iter().sum::<usize>() as f64 + pre.nn as f64 + 1.0;

    let mut x = BlockPoint::interior(&pre.psd_sizes, pre.nn, pre.nf);
    let mut z = BlockPoint::interior(&pre.psd_sizes, pre.nn, pre.nf);
    z.free.fill(0.0);
    let mut y: DVector<f64> = DVector::zeros(pre.m);
    let mut tau = 1.0;
    let mut kappa = 1.0;

    let mut iterations = 0;
    let mut stalls = 0;
    let mut last_residuals = Residuals {
        primal: f64::INFINITY,
        dual: f64::INFINITY,
        gap: f64::INFINITY,
    };
    // Best de-homogenized iterate seen so far (merit = worst residual).
    // Near the numerical floor the directions pick up noise amplified by the
    // scaling condition number and residuals can grow again; the final
    // answer is taken from the best iterate, not the last one.
    let mut best: Option<(f64, BlockPoint, Residuals)> = None;
    let mut no_progress = 0usize;
    let mut break_msg = String::new();

    for iter in 0..cfg.max_iter {
        iterations = iter;
        // Residuals of the embedding.
        let r_p = pre.apply_a(&x) - &pre.b * tau;
        let mut r_d = pre.apply_at(&y);
        r_d.scale_mut(-1.0);
        r_d.axpy(-1.0, &z);
        r_d.axpy(tau, &pre.c);
        let r_g = pre.b.dot(&y) - pre.c.dot(&x) - kappa;
        let mu = (x.dot(&z) + tau * kappa) / nu;
        if cfg.verbose {
            eprintln!(
                "iter {iter:3}  mu {mu:9.3e}  tau {tau:9.3e}  kappa {kappa:9.3e}  \
                 rp {:9.3e}  rd {:9.3e}  rg {r_g:9.3e}",
                r_p.norm(),
                r_d.norm(),
            );
        }

        // Convergence metrics at the de-homogenized point.
        if tau > 1e-12 {
            let inv_tau = 1.0 / tau;
            let mut xh = x.clone();
            xh.scale_mut(inv_tau);
            let yh = &y * inv_tau;
            let mut zh = z.clone();
            zh.scale_mut(inv_tau);
            let pres = (pre.apply_a(&xh) - &pre.b).norm() / (1.0 + pre.b_norm);
            let mut dvec = pre.apply_at(&yh);
            dvec.axpy(1.0, &zh);
            dvec.axpy(-1.0, &pre.c);
            let dres = dvec.norm() / (1.0 + pre.c_norm);
            let pobj = pre.c.dot(&xh);
            let dobj = pre.b.dot(&yh);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            last_residuals = Residuals {
                primal: pres,
                dual: dres,
                gap,
            };
            if pres <= cfg.feas_tol && dres <= cfg.feas_tol && gap <= cfg.gap_tol {
                return optimal_report(&pre, xh, last_residuals, iterations, String::new());
            }
            let merit = pres.max(dres).max(gap);
            if best.as_ref().is_none_or(|b| merit < 0.99 * b.0) {
                best = Some((merit, xh, last_residuals));
                no_progress = 0;
            } else {
                no_progress += 1;
                if no_progress >= 8 {
                    break_msg = "residuals stagnated at the numerical floor".into();
                    break;
                }
            }
        }

        // Infeasibility / unboundedness certificates.
        if let Some(report) =
            try_certificates(&pre, &y, &x, &z, cfg.infeas_tol, iterations, last_residuals)
        {
            return report;
        }

        // Numerical floor: complementarity exhausted without certificates.
        if mu <= 1e-16 {
            break_msg = "complementarity reached the numerical floor".into();
            break;
        }

        // NT scaling.
        let scaling = match compute_scaling(&x, &z) {
            Some(s) => s,
            None => {
                break_msg = "scaling breakdown: iterate left the cone interior".into();
                break;
            }
        };

        // Schur complement M = A W A' (+ static regularization).
        let m_mat = build_schur(&pre, &scaling);
        let mut m_reg = m_mat.clone();
        for i in 0..pre.m {
            m_reg[(i, i)] += cfg.static_reg;
        }
        let chol = match cholesky_with_bumps(m_reg, cfg.static_reg) {
            Some(c) => c,
            None => {
                break_msg =
                    "linear algebra breakdown: Schur complement not positive definite".into();
                break;
            }
        };
        let kkt_tmp = Kkt {
            chol,
            m_mat: m_mat.clone(),
            af: pre.af.clone(),
            sf_chol: None,
            refine_rounds: cfg.refine_rounds,
        };
        let sf_chol = if pre.nf > 0 {
            let minv_af = kkt_tmp.chol.solve(&pre.af);
            let mut sf = pre.af.transpose() * minv_af;
            for i in 0..pre.nf {
                sf[(i, i)] += cfg.static_reg;
            }
            match Cholesky::new(sf) {
                Some(c) => Some(c),
                None => {
                    break_msg =
                        "linear algebra breakdown: free-block Schur complement singular".into();
                    break;
                }
            }
        } else {
            None
        };
        let kkt = Kkt {
            sf_chol,
            ..kkt_tmp
        };

        // Quantities shared by both solves of this iteration.
        let wcw = scaling.congruence(&pre.c);
        let u = pre.apply_a(&wcw);
        let rho = pre.c.dot(&wcw);
        let (y2, xf2) = kkt.solve(&(&pre.b + &u), &free_part(&pre.c));

        // Predictor (affine) direction: Ξ(rc) = -z.
        let mut g_aff = r_d.clone();
        g_aff.scale_mut(-1.0);
        g_aff.axpy(-1.0, &z);
        let rc_tau_aff = -tau * kappa;
        let dir_aff = match newton_direction(
            &pre, &scaling, &kkt, &r_p, &r_d, r_g, &g_aff, rc_tau_aff, tau, kappa, &u, rho, &y2,
            &xf2,
        ) {
            Some(d) => d,
            None => {
                break_msg = "KKT breakdown: vanishing τ pivot".into();
                break;
            }
        };

        let alpha_aff = max_step(&x, &z, tau, kappa, &dir_aff, &scaling, 1.0);
        let mu_aff = {
            let mut xa = x.clone();
            xa.axpy(alpha_aff, &dir_aff.x);
            let mut za = z.clone();
            za.axpy(alpha_aff, &dir_aff.z);
            (xa.dot(&za) + (tau + alpha_aff * dir_aff.tau) * (kappa + alpha_aff * dir_aff.kappa))
                / nu
        };
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-9, 1.0);

        // Corrector right-hand side in the scaled space.
        let mut g_cor = r_d.clone();
        g_cor.scale_mut(-1.0);
        for blk in 0..pre.psd_sizes.len() {
            let rinv = &scaling.rinv[blk];
            let r = &scaling.r[blk];
            let lam = &scaling.lambda[blk];
            let dxb = rinv * &dir_aff.x.psd[blk] * rinv.transpose();
            let dzb = r.transpose() * &dir_aff.z.psd[blk] * r;
            let prod = sym(&(&dxb * &dzb));
            let s = lam.len();
            let mut rc = DMatrix::zeros(s, s);
            for i in 0..s {
                for j in 0..s {
                    let mut v = -prod[(i, j)];
                    if i == j {
                        v += sigma * mu - lam[i] * lam[i];
                    }
                    rc[(i, j)] = 2.0 * v / (lam[i] + lam[j]);
                }
            }
            g_cor.psd[blk] += rinv.transpose() * rc * rinv;
        }
        for i in 0..pre.nn {
            let dxb = dir_aff.x.nonneg[i] / scaling.nn_w2[i].sqrt();
            let dzb = dir_aff.z.nonneg[i] * scaling.nn_w2[i].sqrt();
            let rc = sigma * mu - scaling.nn_lambda[i] * scaling.nn_lambda[i] - dxb * dzb;
            g_cor.nonneg[i] += rc / x.nonneg[i];
        }
        let rc_tau = sigma * mu - tau * kappa - dir_aff.tau * dir_aff.kappa;
        let dir = match newton_direction(
            &pre, &scaling, &kkt, &r_p, &r_d, r_g, &g_cor, rc_tau, tau, kappa, &u, rho, &y2, &xf2,
        ) {
            Some(d) => d,
            None => {
                break_msg = "KKT breakdown: vanishing τ pivot".into();
                break;
            }
        };

        let alpha = cfg.step_scale * max_step(&x, &z, tau, kappa, &dir, &scaling, f64::INFINITY);
        let alpha = alpha.min(1.0);
        if cfg.verbose {
            eprintln!(
                "          alpha_aff {alpha_aff:9.3e}  sigma {sigma:9.3e}  alpha {alpha:9.3e}"
            );
        }
        if alpha <= 1e-7 {
            stalls += 1;
            if stalls >= 3 {
                break_msg = "step sizes collapsed".into();
                break;
            }
        } else {
            stalls = 0;
        }

        y.axpy(alpha, &dir.y, 1.0);
        x.axpy(alpha, &dir.x);
        z.axpy(alpha, &dir.z);
        x.symmetrize();
        z.symmetrize();
        z.free.fill(0.0);
        tau += alpha * dir.tau;
        kappa += alpha * dir.kappa;
        if !(tau > 0.0 && kappa > 0.0) {
            break_msg = "embedding variables left the positive orthant".into();
            break;
        }
        iterations = iter + 1;
    }

    // Iteration budget exhausted, stall, or numerical breakdown: classify
    // from the best iterate seen.
    if break_msg.is_empty() {
        break_msg = "iteration budget exhausted".into();
    }
    if let Some((_, xh, res)) = &best {
        let relaxed = 100.0;
        if res.primal <= relaxed * cfg.feas_tol
            && res.dual <= relaxed * cfg.feas_tol
            && res.gap <= relaxed * cfg.gap_tol
        {
            return optimal_report(
                &pre,
                xh.clone(),
                *res,
                iterations,
                format!("accepted best iterate within relaxed (100x) tolerances; {break_msg}"),
            );
        }
    }
    if tau <= cfg.tau_kappa_ratio * kappa.max(1.0) || kappa > 1e3 * tau {
        if let Some(report) = try_certificates(
            &pre,
            &y,
            &x,
            &z,
            (cfg.infeas_tol * 1e3).min(1e-5),
            iterations,
            last_residuals,
        ) {
            return report;
        }
    }
    indeterminate_report(
        last_residuals,
        iterations,
        format!("no optimality or infeasibility certificate: {break_msg}"),
    )
}

fn free_part(c: &BlockPoint) -> DVector<f64> {
    c.free.clone()
}

fn optimal_report(
    pre: &Pre,
    xh: BlockPoint,
    residuals: Residuals,
    iterations: usize,
    message: String,
) -> SolveReport {
    let value = -pre.c.dot(&xh); // back to maximization sense
    SolveReport {
        status: SolveStatus::Optimal,
        value: Some(value),
        variables: Some(xh),
        residuals,
        iterations,
        improving_ray: None,
        infeasibility_certificate: None,
        message,
    }
}

fn indeterminate_report(residuals: Residuals, iterations: usize, message: String) -> SolveReport {
    SolveReport {
        status: SolveStatus::Indeterminate,
        value: None,
        variables: None,
        residuals,
        iterations,
        improving_ray: None,
        infeasibility_certificate: None,
        message,
    }
}

/// Check the two homogeneous certificates at tolerance `tol`.
fn try_certificates(
    pre: &Pre,
    y: &DVector<f64>,
    x: &BlockPoint,
    z: &BlockPoint,
    tol: f64,
    iterations: usize,
    residuals: Residuals,
) -> Option<SolveReport> {
    // Primal infeasibility: b'y > 0 with A'y + z ≈ 0, z ∈ K*.
    let bty = pre.b.dot(y);
    if bty > 1e-12 {
        let mut v = pre.apply_at(y);
        v.axpy(1.0, z);
        if v.norm() <= tol * bty {
            let y_cert: Vec<f64> = y.iter().map(|&v| v / bty).collect();
            return Some(SolveReport {
                status: SolveStatus::PrimalInfeasible,
                value: None,
                variables: None,
                residuals,
                iterations,
                improving_ray: None,
                infeasibility_certificate: Some(y_cert),
                message: "Farkas certificate of primal infeasibility".into(),
            });
        }
    }
    // Dual infeasibility / unboundedness: c'x < 0 with Ax ≈ 0, x ∈ K.
    let ctx = pre.c.dot(x);
    if ctx < -1e-12 {
        let ax = pre.apply_a(x);
        if ax.norm() <= tol * (-ctx) {
            let mut ray = x.clone();
            ray.scale_mut(1.0 / (-ctx));
            return Some(SolveReport {
                status: SolveStatus::DualInfeasible,
                value: None,
                variables: None,
                residuals,
                iterations,
                improving_ray: Some(ray),
                infeasibility_certificate: None,
                message: "improving ray: objective unbounded over the feasible set".into(),
            });
        }
    }
    None
}

fn cholesky_with_bumps(
    mut m: DMatrix<f64>,
    base_reg: f64,
) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let mut bump = base_reg;
    for _ in 0..4 {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(c);
        }
        bump *= 1e3;
        for i in 0..n {
            m[(i, i)] += bump;
        }
    }
    None
}

/// Schur complement `M = A W A'` over the cone blocks.
fn build_schur(pre: &Pre, scaling: &Scaling) -> DMatrix<f64> {
    let m = pre.m;
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for (blk, w) in scaling.w.iter().enumerate() {
                let fi = &pre.rows_psd_full[i][blk];
                let fj = &pre.rows_psd_full[j][blk];
                if fi.is_empty() || fj.is_empty() {
                    continue;
                }
                for &(p, q, a) in fi {
                    for &(uu, vv, bb) in fj {
                        acc += a * bb * w[(p, uu)] * w[(vv, q)];
                    }
                }
            }
            let ni = &pre.rows_nn[i];
            let nj = &pre.rows_nn[j];
            for t in 0..pre.nn {
                acc += ni[t] * scaling.nn_w2[t] * nj[t];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

/// Solve for one Newton direction given the complementarity right-hand
/// side folded into `g = Ξ(rc) − r_d,K` and `rc_τ`.
#[allow(clippy::too_many_arguments)]
fn newton_direction(
    pre: &Pre,
    scaling: &Scaling,
    kkt: &Kkt,
    r_p: &DVector<f64>,
    r_d: &BlockPoint,
    r_g: f64,
    g: &BlockPoint,
    rc_tau: f64,
    tau: f64,
    kappa: f64,
    u: &DVector<f64>,
    rho: f64,
    y2: &DVector<f64>,
    xf2: &DVector<f64>,
) -> Option<Direction> {
    let wgw = scaling.congruence(g);
    let h = pre.apply_a(&wgw);
    let gamma = pre.c.dot(&wgw);

    let alpha1 = -(r_p + &h);
    let beta1 = free_part(r_d);
    let (y1, xf1) = kkt.solve(&alpha1, &beta1);

    let bu: DVector<f64> = &pre.b - u;
    let cf = free_part(&pre.c);
    let denom = rho + kappa / tau + bu.dot(y2) - cf.dot(xf2);
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return None;
    }
    let numer = -r_g + gamma + rc_tau / tau - bu.dot(&y1) + cf.dot(&xf1);
    let dtau = numer / denom;

    let dy = &y1 + y2 * dtau;
    let dxf = &xf1 + xf2 * dtau;

    // Δx over the cone blocks: W(A'Δy − cΔτ + g)W; free part from the KKT
    // solve.
    let mut s = pre.apply_at(&dy);
    s.axpy(-dtau, &pre.c);
    s.axpy(1.0, g);
    let mut dx = scaling.congruence(&s);
    dx.free = dxf;

    // Δz over all blocks from dual feasibility; free coordinates stay 0.
    let mut dz = pre.apply_at(&dy);
    dz.scale_mut(-1.0);
    dz.axpy(dtau, &pre.c);
    dz.axpy(1.0, r_d);
    dz.free.fill(0.0);

    let dkappa = (rc_tau - kappa * dtau) / tau;

    Some(Direction {
        y: dy,
        x: dx,
        z: dz,
        tau: dtau,
        kappa: dkappa,
    })
}

/// Largest step keeping all cone variables strictly feasible, capped.
fn max_step(
    x: &BlockPoint,
    z: &BlockPoint,
    tau: f64,
    kappa: f64,
    dir: &Direction,
    scaling: &Scaling,
    cap: f64,
) -> f64 {
    let mut lim = StepLimiter::new(cap);
    for blk in 0..x.psd.len() {
        let rinv = &scaling.rinv[blk];
        let r = &scaling.r[blk];
        let lam = &scaling.lambda[blk];
        let s = lam.len();
        let inv_sqrt =
            DVector::from_iterator(s, lam.iter().map(|&l| 1.0 / l.sqrt()));
        // X + αΔX ⪰ 0 ⟺ I + α·Λ^{-1/2} (R^{-1}ΔX R^{-T}) Λ^{-1/2} ⪰ 0.
        let dxb = rinv * &dir.x.psd[blk] * rinv.transpose();
        let mut ex = dxb;
        for i in 0..s {
            for j in 0..s {
                ex[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
        let e = min_eig(&ex);
        if e < 0.0 {
            lim.alpha = lim.alpha.min(-1.0 / e);
        }
        let dzb = r.transpose() * &dir.z.psd[blk] * r;
        let mut ez = dzb;
        for i in 0..s {
            for j in 0..s {
                ez[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
        let e = min_eig(&ez);
        if e < 0.0 {
            lim.alpha = lim.alpha.min(-1.0 / e);
        }
    }
    for i in 0..x.nonneg.len() {
        lim.scalar(x.nonneg[i], dir.x.nonneg[i]);
        lim.scalar(z.nonneg[i], dir.z.nonneg[i]);
    }
    lim.scalar(tau, dir.tau);
    lim.scalar(kappa, dir.kappa);
    lim.alpha
}
