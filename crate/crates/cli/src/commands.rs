//! Implementations of the CLI subcommands.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sosdual_core::report::{dual_certificate_json, infeasibility_json, oracle_result_json};
use sosdual_core::{
    build_dual, build_fractional_dual, build_linear_fractional_dual, gen, is_sos, is_sos_convex,
    solve_fractional_primal, solve_primal, DualProgram, DualSolution, LoadedProblem,
    MinimaxProblem, OracleOptions, Polynomial, PrimalReport, ProblemFile, RationalMinimaxProblem,
    RunReport, SolveStatus, SosDecision, SosOptions,
};

use crate::common::{
    collect_inputs, emit, input_error, load_input, print_line, write_output, Ctx, Input,
};
use crate::Format;

/// Run `f` on one file or on every `*.json` in a directory (sorted),
/// returning the worst (numerically largest) exit code.
pub fn for_each_input<F>(ctx: &Ctx, input: &str, f: F) -> i32
where
    F: Fn(&Ctx, &Path) -> i32,
{
    let files = match collect_inputs(input) {
        Ok(files) => files,
        Err(e) => return input_error(ctx, "input", Path::new(input), &e),
    };
    files.iter().map(|p| f(ctx, p)).max().unwrap_or(0)
}

fn sos_options(ctx: &Ctx) -> SosOptions {
    SosOptions {
        solver: ctx.solver_config(),
        ..SosOptions::default()
    }
}

fn ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

/// Every polynomial whose SOS-convexity the dual construction relies on,
/// with a human-readable label.
fn audit_list(loaded: &LoadedProblem) -> Vec<(String, Polynomial)> {
    let mut items = Vec::new();
    match loaded {
        LoadedProblem::Minimax(p) => {
            for (j, q) in p.objectives.iter().enumerate() {
                items.push((format!("objective {j}"), q.clone()));
            }
            for (i, g) in p.constraints.iter().enumerate() {
                items.push((format!("constraint {i}"), g.clone()));
            }
        }
        LoadedProblem::Rational(p) => {
            for (j, q) in p.base.objectives.iter().enumerate() {
                items.push((format!("objective {j}"), q.clone()));
            }
            for (i, g) in p.base.constraints.iter().enumerate() {
                items.push((format!("constraint {i}"), g.clone()));
            }
            if p.denominator.degree() > 1 {
                items.push((
                    "denominator (negated, for concavity)".to_string(),
                    p.denominator.scale(-1.0),
                ));
            }
        }
        LoadedProblem::Robust(p) => {
            for (j, q) in p.objective_scenarios.iter().enumerate() {
                items.push((format!("objective scenario {j}"), q.clone()));
            }
            for (i, group) in p.constraint_scenarios.iter().enumerate() {
                for (k, g) in group.iter().enumerate() {
                    items.push((format!("constraint {i} realization {k}"), g.clone()));
                }
            }
        }
    }
    items
}

pub fn check_one(ctx: &Ctx, path: &Path) -> i32 {
    match check_inner(ctx, path) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "check", path, &e),
    }
}

fn check_inner(ctx: &Ctx, path: &Path) -> Result<i32> {
    let input = load_input(path)?;
    let loaded = input.file.to_problem()?;
    let opts = sos_options(ctx);
    let mut report = RunReport::new("check");
    report.input_digest = Some(input.digest.clone());
    let t0 = Instant::now();
    let (mut certified, mut refuted, mut indeterminate) = (0u32, 0u32, 0u32);
    for (name, poly) in audit_list(&loaded) {
        match is_sos_convex(&poly, &opts)? {
            SosDecision::Sos(cert) => {
                certified += 1;
                report.messages.push(format!(
                    "{name}: SOS-convex (Gram {0}x{0}, min eigenvalue {1:.3e}, residual {2:.3e})",
                    cert.basis.len(),
                    cert.min_eigenvalue,
                    cert.residual
                ));
            }
            SosDecision::NotSos(r) => {
                refuted += 1;
                report
                    .messages
                    .push(format!("{name}: not SOS-convex: {}", r.reason));
            }
            SosDecision::Indeterminate(m) => {
                indeterminate += 1;
                report.messages.push(format!("{name}: indeterminate: {m}"));
            }
        }
    }
    report.put_timing("check", ms(t0));
    report.put_value("certified", f64::from(certified));
    report.put_value("refuted", f64::from(refuted));
    report.put_value("indeterminate", f64::from(indeterminate));
    let (status, code) = if refuted > 0 {
        ("refuted", 1)
    } else if indeterminate > 0 {
        ("indeterminate", 3)
    } else {
        ("certified", 0)
    };
    report.status = status.to_string();
    emit(ctx, &report);
    Ok(code)
}

// ---------------------------------------------------------------------------
// dual construction shared by dualize / solve / gap
// ---------------------------------------------------------------------------

/// Route a loaded problem to the right dual builder. Rational problems
/// with all-affine data (including the denominator) get the exact linear
/// program; everything else gets the Gram-matrix SDP.
fn build_dual_for(ctx: &Ctx, loaded: &LoadedProblem) -> Result<(DualProgram, &'static str)> {
    match loaded {
        LoadedProblem::Minimax(p) => Ok((build_dual(p)?, "gram SDP")),
        LoadedProblem::Robust(p) => Ok((build_dual(&p.counterpart()?)?, "gram SDP of the robust counterpart")),
        LoadedProblem::Rational(p) => {
            let affine = p
                .base
                .objectives
                .iter()
                .chain(&p.base.constraints)
                .all(|q| q.degree() <= 1)
                && p.denominator.degree() <= 1;
            if affine {
                Ok((build_linear_fractional_dual(p)?, "linear-fractional LP"))
            } else {
                Ok((build_fractional_dual(p, &sos_options(ctx))?, "fractional gram SDP"))
            }
        }
    }
}

pub fn dualize_one(ctx: &Ctx, path: &Path, dump: Option<&str>) -> i32 {
    match dualize_inner(ctx, path, dump) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "dualize", path, &e),
    }
}

fn dualize_inner(ctx: &Ctx, path: &Path, dump: Option<&str>) -> Result<i32> {
    let input = load_input(path)?;
    let loaded = input.file.to_problem()?;
    let t0 = Instant::now();
    let (dual, route) = build_dual_for(ctx, &loaded)?;
    let mut report = RunReport::new("dualize");
    report.input_digest = Some(input.digest.clone());
    report.put_timing("build", ms(t0));
    let prog = dual.program();
    report.put_value("basisSize", dual.basis.len() as f64);
    report.put_value("psdBlocks", prog.psd_blocks.len() as f64);
    report.put_value(
        "psdMaxSide",
        prog.psd_blocks.iter().copied().max().unwrap_or(0) as f64,
    );
    report.put_value("nonnegVars", prog.nonneg_dim as f64);
    report.put_value("freeVars", prog.free_dim as f64);
    report.put_value("equalityRows", prog.num_rows() as f64);
    report.put_value("objectives", dual.num_objectives() as f64);
    report.put_value("constraints", dual.num_constraints() as f64);
    report.messages.push(format!("dual encoding: {route}"));
    if let Some(target) = dump {
        write_output(target, &prog.dump())?;
        if target != "-" {
            report.messages.push(format!("conic program written to {target}"));
        }
    }
    report.status = "built".to_string();
    emit(ctx, &report);
    Ok(0)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// Map the solver's verdict on the dual program to the primal-side verdict
/// and exit code: an unbounded dual certifies primal infeasibility and an
/// infeasible dual certifies an unbounded primal.
fn verdict(status: SolveStatus) -> (&'static str, i32) {
    match status {
        SolveStatus::Optimal => ("optimal", 0),
        SolveStatus::DualInfeasible => ("infeasible", 1),
        SolveStatus::PrimalInfeasible => ("unbounded", 2),
        SolveStatus::Indeterminate => ("indeterminate", 3),
    }
}

fn solve_dual(ctx: &Ctx, input: &Input) -> Result<(DualProgram, DualSolution, &'static str)> {
    let loaded = input.file.to_problem()?;
    let (dual, route) = build_dual_for(ctx, &loaded)?;
    let sol = dual.solve(&ctx.solver_config())?;
    Ok((dual, sol, route))
}

fn fill_solution(report: &mut RunReport, sol: &DualSolution, route: &str) {
    report.messages.push(format!("dual encoding: {route}"));
    report.put_value("solverIterations", sol.solver_report.iterations as f64);
    report.put_value("residualPrimal", sol.solver_report.residuals.primal);
    report.put_value("residualDual", sol.solver_report.residuals.dual);
    report.put_value("residualGap", sol.solver_report.residuals.gap);
    if let Some(v) = sol.value {
        report.put_value("value", v);
    }
    if let Some(cert) = &sol.certificate {
        report.put_value("identityResidual", cert.identity_residual);
        report.put_value("gramMinEigenvalue", cert.gram_min_eigenvalue);
        report.certificate = Some(dual_certificate_json(cert));
    }
    match sol.status {
        SolveStatus::DualInfeasible => report.messages.push(
            "dual is unbounded above (improving ray found): the constraint system \
             admits no feasible point"
                .to_string(),
        ),
        SolveStatus::PrimalInfeasible => report.messages.push(
            "dual is infeasible (Farkas certificate found): the objective is \
             unbounded below on the feasible set"
                .to_string(),
        ),
        SolveStatus::Indeterminate => report
            .messages
            .push(format!("solver: {}", sol.solver_report.message)),
        SolveStatus::Optimal => {}
    }
}

pub fn solve_one(ctx: &Ctx, path: &Path, emit_cert: Option<&str>, dump: Option<&str>) -> i32 {
    match solve_inner(ctx, path, emit_cert, dump) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "solve", path, &e),
    }
}

fn solve_inner(ctx: &Ctx, path: &Path, emit_cert: Option<&str>, dump: Option<&str>) -> Result<i32> {
    let input = load_input(path)?;
    let t0 = Instant::now();
    let (dual, sol, route) = solve_dual(ctx, &input)?;
    let elapsed = ms(t0);
    let mut report = RunReport::new("solve");
    report.input_digest = Some(input.digest.clone());
    report.put_timing("solve", elapsed);
    if let Some(target) = dump {
        write_output(target, &dual.program().dump())?;
    }
    fill_solution(&mut report, &sol, route);
    if let Some(target) = emit_cert {
        match &sol.certificate {
            Some(cert) => {
                let json = serde_json::to_string_pretty(&dual_certificate_json(cert))?;
                write_output(target, &json)?;
                if target != "-" {
                    report.messages.push(format!("certificate written to {target}"));
                }
            }
            None => report.messages.push(format!(
                "no certificate to emit (status {:?})",
                sol.status
            )),
        }
    }
    let (status, code) = verdict(sol.status);
    report.status = status.to_string();
    emit(ctx, &report);
    Ok(code)
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn run_oracle(
    loaded: &LoadedProblem,
    opts: &OracleOptions,
) -> Result<PrimalReport> {
    let out = match loaded {
        LoadedProblem::Minimax(p) => solve_primal(p, opts)?,
        LoadedProblem::Robust(p) => solve_primal(&p.counterpart()?, opts)?,
        LoadedProblem::Rational(p) => solve_fractional_primal(p, opts)?,
    };
    Ok(out)
}

pub fn oracle_one(ctx: &Ctx, path: &Path, boxspec: Option<&str>, cp_tol: Option<f64>) -> i32 {
    match oracle_inner(ctx, path, boxspec, cp_tol) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "oracle", path, &e),
    }
}

fn oracle_inner(
    ctx: &Ctx,
    path: &Path,
    boxspec: Option<&str>,
    cp_tol: Option<f64>,
) -> Result<i32> {
    let input = load_input(path)?;
    let loaded = input.file.to_problem()?;
    let opts = ctx.oracle_options(
        loaded.dim(),
        input.file.box_bounds.as_deref(),
        boxspec,
        cp_tol,
    )?;
    let mut report = RunReport::new("oracle");
    report.input_digest = Some(input.digest.clone());
    let t0 = Instant::now();
    let outcome = run_oracle(&loaded, &opts)?;
    report.put_timing("oracle", ms(t0));
    let code = match &outcome {
        PrimalReport::Solved(r) => {
            report.oracle = Some(oracle_result_json(r));
            report.put_value("value", r.value);
            report.put_value("lowerBound", r.lower_bound);
            report.put_value("iterations", r.iterations as f64);
            if r.boundary_flag {
                report.messages.push(
                    "minimizer presses against the search box after all expansions: \
                     the infimum is unattained or unbounded below"
                        .to_string(),
                );
            }
            if r.converged {
                report.status = "solved".to_string();
                0
            } else {
                report.status = "notConverged".to_string();
                report
                    .messages
                    .push("cutting-plane loop stopped before reaching tolerance".to_string());
                3
            }
        }
        PrimalReport::Infeasible(ir) => {
            report.oracle = Some(infeasibility_json(ir));
            report.put_value("minViolation", ir.min_violation);
            report.status = "infeasible".to_string();
            1
        }
    };
    emit(ctx, &report);
    Ok(code)
}

// ---------------------------------------------------------------------------
// gap
// ---------------------------------------------------------------------------

pub fn gap_one(
    ctx: &Ctx,
    path: &Path,
    boxspec: Option<&str>,
    gap_tol: f64,
    cp_tol: Option<f64>,
) -> i32 {
    match gap_inner(ctx, path, boxspec, gap_tol, cp_tol) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "gap", path, &e),
    }
}

fn gap_inner(
    ctx: &Ctx,
    path: &Path,
    boxspec: Option<&str>,
    gap_tol: f64,
    cp_tol: Option<f64>,
) -> Result<i32> {
    if !(gap_tol.is_finite() && gap_tol > 0.0) {
        bail!("--gap-tol must be a positive finite number");
    }
    let input = load_input(path)?;
    let loaded = input.file.to_problem()?;
    let mut report = RunReport::new("gap");
    report.input_digest = Some(input.digest.clone());

    let t0 = Instant::now();
    let (dual, sol, route) = solve_dual(ctx, &input)?;
    report.put_timing("dual", ms(t0));
    let _ = &dual;
    fill_solution(&mut report, &sol, route);

    let opts = ctx.oracle_options(
        loaded.dim(),
        input.file.box_bounds.as_deref(),
        boxspec,
        cp_tol,
    )?;
    let t1 = Instant::now();
    let outcome = run_oracle(&loaded, &opts)?;
    report.put_timing("oracle", ms(t1));

    let (status, code) = match (&sol.status, &outcome) {
        (SolveStatus::Optimal, PrimalReport::Solved(r)) => {
            report.oracle = Some(oracle_result_json(r));
            let v = sol.value.expect("optimal dual carries a value");
            let tol = gap_tol.max(gap_tol * r.value.abs());
            report.put_value("oracleValue", r.value);
            report.put_value("tolerance", tol);
            if r.boundary_flag {
                // The oracle's value is a box-limited estimate of an
                // unattained (possibly -infinite) infimum, so only the
                // weak-duality side is checkable: the dual bound must not
                // exceed what the oracle could still reach.
                report.put_value("slack", r.value + tol - v);
                report.messages.push(
                    "infimum escapes every search box; checked the weak-duality side only"
                        .to_string(),
                );
                if v <= r.value + tol {
                    ("confirmed", 0)
                } else {
                    report.messages.push(format!(
                        "dual bound {v} exceeds the oracle value {} beyond tolerance {tol}",
                        r.value
                    ));
                    ("mismatch", 3)
                }
            } else {
                let gap = (v - r.value).abs();
                report.put_value("gap", gap);
                if gap <= tol {
                    ("confirmed", 0)
                } else if !r.converged {
                    report.messages.push(format!(
                        "oracle did not converge and disagrees by {gap} (tolerance {tol})"
                    ));
                    ("indeterminate", 3)
                } else {
                    report.messages.push(format!(
                        "dual value {v} and oracle value {} differ by {gap} > {tol}",
                        r.value
                    ));
                    ("mismatch", 3)
                }
            }
        }
        (SolveStatus::DualInfeasible, PrimalReport::Infeasible(ir)) => {
            report.oracle = Some(infeasibility_json(ir));
            report.messages.push(
                "both sides agree: the problem is infeasible".to_string(),
            );
            ("confirmed", 0)
        }
        (SolveStatus::PrimalInfeasible, PrimalReport::Solved(r)) if r.boundary_flag => {
            report.oracle = Some(oracle_result_json(r));
            report.messages.push(
                "both sides agree: the objective is unbounded below \
                 (dual infeasible, oracle escapes every box)"
                    .to_string(),
            );
            ("confirmed", 0)
        }
        (SolveStatus::Indeterminate, _) => {
            attach_oracle(&mut report, &outcome);
            report
                .messages
                .push("dual solve is indeterminate; nothing to compare".to_string());
            ("indeterminate", 3)
        }
        _ => {
            attach_oracle(&mut report, &outcome);
            report.messages.push(format!(
                "dual verdict {:?} and oracle verdict {} are inconsistent",
                sol.status,
                match &outcome {
                    PrimalReport::Solved(r) if r.boundary_flag => "solved (boundary)",
                    PrimalReport::Solved(_) => "solved",
                    PrimalReport::Infeasible(_) => "infeasible",
                }
            ));
            ("mismatch", 3)
        }
    };
    report.status = status.to_string();
    emit(ctx, &report);
    Ok(code)
}

fn attach_oracle(report: &mut RunReport, outcome: &PrimalReport) {
    match outcome {
        PrimalReport::Solved(r) => report.oracle = Some(oracle_result_json(r)),
        PrimalReport::Infeasible(ir) => report.oracle = Some(infeasibility_json(ir)),
    }
}

// ---------------------------------------------------------------------------
// robustify
// ---------------------------------------------------------------------------

pub fn robustify(ctx: &Ctx, input: &str, output: Option<&str>) -> i32 {
    match robustify_inner(ctx, input, output) {
        Ok(code) => code,
        Err(e) => input_error(ctx, "robustify", Path::new(input), &e),
    }
}

fn robustify_inner(ctx: &Ctx, input: &str, output: Option<&str>) -> Result<i32> {
    let inp = load_input(Path::new(input))?;
    let LoadedProblem::Robust(p) = inp.file.to_problem()? else {
        bail!("robustify expects a problem of kind `robust`");
    };
    let counterpart = p.counterpart()?;
    let out_file = ProblemFile::from_minimax(&counterpart, inp.file.box_bounds.clone());
    let json = serde_json::to_string_pretty(&out_file)?;
    match output {
        None => print_line(&json),
        Some(target) => {
            write_output(target, &json)?;
            if target != "-" {
                let mut report = RunReport::new("robustify");
                report.input_digest = Some(inp.digest.clone());
                report.status = "written".to_string();
                report.put_value("objectives", counterpart.objectives.len() as f64);
                report.put_value("constraints", counterpart.constraints.len() as f64);
                report
                    .messages
                    .push(format!("minimax counterpart written to {target}"));
                emit(ctx, &report);
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn xpow(dim: usize, exps: &[(u32, f64)]) -> Polynomial {
    Polynomial::from_terms(dim, exps.iter().map(|&(e, c)| (vec![e], c)))
        .expect("hand-written terms are valid")
}

/// Dual value vs oracle value on one instance; `Ok(detail)` on agreement.
fn battery_case(
    cfg_ctx: &Ctx,
    dual: &DualProgram,
    oracle: &PrimalReport,
) -> std::result::Result<String, String> {
    let sol = dual
        .solve(&cfg_ctx.solver_config())
        .map_err(|e| format!("dual solve failed: {e}"))?;
    let v = match (sol.status, sol.value) {
        (SolveStatus::Optimal, Some(v)) => v,
        (s, _) => return Err(format!("dual not optimal: {s:?}")),
    };
    let r = match oracle {
        PrimalReport::Solved(r) => r,
        PrimalReport::Infeasible(_) => return Err("oracle reported infeasible".to_string()),
    };
    let tol = 1e-4f64.max(1e-4 * r.value.abs());
    let ok = if r.boundary_flag {
        v <= r.value + tol
    } else {
        (v - r.value).abs() <= tol
    };
    let detail = format!("dual {v:.8}, oracle {:.8}", r.value);
    if ok && r.converged {
        Ok(detail)
    } else if !r.converged {
        Err(format!("{detail} (oracle did not converge)"))
    } else {
        Err(format!("{detail} (outside tolerance {tol:.1e})"))
    }
}

pub fn selftest(ctx: &Ctx, seed: u64, count: usize) -> i32 {
    let mut total = 0u32;
    let mut failures = 0u32;
    let mut record = |name: &str, result: std::result::Result<String, String>| {
        total += 1;
        match result {
            Ok(detail) => print_line(&format!("PASS {name:<28} {detail}")),
            Err(detail) => {
                failures += 1;
                print_line(&format!("FAIL {name:<28} {detail}"));
            }
        }
    };
    let cfg = ctx.solver_config();
    let oracle_opts = OracleOptions::default();
    let sos_opts = sos_options(ctx);
    let t0 = Instant::now();

    // Hand-solved minimax: min max(2x^4 - x, 5x^2 + x) on x >= -2 has
    // value 0 at the origin.
    let quartic = MinimaxProblem::new(
        1,
        vec![
            xpow(1, &[(4, 2.0), (1, -1.0)]),
            xpow(1, &[(2, 5.0), (1, 1.0)]),
        ],
        vec![xpow(1, &[(1, -1.0), (0, -2.0)])],
    )
    .expect("valid hand instance");
    record(
        "minimax hand dual",
        build_dual(&quartic)
            .map_err(|e| e.to_string())
            .and_then(|d| d.solve(&cfg).map_err(|e| e.to_string()))
            .and_then(|sol| match (sol.status, sol.value) {
                (SolveStatus::Optimal, Some(v)) if v.abs() <= 1e-5 => {
                    Ok(format!("value {v:.2e} (expected 0)"))
                }
                (s, v) => Err(format!("status {s:?}, value {v:?} (expected 0)")),
            }),
    );
    record(
        "minimax hand oracle",
        solve_primal(&quartic, &oracle_opts)
            .map_err(|e| e.to_string())
            .and_then(|rep| match rep.solved() {
                Some(r) if r.value.abs() <= 1e-5 && r.converged => {
                    Ok(format!("value {:.2e} (expected 0)", r.value))
                }
                Some(r) => Err(format!("value {} (expected 0)", r.value)),
                None => Err("reported infeasible".to_string()),
            }),
    );

    // Hand-solved ratio: min (x^2 + 1)/(x + 2) on x >= 0 has value
    // 2*sqrt(5) - 4 at x = sqrt(5) - 2.
    let fractional = RationalMinimaxProblem::new(
        MinimaxProblem::new(
            1,
            vec![xpow(1, &[(2, 1.0), (0, 1.0)])],
            vec![xpow(1, &[(1, -1.0)])],
        )
        .expect("valid hand instance"),
        xpow(1, &[(1, 1.0), (0, 2.0)]),
    )
    .expect("valid hand instance");
    let expected = 2.0 * 5.0f64.sqrt() - 4.0;
    record(
        "fractional hand dual",
        build_fractional_dual(&fractional, &sos_opts)
            .map_err(|e| e.to_string())
            .and_then(|d| d.solve(&cfg).map_err(|e| e.to_string()))
            .and_then(|sol| match (sol.status, sol.value) {
                (SolveStatus::Optimal, Some(v)) if (v - expected).abs() <= 1e-5 => {
                    Ok(format!("value {v:.8} (expected {expected:.8})"))
                }
                (s, v) => Err(format!("status {s:?}, value {v:?} (expected {expected:.8})")),
            }),
    );
    record(
        "fractional hand oracle",
        solve_fractional_primal(&fractional, &oracle_opts)
            .map_err(|e| e.to_string())
            .and_then(|rep| match rep.solved() {
                Some(r) if (r.value - expected).abs() <= 1e-4 => {
                    Ok(format!("value {:.8} (expected {expected:.8})", r.value))
                }
                Some(r) => Err(format!("value {} (expected {expected:.8})", r.value)),
                None => Err("reported infeasible".to_string()),
            }),
    );

    // Hand-solved affine ratio: min (x + 1)/(x + 2) on [0, 1] has value
    // 1/2 at x = 0; all data affine, so the dual is a linear program.
    let linfrac = RationalMinimaxProblem::new(
        MinimaxProblem::new(
            1,
            vec![xpow(1, &[(1, 1.0), (0, 1.0)])],
            vec![xpow(1, &[(1, -1.0)]), xpow(1, &[(1, 1.0), (0, -1.0)])],
        )
        .expect("valid hand instance"),
        xpow(1, &[(1, 1.0), (0, 2.0)]),
    )
    .expect("valid hand instance");
    record(
        "linear-fractional hand LP",
        build_linear_fractional_dual(&linfrac)
            .map_err(|e| e.to_string())
            .and_then(|d| d.solve(&cfg).map_err(|e| e.to_string()))
            .and_then(|sol| match (sol.status, sol.value) {
                (SolveStatus::Optimal, Some(v)) if (v - 0.5).abs() <= 1e-6 => {
                    Ok(format!("value {v:.8} (expected 0.5)"))
                }
                (s, v) => Err(format!("status {s:?}, value {v:?} (expected 0.5)")),
            }),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Certification spot checks on generated data.
    let sos_poly = gen::random_sos(&mut rng, 2, 2, 6);
    record(
        "sos certify",
        match is_sos(&sos_poly, &sos_opts) {
            Ok(SosDecision::Sos(c)) => Ok(format!(
                "certified (min eigenvalue {:.3e})",
                c.min_eigenvalue
            )),
            Ok(other) => Err(format!("expected certificate, got {other:?}")),
            Err(e) => Err(e.to_string()),
        },
    );
    let (neg_poly, witness) = gen::witnessed_negative(&mut rng, 2, 2);
    record(
        "sos refute",
        match is_sos(&neg_poly, &sos_opts) {
            Ok(SosDecision::NotSos(r)) => {
                let at = neg_poly.eval(&witness).expect("witness dimension matches");
                Ok(format!("refuted ({}; witness value {at:.3e})", r.reason))
            }
            Ok(other) => Err(format!("expected refutation, got {other:?}")),
            Err(e) => Err(e.to_string()),
        },
    );
    let convex_poly = gen::sos_convex_poly(&mut rng, 2);
    record(
        "sos-convex certify",
        match is_sos_convex(&convex_poly, &sos_opts) {
            Ok(SosDecision::Sos(_)) => Ok("certified".to_string()),
            Ok(other) => Err(format!("expected certificate, got {other:?}")),
            Err(e) => Err(e.to_string()),
        },
    );

    // Random minimax battery: dual value must match the oracle.
    for k in 0..count {
        let n = 1 + k % 3;
        let (problem, _) = gen::minimax_instance(&mut rng, n, 2, 2);
        let name = format!("minimax battery {k} (n={n})");
        let result = build_dual(&problem)
            .map_err(|e| e.to_string())
            .and_then(|dual| {
                let oracle =
                    solve_primal(&problem, &oracle_opts).map_err(|e| e.to_string())?;
                battery_case(ctx, &dual, &oracle)
            });
        record(&name, result);
    }

    // Random fractional battery.
    for k in 0..count {
        let n = 1 + k % 2;
        let (problem, _) = gen::fractional_instance(&mut rng, n, 2, 1);
        let name = format!("fractional battery {k} (n={n})");
        let result = build_fractional_dual(&problem, &sos_opts)
            .map_err(|e| e.to_string())
            .and_then(|dual| {
                let oracle =
                    solve_fractional_primal(&problem, &oracle_opts).map_err(|e| e.to_string())?;
                battery_case(ctx, &dual, &oracle)
            });
        record(&name, result);
    }

    let elapsed = ms(t0);
    match ctx.format {
        Format::Json => {
            let mut report = RunReport::new("selftest");
            report.status = if failures == 0 { "pass" } else { "fail" }.to_string();
            report.put_value("checks", f64::from(total));
            report.put_value("failures", f64::from(failures));
            report.put_timing("selftest", elapsed);
            emit(ctx, &report);
        }
        Format::Text => {
            print_line(&format!(
                "selftest: {total} checks, {failures} failures ({elapsed:.0} ms)"
            ));
        }
    }
    if failures == 0 {
        0
    } else {
        1
    }
}
