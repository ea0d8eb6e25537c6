//! `sosdual`: certify SOS-convexity, build and solve zero-gap duals of
//! convex minimax / robust / rational programs, and cross-check them
//! against an independent primal oracle.
//!
//! Exit codes follow the solver verdict on the dual program:
//!
//! * `0` — success (`solve`/`gap`: dual optimal; `check`: certified)
//! * `1` — dual unbounded ⟹ primal infeasible (`check`: refuted;
//!   `selftest`: failures)
//! * `2` — dual infeasible ⟹ primal unbounded below
//! * `3` — indeterminate (solver or comparison did not reach tolerance)
//! * `4` — input error (I/O, malformed file, failed precondition)

mod commands;
mod common;

use clap::{Parser, Subcommand, ValueEnum};
use common::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "sosdual",
    version,
    about = "SOS-convex minimax duals without duality gaps",
    max_term_width = 100
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Feasibility and gap tolerance handed to the conic solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap for the conic solver.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify SOS-convexity of every polynomial a problem file relies on.
    Check {
        /// Problem file, or a directory of `.json` problem files.
        input: String,
    },
    /// Construct the dual program and report its shape.
    Dualize {
        input: String,
        /// Write the dual conic program in text form to this path
        /// (`-` for stdout).
        #[arg(long)]
        dump_sdp: Option<String>,
    },
    /// Build and solve the dual; exit code reflects the verdict.
    Solve {
        input: String,
        /// Write the multiplier certificate as JSON to this path.
        #[arg(long)]
        emit_cert: Option<String>,
        /// Also write the dual conic program in text form to this path
        /// (`-` for stdout).
        #[arg(long)]
        dump_sdp: Option<String>,
    },
    /// Run the independent primal oracle.
    Oracle {
        input: String,
        /// Override the search box: `lo:hi,...` per coordinate, or a
        /// single half-width `w` for `[-w, w]^n`.
        #[arg(long, allow_hyphen_values = true)]
        r#box: Option<String>,
        /// Cutting-plane relative tolerance.
        #[arg(long)]
        cp_tol: Option<f64>,
    },
    /// Solve the dual and verify it against the primal oracle.
    Gap {
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        r#box: Option<String>,
        /// Absolute floor of the scale-aware comparison tolerance.
        #[arg(long, default_value_t = 1e-4)]
        gap_tol: f64,
        #[arg(long)]
        cp_tol: Option<f64>,
    },
    /// Flatten a robust problem into its minimax counterpart file.
    Robustify {
        input: String,
        /// Output path (`-` or omitted for stdout).
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Run the built-in seeded verification battery.
    Selftest {
        #[arg(long, default_value_t = 20260823)]
        seed: u64,
        /// Number of random instances per family.
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
}

fn main() {
    // Route usage errors to the input-error exit code; --help/--version
    // keep their conventional success exit.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let ctx = Ctx::new(cli.format, cli.tol, cli.max_iters);
    let code = match cli.command {
        Command::Check { input } => commands::for_each_input(&ctx, &input, commands::check_one),
        Command::Dualize { input, dump_sdp } => {
            let dump = dump_sdp.clone();
            commands::for_each_input(&ctx, &input, move |ctx, path| {
                commands::dualize_one(ctx, path, dump.as_deref())
            })
        }
        Command::Solve {
            input,
            emit_cert,
            dump_sdp,
        } => {
            let emit = emit_cert.clone();
            let dump = dump_sdp.clone();
            commands::for_each_input(&ctx, &input, move |ctx, path| {
                commands::solve_one(ctx, path, emit.as_deref(), dump.as_deref())
            })
        }
        Command::Oracle {
            input,
            r#box,
            cp_tol,
        } => {
            let boxspec = r#box.clone();
            commands::for_each_input(&ctx, &input, move |ctx, path| {
                commands::oracle_one(ctx, path, boxspec.as_deref(), cp_tol)
            })
        }
        Command::Gap {
            input,
            r#box,
            gap_tol,
            cp_tol,
        } => {
            let boxspec = r#box.clone();
            commands::for_each_input(&ctx, &input, move |ctx, path| {
                commands::gap_one(ctx, path, boxspec.as_deref(), gap_tol, cp_tol)
            })
        }
        Command::Robustify { input, output } => {
            commands::robustify(&ctx, &input, output.as_deref())
        }
        Command::Selftest { seed, count } => commands::selftest(&ctx, seed, count),
    };
    std::process::exit(code);
}
