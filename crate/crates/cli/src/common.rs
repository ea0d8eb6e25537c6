//! Shared plumbing for the CLI commands: input loading, option
//! builders, and report emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use sosdual_core::report::RunReport;
use sosdual_core::{OracleOptions, ProblemFile, SolverConfig};

use crate::Format;

/// Exit code for malformed input, I/O failure, or a violated
/// precondition (e.g. a non-SOS-convex objective fed to `solve`).
pub const EXIT_INPUT: i32 = 4;

/// Global options shared by every command.
pub struct Ctx {
    pub format: Format,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

impl Ctx {
    pub fn new(format: Format, tol: Option<f64>, max_iters: Option<usize>) -> Self {
        Self {
            format,
            tol,
            max_iters,
        }
    }

    /// Solver configuration honoring `--tol` / `--max-iters`.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.tol {
            cfg.feas_tol = t;
            cfg.gap_tol = t;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iter = m;
        }
        cfg
    }

    /// Oracle options honoring the CLI box override, the problem
    /// file's `box` field, and `--cp-tol`.
    pub fn oracle_options(
        &self,
        dim: usize,
        file_box: Option<&[(f64, f64)]>,
        flag_box: Option<&str>,
        cp_tol: Option<f64>,
    ) -> Result<OracleOptions> {
        let mut opts = OracleOptions::default();
        if let Some(spec) = flag_box {
            opts.box_override = Some(parse_box(spec, dim)?);
        } else if let Some(b) = file_box {
            if b.len() != dim {
                bail!("box has {} ranges but problem has {} variables", b.len(), dim);
            }
            opts.box_override = Some(b.to_vec());
        }
        if let Some(t) = cp_tol {
            opts.cp_tol = t;
        }
        Ok(opts)
    }
}

/// Parse `lo:hi,lo:hi,...` (one range per coordinate) or a single
/// number `w` meaning `[-w, w]` in every coordinate.
pub fn parse_box(spec: &str, dim: usize) -> Result<Vec<(f64, f64)>> {
    let spec = spec.trim();
    if !spec.contains(':') {
        let w: f64 = spec
            .parse()
            .map_err(|_| anyhow!("box half-width `{spec}` is not a number"))?;
        if !w.is_finite() || w <= 0.0 {
            bail!("box half-width must be a positive finite number, got `{spec}`");
        }
        return Ok(vec![(-w, w); dim]);
    }
    let mut ranges = Vec::new();
    for part in spec.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| anyhow!("box range `{part}` is not of the form lo:hi"))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| anyhow!("box bound `{lo}` is not a number"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| anyhow!("box bound `{hi}` is not a number"))?;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            bail!("box range `{part}` must satisfy lo < hi with finite bounds");
        }
        ranges.push((lo, hi));
    }
    if ranges.len() != dim {
        bail!(
            "box has {} ranges but problem has {} variables",
            ranges.len(),
            dim
        );
    }
    Ok(ranges)
}

/// A parsed problem file together with its digest.
pub struct Input {
    pub file: ProblemFile,
    pub digest: String,
}

pub fn load_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file = ProblemFile::parse(&text)
        .with_context(|| format!("{} is not a valid problem file", path.display()))?;
    let digest = file.digest()?;
    Ok(Input { file, digest })
}

/// Expand `input` into the list of problem files to process: the file
/// itself, or every `*.json` in the directory sorted by name.
pub fn collect_inputs(input: &str) -> Result<Vec<PathBuf>> {
    let path = Path::new(input);
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("cannot list {}", path.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
            })
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("directory {} contains no .json problem files", path.display());
        }
        Ok(files)
    } else if path.exists() {
        // Anything readable counts, pipes included, so reports can be
        // chained: `sosdual robustify r.json | sosdual solve /dev/stdin`.
        Ok(vec![path.to_path_buf()])
    } else {
        bail!("{} does not exist", path.display());
    }
}

/// Print a line to stdout, exiting with the conventional SIGPIPE code
/// when the reader has gone away (e.g. `sosdual ... | head`).
pub fn print_line(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{s}").is_err() {
        std::process::exit(141);
    }
}

/// Print a report in the selected format.
pub fn emit(ctx: &Ctx, report: &RunReport) {
    match ctx.format {
        Format::Json => match serde_json::to_string_pretty(report) {
            Ok(s) => print_line(&s),
            Err(e) => eprintln!("error: cannot serialize report: {e}"),
        },
        Format::Text => print_line(&render_text(report)),
    }
}

fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command : {}", report.command);
    if let Some(d) = &report.input_digest {
        let _ = writeln!(out, "input   : {d}");
    }
    let _ = writeln!(out, "status  : {}", report.status);
    let mut keys: Vec<&String> = report.values.keys().collect();
    keys.sort();
    for k in keys {
        let _ = writeln!(out, "{:<8}: {}", k, report.values[k]);
    }
    for m in &report.messages {
        let _ = writeln!(out, "note    : {m}");
    }
    let mut tkeys: Vec<&String> = report.timings_ms.keys().collect();
    tkeys.sort();
    for k in tkeys {
        let _ = writeln!(out, "time    : {} {:.1} ms", k, report.timings_ms[k]);
    }
    out.pop();
    out
}

/// Print an input-error report for `path` and return [`EXIT_INPUT`].
pub fn input_error(ctx: &Ctx, command: &str, path: &Path, err: &anyhow::Error) -> i32 {
    let mut report = RunReport::new(command);
    report.status = "inputError".to_string();
    report.messages.push(format!("{}: {err:#}", path.display()));
    emit(ctx, &report);
    EXIT_INPUT
}

/// Write `contents` to `path`, with `-` meaning stdout.
pub fn write_output(path: &str, contents: &str) -> Result<()> {
    if path == "-" {
        print_line(contents);
        Ok(())
    } else {
        std::fs::write(path, contents).with_context(|| format!("cannot write {path}"))
    }
}
