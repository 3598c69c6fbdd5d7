//! Command-line front end. Exit codes: 0 ok, 2 usage or bad input,
//! 3 numerical failure, 4 Jacobian check failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::json;

use crate::error::{QuestError, Stage};
use crate::eval::{compare_jacobians, quest_fd_jacobian, quest_with, FdStep, QuestOptions};
use crate::invert::{invert, InvertOptions};
use crate::sim::{run_convergence, Shape, ShapeSpec, SimulationConfig, SimulationReport, Variate};
use crate::spectrum::PopulationSpectrum;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

/// Maximum analytic-vs-FD discrepancy accepted by `check-jacobian`.
pub const JACOBIAN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "quest",
    version,
    about = "Evaluate, invert, and simulate the QuEST function"
)]
pub struct Cli {
    /// Print the JSON schema of the `eval` and `invert` outputs and exit.
    #[arg(long)]
    pub print_schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map population eigenvalues to quantized sample eigenvalues.
    Eval {
        /// File with one nonnegative population eigenvalue per line.
        #[arg(long)]
        tau: PathBuf,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Also write the Jacobian as dense CSV (row: λ index, column: τ index).
        #[arg(long)]
        jacobian: Option<PathBuf>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Estimate population eigenvalues from sample eigenvalues.
    Invert {
        /// File with one nonnegative sample eigenvalue per line.
        #[arg(long)]
        lambda: PathBuf,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Iteration cap; hitting it reports converged = false.
        #[arg(long, default_value_t = InvertOptions::default().max_iter)]
        max_iter: usize,
        /// Relative gradient tolerance.
        #[arg(long, default_value_t = InvertOptions::default().g_tol)]
        tol: f64,
        /// Output JSON file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo NMSE sweep of the inversion estimator.
    Simulate {
        /// Population shape: h1, h2, h3 or h4.
        #[arg(long, value_parser = parse_shape)]
        shape: Shape,
        /// Condition number κ ≥ 1.
        #[arg(long)]
        kappa: f64,
        /// Concentration c = p/n; n = round(p/c).
        #[arg(long)]
        conc: f64,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Replications per dimension.
        #[arg(long)]
        reps: usize,
        /// Variate distribution: gaussian, student5, coin or exponential.
        #[arg(long, value_parser = parse_variate)]
        dist: Variate,
        /// Base seed; each (p, rep) pair gets its own stream.
        #[arg(long)]
        seed: u64,
        /// Output CSV file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall-clock seconds per rep; otherwise the column is 0 so
        /// output is reproducible byte for byte.
        #[arg(long)]
        timing: bool,
    },
    /// Compare the analytic Jacobian with central finite differences.
    CheckJacobian {
        /// File with one nonnegative population eigenvalue per line.
        #[arg(long)]
        tau: PathBuf,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Relative step: h_k = h·τ_k.
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: QuestError| e.to_string())
}

fn parse_variate(s: &str) -> Result<Variate, String> {
    s.parse().map_err(|e: QuestError| e.to_string())
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(QuestError),
    CheckFailed,
}

impl From<QuestError> for CliError {
    fn from(e: QuestError) -> Self {
        if e.stage() == Stage::Spectrum {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Reads one nonnegative real per line; blank lines and `#` comments are skipped.
pub fn read_values(path: &Path, what: &str) -> std::result::Result<Vec<f64>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| format!("invalid number at line {}: `{line}`", i + 1))?;
        if !v.is_finite() {
            return Err(format!("non-finite {what} at line {}", i + 1));
        }
        if v < 0.0 {
            return Err(format!("negative {what} at line {}", i + 1));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(format!("no {what}s in {}", path.display()));
    }
    Ok(values)
}

fn read(path: &Path) -> CliResult<Vec<f64>> {
    read_values(path, "eigenvalue").map_err(CliError::Usage)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Float formatting for CSV: 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_eval(
    tau: &Path,
    n: usize,
    jacobian: Option<&Path>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let spec = PopulationSpectrum::new(read(tau)?, n)?;
    let opts = QuestOptions {
        jacobian: jacobian.is_some(),
        ..QuestOptions::default()
    };
    let result = quest_with(&spec, &opts)?;
    if let (Some(path), Some(jac)) = (jacobian, result.jacobian.as_ref()) {
        fs::write(path, matrix_csv(jac))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let support = &result.support;
    let text = match format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "eval",
            "p": spec.p(),
            "n": spec.n(),
            "c": spec.c(),
            "lambda": result.lambda,
            "support": {
                "nu": support.nu(),
                "u_endpoints": support.endpoints(),
                "x_intervals": result.x_support.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>(),
                "omega": support.omega(),
            },
            "zero_atoms": result.zero_atoms,
        })),
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# p={} n={} nu={}", spec.p(), spec.n(), support.nu());
            for (i, (a, b)) in result.x_support.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "# interval {i}: x=[{}, {}] u=[{}, {}] omega={}",
                    num(*a),
                    num(*b),
                    num(support.interval(i).0),
                    num(support.interval(i).1),
                    support.omega()[i]
                );
            }
            s.push_str("index,lambda\n");
            for (i, v) in result.lambda.iter().enumerate() {
                let _ = writeln!(s, "{},{}", i + 1, num(*v));
            }
            s
        }
    };
    emit(out, &text)
}

fn cmd_invert(
    lambda: &Path,
    n: usize,
    max_iter: usize,
    tol: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    let opts = InvertOptions {
        max_iter,
        g_tol: tol,
        ..InvertOptions::default()
    };
    let res = invert(&read(lambda)?, n, &opts)?;
    emit(
        out,
        &to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "invert",
            "p": res.tau_hat.len(),
            "n": n,
            "tau_hat": res.tau_hat,
            "objective": res.objective,
            "iterations": res.iterations,
            "converged": res.converged,
            "support_trace": res.support_trace,
        })),
    )
}

/// Per-rep CSV records followed by `#` summary lines.
pub fn simulation_csv(report: &SimulationReport, timing: bool) -> String {
    let mut s = String::from("shape,dist,p,n,rep,seed,nmse,seconds\n");
    for r in &report.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.shape,
            r.dist,
            r.p,
            r.n,
            r.rep,
            r.seed,
            num(r.nmse),
            num(if timing { r.seconds } else { 0.0 })
        );
    }
    s.push_str("# summary: p,n,mean_nmse,reps_used,not_converged\n");
    for d in &report.summary.dims {
        let _ = writeln!(
            s,
            "# {},{},{},{},{}",
            d.p,
            d.n,
            num(d.mean_nmse),
            d.reps_used,
            d.not_converged
        );
    }
    match report.summary.slope {
        Some(v) => {
            let _ = writeln!(s, "# slope: {}", num(v));
        }
        None => s.push_str("# slope: NA\n"),
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    shape: Shape,
    kappa: f64,
    conc: f64,
    dims: Vec<usize>,
    reps: usize,
    dist: Variate,
    seed: u64,
    out: Option<&Path>,
    threads: Option<usize>,
    timing: bool,
) -> CliResult<()> {
    let config = SimulationConfig {
        shape: ShapeSpec::new(shape, kappa).map_err(|e| CliError::Usage(e.to_string()))?,
        variate: dist,
        concentration: conc,
        dims,
        reps,
        seed,
        invert: InvertOptions::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let report = pool
        .install(|| run_convergence(&config))
        .map_err(|e| match e {
            QuestError::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::from(other),
        })?;
    let text = simulation_csv(&report, timing);
    emit(out, &text)?;
    if out.is_some() {
        for d in &report.summary.dims {
            println!(
                "p={} n={} mean NMSE {:.4e} ({} of {} reps)",
                d.p, d.n, d.mean_nmse, d.reps_used, reps
            );
        }
        if let Some(v) = report.summary.slope {
            println!("log-log slope {v:.4}");
        }
    }
    Ok(())
}

fn cmd_check_jacobian(tau: &Path, n: usize, h: f64) -> CliResult<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(CliError::Usage(format!("--h must be positive, got {h}")));
    }
    let spec = PopulationSpectrum::new(read(tau)?, n)?;
    let result = quest_with(&spec, &QuestOptions::default())?;
    let fd = quest_fd_jacobian(&spec, FdStep::Relative(h))?;
    let check = compare_jacobians(result.jacobian.as_ref().expect("Jacobian requested"), &fd);
    println!("column,max_abs_discrepancy,flagged,one_sided");
    for (k, v) in check.per_column.iter().enumerate() {
        println!(
            "{},{},{},{}",
            k + 1,
            num(*v),
            check.flagged[k],
            fd.one_sided[k]
        );
    }
    let flagged = check.flagged.iter().filter(|f| **f).count();
    println!(
        "max discrepancy {:.3e} over {} unflagged columns ({} flagged); tolerance {:.0e}",
        check.max_abs,
        spec.p() - flagged,
        flagged,
        JACOBIAN_TOLERANCE
    );
    if check.max_abs <= JACOBIAN_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

/// JSON schema of the `eval` and `invert` outputs.
pub fn schema() -> serde_json::Value {
    let numbers = json!({ "type": "array", "items": { "type": "number" } });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": format!("quest-output-v{SCHEMA_VERSION}"),
        "title": "quest command output",
        "oneOf": [
            {
                "title": "eval",
                "type": "object",
                "required": ["schema_version", "command", "p", "n", "c", "lambda", "support", "zero_atoms"],
                "properties": {
                    "schema_version": { "const": SCHEMA_VERSION },
                    "command": { "const": "eval" },
                    "p": { "type": "integer", "minimum": 1 },
                    "n": { "type": "integer", "minimum": 1 },
                    "c": { "type": "number", "exclusiveMinimum": 0 },
                    "lambda": numbers,
                    "support": {
                        "type": "object",
                        "required": ["nu", "u_endpoints", "x_intervals", "omega"],
                        "properties": {
                            "nu": { "type": "integer", "minimum": 1 },
                            "u_endpoints": numbers,
                            "x_intervals": {
                                "type": "array",
                                "items": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 }
                            },
                            "omega": { "type": "array", "items": { "type": "integer", "minimum": 1 } }
                        }
                    },
                    "zero_atoms": { "type": "integer", "minimum": 0 }
                }
            },
            {
                "title": "invert",
                "type": "object",
                "required": ["schema_version", "command", "p", "n", "tau_hat", "objective", "iterations", "converged", "support_trace"],
                "properties": {
                    "schema_version": { "const": SCHEMA_VERSION },
                    "command": { "const": "invert" },
                    "p": { "type": "integer", "minimum": 1 },
                    "n": { "type": "integer", "minimum": 1 },
                    "tau_hat": numbers,
                    "objective": { "type": "number", "minimum": 0 },
                    "iterations": { "type": "integer", "minimum": 0 },
                    "converged": { "type": "boolean" },
                    "support_trace": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["iteration", "nu"],
                            "properties": {
                                "iteration": { "type": "integer", "minimum": 0 },
                                "nu": { "type": "integer", "minimum": 1 }
                            }
                        }
                    }
                }
            }
        ]
    })
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.print_schema {
        return emit(None, &to_json(&schema()));
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage(
            "a subcommand or --print-schema is required (see --help)".into(),
        ));
    };
    match command {
        Command::Eval {
            tau,
            n,
            jacobian,
            out,
            format,
        } => cmd_eval(&tau, n, jacobian.as_deref(), out.as_deref(), format),
        Command::Invert {
            lambda,
            n,
            max_iter,
            tol,
            out,
        } => cmd_invert(&lambda, n, max_iter, tol, out.as_deref()),
        Command::Simulate {
            shape,
            kappa,
            conc,
            dims,
            reps,
            dist,
            seed,
            out,
            threads,
            timing,
        } => cmd_simulate(
            shape,
            kappa,
            conc,
            dims,
            reps,
            dist,
            seed,
            out.as_deref(),
            threads,
            timing,
        ),
        Command::CheckJacobian { tau, n, h } => cmd_check_jacobian(&tau, n, h),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: numerical failure in stage `{}`: {e}", e.stage());
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(CliError::CheckFailed) => {
            eprintln!("error: Jacobian check failed");
            ExitCode::from(EXIT_CHECK)
        }
    }
}

pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}
