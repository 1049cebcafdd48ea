//! Command-line front end.
//!
//! Exit codes: 0 completed run, 2 usage error, 3 unknown problem or pair name,
//! 4 integrator error, 5 output failure.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use crate::controller::{integrate, ControllerConfig, StepPolicy, Trace};
use crate::problems::IVProblem;
use crate::report::{csv_export, figure1_export, json_export};
use crate::tableau::{MethodPair, ValidationOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN_NAME: i32 = 3;
pub const EXIT_INTEGRATOR: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "rk-error-lab",
    version,
    about = "Run local-extrapolation error control on a built-in problem and trace the global error"
)]
struct Args {
    /// Problem registry name
    #[arg(long, default_value = "paper_exponential")]
    problem: String,
    /// Method pair registry name
    #[arg(long, default_value = "rk3_rk4")]
    pair: String,
    /// Absolute local error tolerance
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    delta: f64,
    /// Safety factor in (0, 1]
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    sigma: f64,
    /// Step-size policy after an accepted step
    #[arg(long, default_value = "proportional", value_parser = ["proportional", "reject-only"])]
    policy: String,
    /// Initial stepsize (default: probe from one trial step)
    #[arg(long, allow_negative_numbers = true)]
    h_init: Option<f64>,
    /// Override the problem's final abscissa
    #[arg(long, allow_negative_numbers = true)]
    x_end: Option<f64>,
    /// Cap on accepted steps
    #[arg(long)]
    max_steps: Option<usize>,
    /// Write the per-step trace here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON summary here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write x, |eps_lower|, |alpha_term| series here
    #[arg(long)]
    figure1: Option<PathBuf>,
    /// Skip the c_p = sum_q a_pq check when validating tableaus
    #[arg(long)]
    allow_nonstandard_abscissae: bool,
    /// Print nothing on success
    #[arg(long)]
    quiet: bool,
    /// List registry names and exit
    #[arg(long)]
    list: bool,
}

/// A validated run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: String,
    pub pair: String,
    pub delta: f64,
    pub sigma: f64,
    pub policy: StepPolicy,
    pub h_init: Option<f64>,
    pub x_end: Option<f64>,
    pub max_steps: Option<usize>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub figure1: Option<PathBuf>,
    pub allow_nonstandard_abscissae: bool,
    pub quiet: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            problem: "paper_exponential".into(),
            pair: "rk3_rk4".into(),
            delta: 1e-8,
            sigma: 0.8,
            policy: StepPolicy::Proportional,
            h_init: None,
            x_end: None,
            max_steps: None,
            csv: None,
            json: None,
            figure1: None,
            allow_nonstandard_abscissae: false,
            quiet: false,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// `--help`, `--version` or `--list`: print and exit 0.
    Info(String),
    Usage(String),
    UnknownName(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::UnknownName(_) => EXIT_UNKNOWN_NAME,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Info(m) | CliError::Usage(m) | CliError::UnknownName(m) => m,
        }
    }
}

fn registry_listing() -> String {
    format!(
        "problems: {}\npairs: {}\npolicies: proportional, reject-only\n",
        IVProblem::builtin_names().join(", "),
        MethodPair::builtin_names().join(", ")
    )
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    if args.list {
        return Err(CliError::Info(registry_listing()));
    }

    let usage = |msg: String| Err(CliError::Usage(format!("error: {msg}")));
    if !(args.delta > 0.0) || !args.delta.is_finite() {
        return usage(format!(
            "--delta must be a positive number, got {}",
            args.delta
        ));
    }
    if !(args.sigma > 0.0 && args.sigma <= 1.0) {
        return usage(format!("--sigma must lie in (0, 1], got {}", args.sigma));
    }
    if let Some(h) = args.h_init {
        if !(h > 0.0) {
            return usage(format!("--h-init must be positive, got {h}"));
        }
    }
    if args.max_steps == Some(0) {
        return usage("--max-steps must be at least 1".into());
    }
    if !IVProblem::builtin_names().contains(&args.problem.as_str()) {
        return Err(CliError::UnknownName(format!(
            "error: unknown problem `{}`\n{}",
            args.problem,
            registry_listing()
        )));
    }
    if !MethodPair::builtin_names().contains(&args.pair.as_str()) {
        return Err(CliError::UnknownName(format!(
            "error: unknown pair `{}`\n{}",
            args.pair,
            registry_listing()
        )));
    }

    Ok(RunSpec {
        problem: args.problem,
        pair: args.pair,
        delta: args.delta,
        sigma: args.sigma,
        policy: args.policy.parse().map_err(CliError::Usage)?,
        h_init: args.h_init,
        x_end: args.x_end,
        max_steps: args.max_steps,
        csv: args.csv,
        json: args.json,
        figure1: args.figure1,
        allow_nonstandard_abscissae: args.allow_nonstandard_abscissae,
        quiet: args.quiet,
    })
}

/// One-line statement of whether the global error stayed within the tolerance.
pub fn verdict(trace: &Trace) -> String {
    if !trace.has_diagnostics() {
        return format!(
            "verdict: `{}` has no exact solution; global error not measured",
            trace.problem
        );
    }
    let ratio = trace.final_error_ratio().unwrap_or(0.0);
    match trace.crossing() {
        None => format!(
            "verdict: global error stayed within delta = {:e} (final |global error|/delta = {ratio:.3})",
            trace.delta
        ),
        Some(c) => format!(
            "verdict: global error exceeded delta = {:e} at step {} (x = {:.4}); final |global error|/delta = {ratio:.3}",
            trace.delta, c.index, c.x
        ),
    }
}

fn build(spec: &RunSpec) -> Result<(MethodPair, IVProblem, ControllerConfig), (i32, String)> {
    let unknown = |e: crate::Error| (EXIT_UNKNOWN_NAME, format!("error: {e}"));
    let invalid = |e: crate::Error| (EXIT_USAGE, format!("error: {e}"));
    let opts = ValidationOptions {
        allow_nonstandard_abscissae: spec.allow_nonstandard_abscissae,
    };
    let pair = MethodPair::builtin(&spec.pair)
        .map_err(unknown)?
        .validated(opts)
        .map_err(invalid)?;
    let mut problem = IVProblem::builtin(&spec.problem).map_err(unknown)?;
    if let Some(x_end) = spec.x_end {
        problem = problem.with_x_end(x_end).map_err(invalid)?;
    }
    let mut cfg = ControllerConfig::for_problem(&problem, spec.delta)
        .with_sigma(spec.sigma)
        .with_policy(spec.policy);
    if let Some(h) = spec.h_init {
        cfg = cfg.with_h_init(h);
    }
    if let Some(n) = spec.max_steps {
        cfg = cfg.with_max_steps(n);
    }
    cfg.validate().map_err(invalid)?;
    Ok((pair, problem, cfg))
}

/// Executes a run and returns its exit code.
pub fn run(spec: &RunSpec) -> i32 {
    let (pair, problem, cfg) = match build(spec) {
        Ok(parts) => parts,
        Err((code, msg)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let trace = match integrate(&pair, &problem, &cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("integration failed: {e}");
            return EXIT_INTEGRATOR;
        }
    };

    let outputs = [
        (spec.csv.as_ref(), "csv"),
        (spec.json.as_ref(), "json"),
        (spec.figure1.as_ref(), "figure1"),
    ];
    for (path, kind) in outputs {
        let Some(path) = path else { continue };
        let result = match kind {
            "csv" => csv_export(&trace, path),
            "json" => json_export(&trace, path),
            _ => figure1_export(&trace, path),
        };
        if let Err(e) = result {
            eprintln!("failed to write {}: {e}", path.display());
            return EXIT_IO;
        }
    }

    if !spec.quiet {
        let s = &trace.summary;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(
            out,
            "{} with {} (delta = {:e}, sigma = {}, policy = {}): {} accepted, {} rejected, x_end = {}",
            spec.problem, spec.pair, spec.delta, spec.sigma, spec.policy, s.accepted, s.rejected, s.final_x
        );
        if let Some(i) = s.condition_violation_index {
            let _ = writeln!(out, "breakdown condition first violated at step {i}");
        }
        let _ = writeln!(out, "{}", verdict(&trace));
    }
    EXIT_OK
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(spec) => run(&spec),
        Err(CliError::Info(msg)) => {
            print!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.message().trim_end());
            e.exit_code()
        }
    }
}
