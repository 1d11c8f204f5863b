//! Command-line front end: `khessian <subcommand> --config <path>`.
//!
//! Exit codes: 0 when every verdict passes, 2 when one fails, 1 on errors.

pub mod commands;
pub mod config;
pub mod demo;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{Format, GridConfig, OutputConfig, RunConfig};

use crate::error::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Worker thread cap.
pub const THREADS_ENV: &str = "KHESSIAN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Spectra of the given matrices
    Eig,
    /// S_k / k-trace tables
    Symm,
    /// Gamma_k and dual cone verdicts
    Cone,
    /// Spectral, weak-integral and viscosity k-convexity tests
    Check,
    /// Ball masses, density probes and decomposition report
    Measure,
    /// Hölder, gradient L^q and BV estimates
    Regularity,
    /// Taylor remainder scans
    Taylor,
    /// Reduced acceptance scenarios end to end
    Demo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Symm => "symm",
            Command::Cone => "cone",
            Command::Check => "check",
            Command::Measure => "measure",
            Command::Regularity => "regularity",
            Command::Taylor => "taylor",
            Command::Demo => "demo",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "khessian", version, about = "Numerical laboratory for k-convex functions")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination (stdout if absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Result of one subcommand: the JSON report, the overall verdict and a
/// fixed-column table for CSV output.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Outcome {
    pub fn new(report: Value, passed: bool, columns: &[&'static str], rows: Vec<Vec<String>>) -> Self {
        Self { report, passed, columns: columns.to_vec(), rows }
    }

    pub fn to_json(&self, command: Command, seed: u64) -> String {
        let env = json!({ "command": command.name(), "seed": seed, "passed": self.passed, "report": self.report });
        let mut s = crate::json::to_string_pretty(&env).expect("JSON values serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed { EXIT_PASS } else { EXIT_FAIL }
    }
}

/// Caps the global rayon pool from `KHESSIAN_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::ConfigInvalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a pool already built by an earlier call in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(c) = &cfg.command {
        if c != command.name() {
            return Err(Error::ConfigInvalid(format!("command: config is for `{c}`, invoked as `{}`", command.name())));
        }
    }
    match command {
        Command::Eig => commands::eig(cfg),
        Command::Symm => commands::symm(cfg),
        Command::Cone => commands::cone(cfg),
        Command::Check => commands::check(cfg),
        Command::Measure => commands::measure(cfg),
        Command::Regularity => commands::regularity(cfg),
        Command::Taylor => commands::taylor(cfg),
        Command::Demo => demo::demo(cfg),
    }
}

fn run_inner(args: &Args) -> Result<i32> {
    configure_threads()?;
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None if args.command == Command::Demo => RunConfig::from_str("{}")?,
        None => return Err(Error::ConfigInvalid("--config is required".into())),
    };
    let outcome = execute(args.command, &cfg)?;
    let out_cfg = cfg.output.clone().unwrap_or_default();
    let format = args.format.or(out_cfg.format).unwrap_or(Format::Json);
    let text = match format {
        Format::Json => outcome.to_json(args.command, cfg.seed),
        Format::Csv => outcome.to_csv(),
    };
    match args.out.clone().or(out_cfg.path) {
        Some(p) => std::fs::write(&p, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.exit_code())
}

/// Runs the parsed invocation and returns the process exit code; errors are
/// reported on stderr.
pub fn run(args: &Args) -> i32 {
    match run_inner(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("khessian: {e}");
            EXIT_ERROR
        }
    }
}
