//! Orchestration behind the `cdgreen` binary: configuration, the six
//! commands, and their CSV / JSON / SVG artifacts.
//!
//! Every command writes `<command>_summary.json` listing its gated checks;
//! the run passes iff every check passes.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use cdgreen::Execution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::RunConfig;
pub use error::CliError;
pub use report::{Check, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eval,
    Norms,
    Scaling,
    Fd,
    Residual,
    Selfcheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Norms => "norms",
            Command::Scaling => "scaling",
            Command::Fd => "fd",
            Command::Residual => "residual",
            Command::Selfcheck => "selfcheck",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    /// Relative quadrature tolerance; the library default when absent.
    pub tol: Option<f64>,
    pub format: Format,
    pub svg: bool,
    pub scale: svg::Scale,
    pub exec: Execution,
}

impl Options {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Options {
            out: out.into(),
            tol: None,
            format: Format::Csv,
            svg: false,
            scale: svg::Scale::Log,
            exec: Execution::default(),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(cdgreen::quadrature::DEFAULT_REL_TOL)
    }
}

/// Hash identifying a run: the canonical configuration plus the overrides
/// that change numbers (the tolerance).
pub fn run_hash(config: &RunConfig, opts: &Options) -> String {
    let mut h = Sha256::new();
    h.update(config.sha256().as_bytes());
    h.update(format!("tol={:?}", opts.tol).as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `command` and writes its artifacts under `opts.out`.
pub fn run(command: Command, config: &RunConfig, opts: &Options) -> Result<Summary, CliError> {
    if let Some(t) = opts.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {t}")));
        }
    }
    let mut rep = report::Reporter::new(&opts.out, command.name(), &run_hash(config, opts))?;
    match command {
        Command::Eval => commands::eval::run(config, opts, &mut rep)?,
        Command::Norms => commands::norms::run(config, opts, &mut rep)?,
        Command::Scaling => commands::scaling::run(config, opts, &mut rep)?,
        Command::Fd => commands::fd::run(config, opts, &mut rep)?,
        Command::Residual => commands::residual::run(config, opts, &mut rep)?,
        Command::Selfcheck => commands::selfcheck::run(config, opts, &mut rep)?,
    }
    rep.finish()
}
