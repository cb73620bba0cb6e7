//! Command-line front end: sweeps and checks written as CSV with `#` metadata.

pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;

pub use config::{Cli, Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] dicke_core::Error),
    #[error("limit assertion failed: {0}")]
    Limits(String),
    #[error("oracle mismatch: {0}")]
    Oracle(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Limits(_) => 4,
            CliError::Oracle(_) => 5,
        }
    }
}

/// Result of one invocation. `stdout` holds the report unless `--out` was
/// given, in which case it went to the file.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn config_from_args<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    RunConfig::from_cli(&cli)
}

/// Runs `f` on a pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Produces the report text. Failing limit or oracle checks still return
/// their full text alongside the error.
pub fn execute(cfg: &RunConfig) -> (String, Result<(), CliError>) {
    let run = || -> Result<(String, Result<(), CliError>), CliError> {
        Ok(match cfg.command {
            Command::Thermo { .. } => (commands::render_thermo(cfg, &commands::thermo_rows(cfg)?), Ok(())),
            Command::Gap => (commands::render_gap(cfg, &commands::gap_table(cfg)?), Ok(())),
            Command::Concurrence => {
                (commands::render_concurrence(cfg, &commands::concurrence_table(cfg)?), Ok(()))
            }
            Command::Limits => {
                let (text, ok) = commands::limits_report(cfg)?;
                let failing: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL ")).map(|l| &l[5..]).collect();
                let status = if ok { Ok(()) } else { Err(CliError::Limits(failing.join("; "))) };
                (text, status)
            }
            Command::OracleCheck { .. } => {
                let report = commands::oracle_report(cfg)?;
                let text = commands::render_oracle(cfg, &report);
                let status = match report.worst() {
                    None => Ok(()),
                    Some(w) => Err(CliError::Oracle(format!(
                        "worst offender {}: deviation={:e}, tol={:e}",
                        w.name, w.deviation, w.tol
                    ))),
                };
                (text, status)
            }
        })
    };
    match with_threads(cfg.threads, run) {
        Ok(Ok(pair)) => pair,
        Ok(Err(e)) | Err(e) => (String::new(), Err(e)),
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let (text, status) = execute(&cfg);
    let mut out = Outcome::default();
    if !text.is_empty() {
        match &cfg.out {
            Some(path) => {
                if let Err(source) = std::fs::write(path, &text) {
                    let e = CliError::Io { path: path.display().to_string(), source };
                    return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") };
                }
            }
            None => out.stdout = text,
        }
    }
    if let Err(e) = status {
        out.code = e.exit_code();
        out.stderr = format!("error: {e}\n");
    }
    out
}
