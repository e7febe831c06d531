//! Command-line front end: CSV in, JSON reports out.
//!
//! Exit codes: 0 success without drift, 1 usage error, 2 data error,
//! 3 drift detected.

pub mod args;
mod commands;
pub mod data;
pub mod report;
pub mod sequence;

use clap::Parser;
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

pub use args::Cli;
pub use data::{load_dataset, LoadError, Schema};
pub use report::{render_report, write_report, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DRIFT: i32 = 3;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "MLQC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("error[{code}]: {message}")]
    Data { code: &'static str, message: String },
}

impl CliError {
    pub fn data(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Data { code, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::data("io", format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data { .. } => EXIT_DATA,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::data(e.code(), e.to_string())
    }
}

impl From<mlqc::Error> for CliError {
    fn from(e: mlqc::Error) -> Self {
        match e {
            mlqc::Error::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::data("analysis", other.to_string()),
        }
    }
}

/// Runs the parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    commands::execute(cli)
}

/// Full invocation: parse, run, emit the report, and map the outcome to an
/// exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = execute(&cli).and_then(|report| {
        let text = render_report(&report).map_err(|e| CliError::data("io", e.to_string()))?;
        match &cli.out {
            Some(path) => std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?,
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::data("io", e.to_string()))?,
        }
        Ok(report)
    });
    match outcome {
        Ok(report) if report.any_drift() => EXIT_DRIFT,
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
