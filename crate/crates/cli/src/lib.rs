//! Command-line front end for entrolab: builds maps, runs the estimators and
//! pipelines, and writes JSON reports with optional CSV tables and SVG sketches.

pub mod args;
pub mod experiments;
pub mod maps;
pub mod report;
pub mod run;
pub mod sketch;

pub use args::{Cli, RunConfig, Verb};
pub use report::Report;
pub use run::{execute, exit_code, run};

/// Exit code 1.
pub const EXIT_USAGE: i32 = 1;
/// Exit code 2: a certificate, inequality or acceptance check failed.
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<entrolab::Error> for CliError {
    fn from(e: entrolab::Error) -> Self {
        use entrolab::Error::*;
        match e {
            Certificate { .. } | Inconsistent { .. } | Precondition { .. } | NoReturn(_) | NonFinite(_) | Escape { .. } => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}
