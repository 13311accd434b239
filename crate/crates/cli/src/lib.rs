//! Library half of the `olk` binary: bundle parsing, functional
//! evaluation, and the check-suite runner, kept callable so integration
//! tests can drive suites without spawning processes.

pub mod eval;
pub mod gen;
pub mod spec;
pub mod suites;

/// Failures split by exit code: `User` is a bad request (exit 2), `Failed`
/// is an internal computation that did not complete (exit 1).
#[derive(Debug)]
pub enum CliError {
    User(String),
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::User(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

/// Library errors during evaluation: everything that reflects the shape of
/// the inputs is the caller's problem; only solver non-convergence counts
/// as an internal failure.
pub fn core_err(e: olk_core::Error) -> CliError {
    match e {
        olk_core::Error::NonConvergence(_) => CliError::Failed(e.to_string()),
        _ => CliError::User(e.to_string()),
    }
}
