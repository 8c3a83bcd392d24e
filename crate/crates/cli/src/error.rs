//! CLI error taxonomy, mapped one-to-one onto the process exit codes.

use std::fmt;

/// What went wrong, from the shell's point of view.
///
/// The variants partition the documented exit codes: bad input is the
/// caller's problem (2), a numeric refusal is the state's problem (3), and a
/// partial sweep is a soft failure that still wrote its output files (4).
#[derive(Debug)]
pub enum CliError {
    /// Unparsable or inconsistent arguments, config, or state file; an
    /// unwritable output directory counts too.
    Input(String),
    /// The library refused the computation (truncation leakage, domain
    /// violation, numerical inconsistency). The inner error carries the
    /// diagnostics, e.g. the measured leakage against its threshold.
    Numeric(fockbound::Error),
    /// An entanglement sweep completed but resolved fewer cells than the
    /// success threshold; output files were still written.
    PartialSweep { resolved: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::PartialSweep { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::PartialSweep { resolved, total } => write!(
                f,
                "sweep resolved only {resolved} of {total} cells (below the 95% threshold)"
            ),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fockbound::Error> for CliError {
    fn from(e: fockbound::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Wraps an I/O failure with the path it concerned; all I/O problems are
/// input errors as far as the exit code goes.
pub fn io_err(context: &str, path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{context} {}: {e}", path.display()))
}
