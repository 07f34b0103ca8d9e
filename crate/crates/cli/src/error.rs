use std::fmt;
use std::process::ExitCode;

use crate::config::ConfigError;

/// Failure of a subcommand, split by exit code: 1 for bad input, 2 for a
/// numerical failure or an unwritable output.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(1),
            CliError::Numerical(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<nfteig::Error> for CliError {
    fn from(e: nfteig::Error) -> Self {
        use nfteig::Error as E;
        match e {
            E::EvenSampleCount(_)
            | E::Validation(_)
            | E::DegenerateSpectrum(..)
            | E::IndexOutOfRange { .. }
            | E::Shape(_)
            | E::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub fn write_failed(path: &std::path::Path, e: impl fmt::Display) -> CliError {
    CliError::Numerical(format!("cannot write {}: {e}", path.display()))
}
