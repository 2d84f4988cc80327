//! Library surface of the command-line driver: loop-spec parsing and
//! output rendering, shared with the integration tests.

pub mod loopspec;
pub mod output;

/// CLI-level error with its process exit code: 2 for input errors, 3 for
/// non-liftable loops, 1 for I/O failures.
#[derive(Debug)]
pub struct CliError {
    message: String,
    pub code: i32,
}

impl CliError {
    fn new(message: String, code: i32) -> Self {
        CliError { message, code }
    }

    pub fn input(message: String) -> Self {
        Self::new(message, 2)
    }

    pub fn io(message: String) -> Self {
        Self::new(message, 1)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<bloch_holonomy::LoopError> for CliError {
    fn from(e: bloch_holonomy::LoopError) -> Self {
        let code = if matches!(e, bloch_holonomy::LoopError::NotLiftable(_)) { 3 } else { 2 };
        CliError::new(e.to_string(), code)
    }
}

impl From<bloch_holonomy::HolonomyError> for CliError {
    fn from(e: bloch_holonomy::HolonomyError) -> Self {
        use bloch_holonomy::{HolonomyError, LoopError};
        let code = match &e {
            HolonomyError::NotLiftable(_) => 3,
            HolonomyError::Loop(LoopError::NotLiftable(_)) => 3,
            _ => 2,
        };
        CliError::new(e.to_string(), code)
    }
}
