//! Pipeline commands and the annotation service behind the `tableparse`
//! binary.

pub mod commands;
pub mod service;
pub mod store;

use std::fmt;

/// A command failure, split by exit code: bad inputs exit 1, failures while
/// processing valid inputs exit 2.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Processing(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Processing(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}
