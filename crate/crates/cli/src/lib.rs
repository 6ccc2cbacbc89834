//! Library side of the `watermelon` command line tool: configuration,
//! table emission and the command implementations.

pub mod commands;
pub mod config;
pub mod table;

use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const IO: i32 = 3;
    pub const BAD_VALUE: i32 = 4;
    pub const CONFLICT: i32 = 5;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    /// Unknown flag, command or configuration key.
    Usage(String),
    /// Malformed or out-of-range value.
    Value(String),
    /// Mutually exclusive options.
    Conflict(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => exit::USAGE,
            Failure::Value(_) => exit::BAD_VALUE,
            Failure::Conflict(_) => exit::CONFLICT,
            Failure::Numerical(_) => exit::NUMERICAL,
            Failure::Io(_) => exit::IO,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Value(m) => write!(f, "invalid value: {m}"),
            Failure::Conflict(m) => write!(f, "conflicting options: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<watermelon_core::Error> for Failure {
    fn from(e: watermelon_core::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else if e.is_usage() {
            Failure::Value(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}
