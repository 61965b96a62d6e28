//! Command implementations behind the `bwrank` binary.
//!
//! Every command writes its report to a caller-supplied writer and returns
//! either `Ok(())` or a [`CliError`] carrying the process exit code.

pub mod commands;
pub mod config;
pub mod matio;
pub mod output;

use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const BREAKDOWN: u8 = 3;
    pub const NOT_PSD: u8 = 4;
    pub const DISTANCE_DISAGREEMENT: u8 = 5;
    pub const CERTIFICATE: u8 = 6;
    pub const REPRODUCE_FAILED: u8 = 7;
}

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "BWRANK_SEED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(exit::USAGE, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `BWRANK_SEED` if set, else `fallback`.
pub fn seed_from_env(fallback: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(fallback),
    }
}
