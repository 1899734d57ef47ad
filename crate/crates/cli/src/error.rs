//! Error type shared by the lexer, the parser, and command execution.
//!
//! All variants render as a single human-readable line; syntax errors carry
//! the 1-based source position of the offending token.  Every `CliError`
//! maps to exit code 3 (input error); certification verdicts are not errors
//! and travel through `Outcome` instead.

use thiserror::Error;
use wnhcalc_core::certify::CertError;
use wnhcalc_core::opalg::OpError;
use wnhcalc_core::ring::RingError;
use wnhcalc_core::varcalc::VarError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Op(#[from] OpError),
    #[error("{0}")]
    Var(#[from] VarError),
    #[error("{0}")]
    Ring(#[from] RingError),
    #[error("{0}")]
    Cert(#[from] CertError),
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn syntax(line: u32, col: u32, message: impl Into<String>) -> Self {
        CliError::Syntax { line, col, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }
}
