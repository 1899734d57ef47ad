//! Session-file front end for the weakly nonlocal operator calculus.
//!
//! A session file declares fields, algebraic constants, nonlocal variables,
//! named expressions, and named operators; each invocation of the binary
//! parses the session, runs one command against it, and renders a typed
//! outcome as text or canonical JSON.  The exit code encodes the verdict:
//! 0 verified/value, 1 refuted, 2 inconclusive, 3 input error.

pub mod error;
pub mod exec;
pub mod lex;
pub mod parse;
pub mod print;
pub mod report;
pub mod session;

pub use error::CliError;
pub use exec::{execute, Command, Outcome, Request, Status};
pub use parse::parse_session;
pub use print::Pr;
pub use session::{Session, Value};
