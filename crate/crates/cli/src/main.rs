//! The `wnhcalc` binary: argument parsing and top-level dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use wnhcalc_cli::error::CliError;
use wnhcalc_cli::exec::{execute, Command, Outcome, Request, Status};
use wnhcalc_cli::parse::parse_session;
use wnhcalc_cli::report::{render_json, render_text};

#[derive(Parser)]
#[command(name = "wnhcalc", version, about = "Exact calculus of weakly nonlocal Hamiltonian and symplectic operators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Session file declaring fields, constants, expressions, and operators.
    #[arg(long, global = true, value_name = "FILE")]
    session: Option<PathBuf>,
    /// Emit the outcome as canonical JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Truncation depth for series expansion and inverse verification.
    #[arg(long, global = true, default_value_t = 8, value_name = "N")]
    truncate: u32,
    /// Refuse to introduce fresh nonlocal variables for unresolved integrals.
    #[arg(long = "strict-nonlocal", global = true)]
    strict_nonlocal: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonicalize an expression, or evaluate it at a rational point.
    Eval {
        /// Expression or declared name.
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Assignments `u=1, u_1=1/2, x=0` for numerical evaluation.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Formal adjoint of a declared operator.
    Adjoint {
        #[arg(long)]
        op: String,
    },
    /// Composition of two declared operators.
    Compose {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Apply a declared operator to a vector of expressions.
    Apply {
        #[arg(long)]
        op: String,
        /// Tuple or scalar the operator acts on.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
    /// Lie derivative of an operator or covector along a vector field.
    Lie {
        /// Components of the vector field.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        /// Operator to transport.
        #[arg(long, conflicts_with = "covector")]
        op: Option<String>,
        /// Covector to transport.
        #[arg(long, allow_hyphen_values = true)]
        covector: Option<String>,
    },
    /// Variational derivative of a density.
    Euler {
        #[arg(long, allow_hyphen_values = true)]
        density: String,
    },
    /// Reconstruct the potential of a differential operator by the homotopy
    /// integral and re-verify it.
    Homotopy {
        #[arg(long)]
        op: String,
    },
    /// Certify that a weakly nonlocal skew operator is symplectic.
    CertifySymplectic {
        #[arg(long)]
        j: String,
        /// Claimed tail densities, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        densities: Option<String>,
    },
    /// Certify that two operators form a compatible pair through the
    /// inverse-based decomposition.
    CertifyCompatible {
        #[arg(long)]
        p: String,
        #[arg(long)]
        ptilde: String,
        /// Symplectic left inverse of `--p`.
        #[arg(long)]
        j: String,
    },
    /// Certify a compatible pair and the Hamiltonian property of the second
    /// operator.
    CertifyHamiltonian {
        #[arg(long)]
        p: String,
        #[arg(long)]
        ptilde: String,
        #[arg(long)]
        j: String,
    },
    /// Test which densities generate Casimir functionals of an operator.
    Casimir {
        #[arg(long)]
        p: String,
        /// Candidate densities, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
    },
    /// Structural and certificate check for zero-order symplectic candidates.
    ZeroOrder {
        #[arg(long)]
        j: String,
    },
    /// Validate a metric of hydrodynamic type and report its curvature.
    DnValidate {
        /// Declared operator whose zero-order entries form the metric.
        #[arg(long)]
        metric: String,
    },
    /// Push a metric through candidate flat coordinates.
    DnCanonical {
        #[arg(long)]
        metric: String,
        /// Components of the coordinate map.
        #[arg(long, allow_hyphen_values = true)]
        map: String,
    },
    /// Expand a declared operator as a truncated series in powers of `D`.
    Expand {
        #[arg(long)]
        op: String,
    },
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Eval { expr, at } => Command::Eval { expr, at },
            Cmd::Adjoint { op } => Command::Adjoint { op },
            Cmd::Compose { left, right } => Command::Compose { left, right },
            Cmd::Apply { op, to } => Command::Apply { op, to },
            Cmd::Lie { tau, op, covector } => Command::Lie { tau, op, covector },
            Cmd::Euler { density } => Command::Euler { density },
            Cmd::Homotopy { op } => Command::Homotopy { op },
            Cmd::CertifySymplectic { j, densities } => {
                Command::CertifySymplectic { j, densities }
            }
            Cmd::CertifyCompatible { p, ptilde, j } => {
                Command::CertifyCompatible { p, ptilde, j }
            }
            Cmd::CertifyHamiltonian { p, ptilde, j } => {
                Command::CertifyHamiltonian { p, ptilde, j }
            }
            Cmd::Casimir { p, psi } => Command::Casimir { p, psi },
            Cmd::ZeroOrder { j } => Command::ZeroOrder { j },
            Cmd::DnValidate { metric } => Command::DnValidate { metric },
            Cmd::DnCanonical { metric, map } => Command::DnCanonical { metric, map },
            Cmd::Expand { op } => Command::Expand { op },
        }
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let command: Command = cli.cmd.into();
    let req = Request { command, truncate: cli.truncate, strict: cli.strict_nonlocal };

    let outcome = match load_session(cli.session.as_deref()) {
        Ok(session) => execute(&session, &req),
        Err(e) => {
            let mut out = Outcome {
                command: req.command.name(),
                status: Status::Error,
                result: serde_json::Map::new(),
                residual: None,
                diagnostics: Vec::new(),
            };
            out.diagnostics.push(e.to_string());
            out
        }
    };
    let timing_ms = start.elapsed().as_millis() as u64;
    if cli.json {
        println!("{}", render_json(&outcome, timing_ms));
    } else {
        print!("{}", render_text(&outcome, timing_ms));
    }
    outcome.status.exit_code()
}

fn load_session(path: Option<&std::path::Path>) -> Result<wnhcalc_cli::Session, CliError> {
    let path = path.ok_or_else(|| CliError::input("pass `--session FILE`"))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_session(&text)
}
