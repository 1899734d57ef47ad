//! Command execution: resolves names against the session, calls into the
//! computation crate, and packages a typed `Outcome`.
//!
//! Every verdict travels as an `Outcome`; errors never panic across this
//! boundary.  An unresolved nonlocal integral is not an error but an
//! inconclusive verdict naming the surviving density, so strict mode
//! degrades a computation instead of crashing it.

use serde_json::json;

use wnhcalc_core::certify::{
    casimir_check, compatibility_certificate, dn_canonical, dn_operator, dn_validate,
    hamiltonian_pair_certificate, homotopy_potential, wnl_symplectic_certificate, CertError,
    CertOutcome, SymplecticCertificate, zero_order_check,
};
use wnhcalc_core::geom::{lie_covector, lie_operator};
use wnhcalc_core::opalg::{expand_truncated, OpError, PDOperator, Variance};
use wnhcalc_core::ring::{DiffExpr, KNum, NonlocalSymbol, RingError};
use wnhcalc_core::varcalc::{euler, ResolutionMode, VarError};

use crate::error::CliError;
use crate::parse::{parse_assignments, parse_scalar_arg, parse_scalar_list_arg, parse_value_arg};
use crate::print::Pr;
use crate::session::Session;

type JMap = serde_json::Map<String, serde_json::Value>;

/// Verdict classes, in the order of their exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Verified,
    Refuted,
    Inconclusive,
    Value,
    Error,
}

impl Status {
    pub fn text(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
            Status::Value => "value",
            Status::Error => "error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified | Status::Value => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }
}

/// One executed command: its verdict, canonical-string payload, optional
/// residual, and human-readable diagnostics.
#[derive(Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub status: Status,
    pub result: JMap,
    pub residual: Option<String>,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn new(command: &'static str, status: Status) -> Outcome {
        Outcome { command, status, result: JMap::new(), residual: None, diagnostics: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    Eval { expr: String, at: Option<String> },
    Adjoint { op: String },
    Compose { left: String, right: String },
    Apply { op: String, to: String },
    Lie { tau: String, op: Option<String>, covector: Option<String> },
    Euler { density: String },
    Homotopy { op: String },
    CertifySymplectic { j: String, densities: Option<String> },
    CertifyCompatible { p: String, ptilde: String, j: String },
    CertifyHamiltonian { p: String, ptilde: String, j: String },
    Casimir { p: String, psi: String },
    ZeroOrder { j: String },
    DnValidate { metric: String },
    DnCanonical { metric: String, map: String },
    Expand { op: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Adjoint { .. } => "adjoint",
            Command::Compose { .. } => "compose",
            Command::Apply { .. } => "apply",
            Command::Lie { .. } => "lie",
            Command::Euler { .. } => "euler",
            Command::Homotopy { .. } => "homotopy",
            Command::CertifySymplectic { .. } => "certify-symplectic",
            Command::CertifyCompatible { .. } => "certify-compatible",
            Command::CertifyHamiltonian { .. } => "certify-hamiltonian",
            Command::Casimir { .. } => "casimir",
            Command::ZeroOrder { .. } => "zero-order",
            Command::DnValidate { .. } => "dn-validate",
            Command::DnCanonical { .. } => "dn-canonical",
            Command::Expand { .. } => "expand",
        }
    }
}

/// A command plus the global knobs that modulate it.
#[derive(Clone, Debug)]
pub struct Request {
    pub command: Command,
    pub truncate: u32,
    pub strict: bool,
}

pub fn execute(session: &Session, req: &Request) -> Outcome {
    let pr = Pr::for_session(session);
    match run(session, req, &pr) {
        Ok(outcome) => outcome,
        Err(e) => degrade(req.command.name(), e, &pr),
    }
}

/// Maps an error to its outcome: unresolved integrals and compositions that
/// leave the weakly nonlocal class are inconclusive verdicts, everything
/// else is an input error.
fn degrade(command: &'static str, e: CliError, pr: &Pr) -> Outcome {
    if let Some(residue) = irreducible_residue(&e) {
        let mut out = Outcome::new(command, Status::Inconclusive);
        out.diagnostics.push(format!(
            "the integral of `{}` cannot be resolved against the declared nonlocal variables",
            pr.expr(residue)
        ));
        return out;
    }
    if let Some(middle) = nonexact_middle(&e) {
        let mut out = Outcome::new(command, Status::Inconclusive);
        out.diagnostics.push(format!(
            "the composition leaves the weakly nonlocal class: the middle density `{}` is not exact",
            pr.expr(middle)
        ));
        return out;
    }
    let mut out = Outcome::new(command, Status::Error);
    out.diagnostics.push(e.to_string());
    out
}

fn irreducible_residue(e: &CliError) -> Option<&DiffExpr> {
    let var = match e {
        CliError::Var(v) => v,
        CliError::Op(OpError::Var(v)) => v,
        CliError::Cert(CertError::Var(v)) => v,
        CliError::Cert(CertError::Op(OpError::Var(v))) => v,
        _ => return None,
    };
    match var {
        VarError::Irreducible { residue } => Some(residue),
        _ => None,
    }
}

fn nonexact_middle(e: &CliError) -> Option<&DiffExpr> {
    let op = match e {
        CliError::Op(o) => o,
        CliError::Cert(CertError::Op(o)) => o,
        _ => return None,
    };
    match op {
        OpError::NotWeaklyNonlocal { middle } => Some(middle),
        _ => None,
    }
}

fn run(s: &Session, req: &Request, pr: &Pr) -> Result<Outcome, CliError> {
    let mode = if req.strict { ResolutionMode::Strict } else { ResolutionMode::Lax };
    match &req.command {
        Command::Eval { expr, at } => eval_cmd(s, pr, expr, at.as_deref()),
        Command::Adjoint { op } => {
            let a = op_ref(s, op)?.adjoint().normal_form()?;
            let mut out = Outcome::new("adjoint", Status::Value);
            out.result.insert("operator".into(), json!(pr.op(&a)));
            Ok(out)
        }
        Command::Compose { left, right } => {
            let l = op_ref(s, left)?;
            let r = op_ref(s, right)?;
            let c = l.compose_with_symbols(r, &s.symbols())?.normal_form()?;
            let mut out = Outcome::new("compose", Status::Value);
            out.result.insert("operator".into(), json!(pr.op(&c)));
            Ok(out)
        }
        Command::Apply { op, to } => {
            let a = op_ref(s, op)?;
            let v = components_arg(s, to, a.cols(), "the operator argument")?;
            let applied = a.apply(&v, &s.symbols(), mode)?;
            let mut out = Outcome::new("apply", Status::Value);
            let comps: Vec<String> = applied.components.iter().map(|e| pr.expr(e)).collect();
            out.result.insert("components".into(), json!(comps));
            insert_introduced(&mut out, pr, &applied.introduced);
            Ok(out)
        }
        Command::Lie { tau, op, covector } => lie_cmd(s, pr, mode, tau, op.as_deref(), covector.as_deref()),
        Command::Euler { density } => {
            let f = parse_scalar_arg(density, s)?;
            let grad = euler(&f, s.n())?;
            let mut out = Outcome::new("euler", Status::Value);
            let comps: Vec<String> = grad.iter().map(|e| pr.expr(e)).collect();
            out.result.insert("gradient".into(), json!(comps));
            Ok(out)
        }
        Command::Homotopy { op } => {
            let j = op_ref(s, op)?.with_variance(Variance::symplectic());
            let hp = homotopy_potential(&j)?;
            let status = if hp.reproduces { Status::Verified } else { Status::Refuted };
            let mut out = Outcome::new("homotopy", status);
            let zeta: Vec<String> = hp.zeta.iter().map(|e| pr.expr(e)).collect();
            out.result.insert("zeta".into(), json!(zeta));
            out.result.insert("reproduces".into(), json!(hp.reproduces));
            if !hp.reproduces {
                out.residual = Some(pr.op(&hp.residual));
                out.diagnostics.push(
                    "the reconstructed potential does not reproduce the operator".into(),
                );
            }
            Ok(out)
        }
        Command::CertifySymplectic { j, densities } => {
            let jop = op_ref(s, j)?.with_variance(Variance::symplectic());
            let dens = match densities {
                Some(text) => Some(parse_scalar_list_arg(text, s)?),
                None => None,
            };
            let verdict = wnl_symplectic_certificate(
                &jop,
                dens.as_deref(),
                &s.symbols(),
                &s.algebraic_constants(),
            )?;
            let mut out = cert_outcome("certify-symplectic", pr, verdict, |out, c| {
                insert_symplectic(out, pr, &c);
            });
            if out.status == Status::Verified {
                out.diagnostics.push("the potential reproduces the operator exactly".into());
            }
            Ok(out)
        }
        Command::CertifyCompatible { p, ptilde, j } => {
            let (pop, ptop, jop) = pair_refs(s, p, ptilde, j)?;
            let verdict = compatibility_certificate(&pop, &ptop, &jop, &s.symbols(), req.truncate)?;
            Ok(cert_outcome("certify-compatible", pr, verdict, |out, c| {
                insert_compat(out, pr, &c);
            }))
        }
        Command::CertifyHamiltonian { p, ptilde, j } => {
            let (pop, ptop, jop) = pair_refs(s, p, ptilde, j)?;
            let compat = compatibility_certificate(&pop, &ptop, &jop, &s.symbols(), req.truncate)?;
            let cc = match compat {
                CertOutcome::Certified(cc) => cc,
                other => {
                    let mut out = cert_outcome("certify-hamiltonian", pr, other, |out, c| {
                        insert_compat(out, pr, &c);
                    });
                    out.diagnostics.insert(0, "the compatibility stage did not certify".into());
                    return Ok(out);
                }
            };
            let verdict = hamiltonian_pair_certificate(&pop, &ptop, &jop, &cc, &s.symbols())?;
            Ok(cert_outcome("certify-hamiltonian", pr, verdict, |out, h| {
                insert_compat(out, pr, &cc);
                let tt: Vec<String> = h.tau_tilde.iter().map(|e| pr.expr(e)).collect();
                out.result.insert("tau_tilde".into(), json!(tt));
                let gt: Vec<String> = h.gamma_tilde.iter().map(|e| pr.expr(e)).collect();
                out.result.insert("gamma_tilde".into(), json!(gt));
                let l: Vec<serde_json::Value> = h
                    .l_data
                    .iter()
                    .map(|(w, d)| json!({"weight": pr.knum(w), "density": pr.expr(d)}))
                    .collect();
                out.result.insert("l".into(), json!(l));
                let m: Vec<serde_json::Value> = h
                    .m_data
                    .iter()
                    .map(|(w, d)| json!({"weight": pr.knum(w), "density": pr.expr(d)}))
                    .collect();
                out.result.insert("m".into(), json!(m));
                let mut syms = cc.introduced.clone();
                for sym in &h.introduced {
                    if !syms.contains(sym) {
                        syms.push(sym.clone());
                    }
                }
                insert_introduced_list(out, pr, &syms);
            }))
        }
        Command::Casimir { p, psi } => {
            let pop = op_ref(s, p)?.with_variance(Variance::hamiltonian());
            let psis = parse_scalar_list_arg(psi, s)?;
            let verdicts = casimir_check(&pop, &psis, &s.symbols())?;
            let all = verdicts.iter().all(|v| v.is_casimir);
            let mut out =
                Outcome::new("casimir", if all { Status::Verified } else { Status::Refuted });
            let rows: Vec<serde_json::Value> = psis
                .iter()
                .zip(&verdicts)
                .map(|(d, v)| {
                    let witness: Vec<String> = v.witness.iter().map(|e| pr.expr(e)).collect();
                    json!({"density": pr.expr(d), "casimir": v.is_casimir, "witness": witness})
                })
                .collect();
            out.result.insert("verdicts".into(), json!(rows));
            for (d, v) in psis.iter().zip(&verdicts) {
                if !v.is_casimir {
                    out.diagnostics.push(format!(
                        "`{}` is not a Casimir density; the operator maps its gradient to {}",
                        pr.expr(d),
                        pr.tuple(&v.witness)
                    ));
                }
            }
            if let Some(v) = verdicts.iter().find(|v| !v.is_casimir) {
                out.residual = Some(pr.tuple(&v.witness));
            }
            Ok(out)
        }
        Command::ZeroOrder { j } => {
            let jop = op_ref(s, j)?.with_variance(Variance::symplectic());
            let report = zero_order_check(&jop, &s.symbols(), &s.algebraic_constants())?;
            if !report.form_ok {
                let mut out = Outcome::new("zero-order", Status::Refuted);
                out.result.insert("form_ok".into(), json!(false));
                out.result.insert("violations".into(), json!(report.violations));
                out.diagnostics = report.violations;
                return Ok(out);
            }
            let verdict = report.certificate.expect("certificate runs when the form is admissible");
            let mut out = cert_outcome("zero-order", pr, verdict, |out, c| {
                insert_symplectic(out, pr, &c);
            });
            out.result.insert("form_ok".into(), json!(true));
            out.result.insert("violations".into(), json!(Vec::<String>::new()));
            Ok(out)
        }
        Command::DnValidate { metric } => {
            let g = metric_arg(s, metric)?;
            let data = dn_validate(&g)?;
            let status = if data.flat { Status::Verified } else { Status::Refuted };
            let mut out = Outcome::new("dn-validate", status);
            out.result.insert("flat".into(), json!(data.flat));
            out.result.insert(
                "christoffel".into(),
                tensor3_json(pr, &data.christoffel),
            );
            out.result.insert("b".into(), tensor3_json(pr, &data.b));
            let curv: Vec<serde_json::Value> = data
                .curvature
                .iter()
                .map(|(i, j, k, l, e)| json!({"indices": [i, j, k, l], "value": pr.expr(e)}))
                .collect();
            out.result.insert("curvature".into(), json!(curv));
            if data.flat {
                out.result.insert("operator".into(), json!(pr.op(&dn_operator(&data))));
            } else if let Some((i, j, k, l, e)) = data.curvature.first() {
                out.residual = Some(format!("R[{i},{j},{k},{l}] = {}", pr.expr(e)));
                out.diagnostics.push(format!(
                    "the metric is not flat: curvature component R[{i},{j},{k},{l}] = {}",
                    pr.expr(e)
                ));
            }
            Ok(out)
        }
        Command::DnCanonical { metric, map } => {
            let g = metric_arg(s, metric)?;
            let psi = components_arg(s, map, s.n(), "the coordinate map")?;
            let report = dn_canonical(&g, &psi)?;
            let status = if report.is_flat_chart { Status::Verified } else { Status::Refuted };
            let mut out = Outcome::new("dn-canonical", status);
            out.result.insert("eta".into(), json!(matrix_str(pr, &report.eta)));
            out.result.insert("flat_chart".into(), json!(report.is_flat_chart));
            match report.p_can {
                Some(p) => {
                    out.result.insert("operator".into(), json!(pr.op(&p)));
                }
                None => {
                    out.residual = Some(matrix_str(pr, &report.eta));
                    out.diagnostics.push(
                        "the transformed metric is not constant diagonal with entries 1 or -1"
                            .into(),
                    );
                }
            }
            Ok(out)
        }
        Command::Expand { op } => {
            let a = op_ref(s, op)?.normal_form()?;
            let series = expand_truncated(&a, -(req.truncate as i64));
            let mut out = Outcome::new("expand", Status::Value);
            out.result.insert("series".into(), json!(pr.series(&series)));
            out.result.insert("truncated_below".into(), json!(-(req.truncate as i64)));
            Ok(out)
        }
    }
}

fn eval_cmd(
    s: &Session,
    pr: &Pr,
    expr: &str,
    at: Option<&str>,
) -> Result<Outcome, CliError> {
    let value = parse_value_arg(expr, s)?;
    let mut out = Outcome::new("eval", Status::Value);
    let rendered = match at {
        None => pr.value(&value),
        Some(at_text) => {
            let point = parse_assignments(at_text, s)?;
            let nums: Vec<KNum> = value
                .components()
                .iter()
                .map(|e| {
                    e.eval(&point).map_err(|err| match err {
                        RingError::UnassignedVariable => CliError::input(
                            "the evaluation point leaves a variable unassigned; list every variable of the expression in --at",
                        ),
                        other => CliError::from(other),
                    })
                })
                .collect::<Result<_, _>>()?;
            let parts: Vec<String> = nums.iter().map(|k| pr.knum(k)).collect();
            if parts.len() == 1 {
                parts.into_iter().next().expect("one component")
            } else {
                format!("({})", parts.join(", "))
            }
        }
    };
    out.result.insert("value".into(), json!(rendered));
    Ok(out)
}

fn lie_cmd(
    s: &Session,
    pr: &Pr,
    mode: ResolutionMode,
    tau: &str,
    op: Option<&str>,
    covector: Option<&str>,
) -> Result<Outcome, CliError> {
    let q = components_arg(s, tau, s.n(), "the vector field")?;
    match (op, covector) {
        (Some(name), None) => {
            let a = op_ref(s, name)?;
            let derived = lie_operator(a, &q, &s.symbols(), mode)?;
            let mut out = Outcome::new("lie", Status::Value);
            out.result.insert("operator".into(), json!(pr.op(&derived.value.normal_form()?)));
            insert_introduced(&mut out, pr, &derived.introduced);
            Ok(out)
        }
        (None, Some(text)) => {
            let gamma = components_arg(s, text, s.n(), "the covector")?;
            let derived = lie_covector(&gamma, &q, s.n(), &s.symbols(), mode)?;
            let mut out = Outcome::new("lie", Status::Value);
            let comps: Vec<String> = derived.value.iter().map(|e| pr.expr(e)).collect();
            out.result.insert("covector".into(), json!(comps));
            insert_introduced(&mut out, pr, &derived.introduced);
            Ok(out)
        }
        _ => Err(CliError::input("pass exactly one of --op or --covector")),
    }
}

fn op_ref<'a>(s: &'a Session, name: &str) -> Result<&'a PDOperator, CliError> {
    s.op(name.trim()).ok_or_else(|| {
        CliError::input(format!("unknown operator `{name}`; declare it in the session file"))
    })
}

fn pair_refs(
    s: &Session,
    p: &str,
    ptilde: &str,
    j: &str,
) -> Result<(PDOperator, PDOperator, PDOperator), CliError> {
    Ok((
        op_ref(s, p)?.with_variance(Variance::hamiltonian()),
        op_ref(s, ptilde)?.with_variance(Variance::hamiltonian()),
        op_ref(s, j)?.with_variance(Variance::symplectic()),
    ))
}

fn components_arg(
    s: &Session,
    text: &str,
    want: usize,
    what: &str,
) -> Result<Vec<DiffExpr>, CliError> {
    let comps = parse_value_arg(text, s)?.components();
    if comps.len() != want {
        return Err(CliError::input(format!(
            "{what} has {} component{} but {} {} needed",
            comps.len(),
            if comps.len() == 1 { "" } else { "s" },
            want,
            if want == 1 { "is" } else { "are" },
        )));
    }
    Ok(comps)
}

/// Reads a declared operator as a metric: zero-order entries, no tails.
fn metric_arg(s: &Session, name: &str) -> Result<Vec<Vec<DiffExpr>>, CliError> {
    let op = op_ref(s, name)?;
    if !op.tails().is_empty() {
        return Err(CliError::input(format!("the metric `{name}` must not have nonlocal tails")));
    }
    let n = op.rows();
    let mut g = vec![vec![DiffExpr::zero(); n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            if op.diff_entry(i, j).keys().any(|&p| p > 0) {
                return Err(CliError::input(format!(
                    "the metric `{name}` must consist of zero-order entries, but entry ({},{}) carries a power of `D`",
                    i + 1,
                    j + 1
                )));
            }
            *slot = op.coeff(i, j, 0);
        }
    }
    Ok(g)
}

fn matrix_str(pr: &Pr, m: &[Vec<DiffExpr>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|row| {
            let entries: Vec<String> = row.iter().map(|e| pr.expr(e)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Sparse JSON form of a rank-three tensor, 1-based indices, zeros omitted.
fn tensor3_json(pr: &Pr, t: &[Vec<Vec<DiffExpr>>]) -> serde_json::Value {
    let mut rows = Vec::new();
    for (i, plane) in t.iter().enumerate() {
        for (j, line) in plane.iter().enumerate() {
            for (k, e) in line.iter().enumerate() {
                if !e.is_zero() {
                    rows.push(json!({
                        "indices": [i + 1, j + 1, k + 1],
                        "value": pr.expr(e),
                    }));
                }
            }
        }
    }
    json!(rows)
}

fn insert_introduced(out: &mut Outcome, pr: &Pr, syms: &[NonlocalSymbol]) {
    insert_introduced_list(out, pr, syms);
    for sym in syms {
        let (name, density) = pr.symbol(sym);
        out.diagnostics
            .push(format!("introduced nonlocal variable `{name}` with density `{density}`"));
    }
}

fn insert_introduced_list(out: &mut Outcome, pr: &Pr, syms: &[NonlocalSymbol]) {
    let rows: Vec<serde_json::Value> = syms
        .iter()
        .map(|sym| {
            let (name, density) = pr.symbol(sym);
            json!({"name": name, "density": density})
        })
        .collect();
    out.result.insert("introduced".into(), json!(rows));
}

/// Folds a `CertOutcome` into an `Outcome`, filling the result through
/// `fill` on the certified branch.
fn cert_outcome<T>(
    command: &'static str,
    pr: &Pr,
    verdict: CertOutcome<T>,
    fill: impl FnOnce(&mut Outcome, T),
) -> Outcome {
    match verdict {
        CertOutcome::Certified(c) => {
            let mut out = Outcome::new(command, Status::Verified);
            fill(&mut out, c);
            out
        }
        CertOutcome::Refuted { residual } => {
            let mut out = Outcome::new(command, Status::Refuted);
            out.residual = Some(pr.op(&residual));
            out.diagnostics.push("the defining identity fails; see the residual".into());
            out
        }
        CertOutcome::NotApplicable { reason } => {
            let mut out = Outcome::new(command, Status::Inconclusive);
            out.diagnostics.push(reason);
            out
        }
    }
}

fn insert_symplectic(out: &mut Outcome, pr: &Pr, c: &SymplecticCertificate) {
    let gamma0: Vec<String> = c.gamma0.iter().map(|e| pr.expr(e)).collect();
    out.result.insert("gamma0".into(), json!(gamma0));
    let gamma: Vec<String> = c.gamma.iter().map(|e| pr.expr(e)).collect();
    out.result.insert("gamma".into(), json!(gamma));
    let dens: Vec<serde_json::Value> = c
        .tail_data
        .iter()
        .map(|(w, d)| json!({"weight": Pr::rational(w), "density": pr.expr(d)}))
        .collect();
    out.result.insert("densities".into(), json!(dens));
    insert_introduced_list(out, pr, &c.introduced);
}

fn insert_compat(
    out: &mut Outcome,
    pr: &Pr,
    c: &wnhcalc_core::certify::CompatibilityCertificate,
) {
    let tau: Vec<String> = c.tau.iter().map(|e| pr.expr(e)).collect();
    out.result.insert("tau".into(), json!(tau));
    let jd = &c.decomposition;
    out.result.insert("jpj".into(), json!(pr.op(&jd.jpj)));
    let gamma0: Vec<String> = jd.gamma0.iter().map(|e| pr.expr(e)).collect();
    out.result.insert("gamma0".into(), json!(gamma0));
    let gamma: Vec<String> = jd.gamma.iter().map(|e| pr.expr(e)).collect();
    out.result.insert("gamma".into(), json!(gamma));
    let psi: Vec<serde_json::Value> = jd
        .psi_data
        .iter()
        .map(|(w, p, k)| json!({"weight": pr.knum(w), "psi": pr.expr(p), "k": pr.expr(k)}))
        .collect();
    out.result.insert("psi".into(), json!(psi));
    let h: Vec<serde_json::Value> = jd
        .h_data
        .iter()
        .map(|(w, d)| json!({"weight": pr.knum(w), "density": pr.expr(d)}))
        .collect();
    out.result.insert("h".into(), json!(h));
    insert_introduced_list(out, pr, &c.introduced);
}
