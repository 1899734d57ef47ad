//! Recursive-descent parser for session files and inline arguments.
//!
//! The grammar needs one token of lookahead everywhere except the tuple
//! probe, which backtracks over a saved cursor.  Declarations are
//!
//! ```text
//! fields u, v;
//! const sq2: sq2^2 = 2;
//! nonlocal w = u;
//! expr H1 = (u^2 + v^2)/sq2;
//! op Pt : Vs->V = [[D^3 + 2*u*D + u_1]] + tail((1); (1));
//! ```
//!
//! Jets are written `u_3` with bare `u` for order zero; `D` is reserved for
//! operator entries, where every term is a coefficient times a power of `D`
//! (coefficients stand to the left).  All literals are exact integers and
//! every quotient stays a rational function, so nothing on this surface can
//! introduce floating point.

use std::collections::BTreeMap;

use num::BigRational;
use wnhcalc_core::opalg::{PDOperator, Tail, Variance};
use wnhcalc_core::ring::{AlgebraicConstant, DiffExpr, FieldSet, NonlocalSymbol, Var};

use crate::error::CliError;
use crate::lex::{tokenize, Tok, Token};
use crate::session::{Decl, Session, Value};

/// Names with a fixed meaning that declarations may not shadow.
const RESERVED: &[&str] =
    &["D", "x", "lam", "fields", "const", "nonlocal", "expr", "op", "tail", "V", "Vs"];

/// Guardrails against pathological exponents in untrusted input.
const MAX_POWER: u32 = 512;

struct Ts {
    toks: Vec<Token>,
    pos: usize,
}

impl Ts {
    fn new(text: &str) -> Result<Ts, CliError> {
        Ok(Ts { toks: tokenize(text)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => match self.toks.last() {
                Some(t) => (t.line, t.col + token_width(&t.tok)),
                None => (1, 1),
            },
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), CliError> {
        if self.eat(&t) {
            return Ok(());
        }
        let (line, col) = self.here();
        let found = match self.peek() {
            Some(f) => f.describe(),
            None => "end of input".into(),
        };
        Err(CliError::syntax(line, col, format!("expected {}, found {}", t.describe(), found)))
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, u32, u32), CliError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Token { tok: Tok::Ident(s), line, col }) => Ok((s, line, col)),
            Some(t) => Err(CliError::syntax(
                t.line,
                t.col,
                format!("expected {what}, found {}", t.tok.describe()),
            )),
            None => Err(CliError::syntax(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> CliError {
        let (line, col) = self.here();
        CliError::syntax(line, col, msg.into())
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), CliError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err_here("unexpected trailing input"))
        }
    }
}

fn token_width(t: &Tok) -> u32 {
    match t {
        Tok::Ident(s) | Tok::Number(s) => s.len() as u32,
        Tok::Arrow => 2,
        _ => 1,
    }
}

fn validate_name(name: &str, line: u32, col: u32) -> Result<(), CliError> {
    let mut chars = name.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    if !head_ok || name.contains('_') {
        return Err(CliError::syntax(
            line,
            col,
            format!("`{name}` is not a valid name: names start with a letter and `_` is reserved for jets like `u_2`"),
        ));
    }
    if RESERVED.contains(&name) {
        return Err(CliError::syntax(line, col, format!("`{name}` is a reserved word")));
    }
    Ok(())
}

fn parse_u32(ts: &mut Ts, what: &str) -> Result<u32, CliError> {
    let (line, col) = ts.here();
    match ts.next() {
        Some(Token { tok: Tok::Number(s), line, col }) => {
            let v: u32 = s
                .parse()
                .map_err(|_| CliError::syntax(line, col, format!("{what} is too large")))?;
            if v > MAX_POWER {
                return Err(CliError::syntax(line, col, format!("{what} exceeds the limit of {MAX_POWER}")));
            }
            Ok(v)
        }
        Some(t) => Err(CliError::syntax(
            t.line,
            t.col,
            format!("expected {what} (a nonnegative integer), found {}", t.tok.describe()),
        )),
        None => Err(CliError::syntax(line, col, format!("expected {what}, found end of input"))),
    }
}

fn parse_signed_rational(ts: &mut Ts) -> Result<BigRational, CliError> {
    let negative = ts.eat(&Tok::Minus);
    let (line, col) = ts.here();
    let numer = match ts.next() {
        Some(Token { tok: Tok::Number(s), .. }) => s.parse::<num::BigInt>().expect("digits"),
        Some(t) => {
            return Err(CliError::syntax(
                t.line,
                t.col,
                format!("expected a rational `p/q`, found {}", t.tok.describe()),
            ))
        }
        None => return Err(CliError::syntax(line, col, "expected a rational `p/q`")),
    };
    let denom = if ts.eat(&Tok::Slash) {
        let (dl, dc) = ts.here();
        match ts.next() {
            Some(Token { tok: Tok::Number(s), .. }) => {
                let d = s.parse::<num::BigInt>().expect("digits");
                if d == 0.into() {
                    return Err(CliError::syntax(dl, dc, "division by zero"));
                }
                d
            }
            _ => return Err(CliError::syntax(dl, dc, "expected a denominator")),
        }
    } else {
        1.into()
    };
    let q = BigRational::new(numer, denom);
    Ok(if negative { -q } else { q })
}

/// Scalar expression: `+`/`-` over `*`/`/` over unary `-` over `^`.
fn parse_expr(ts: &mut Ts, s: &Session) -> Result<DiffExpr, CliError> {
    let mut acc = parse_mul(ts, s)?;
    loop {
        if ts.eat(&Tok::Plus) {
            acc = acc.add(&parse_mul(ts, s)?);
        } else if ts.eat(&Tok::Minus) {
            acc = acc.sub(&parse_mul(ts, s)?);
        } else {
            return Ok(acc);
        }
    }
}

fn parse_mul(ts: &mut Ts, s: &Session) -> Result<DiffExpr, CliError> {
    let mut acc = parse_unary(ts, s)?;
    loop {
        if ts.eat(&Tok::Star) {
            acc = acc.mul(&parse_unary(ts, s)?);
        } else if ts.peek() == Some(&Tok::Slash) {
            let (line, col) = ts.here();
            ts.next();
            let d = parse_unary(ts, s)?;
            acc = acc
                .try_div(&d)
                .map_err(|e| CliError::syntax(line, col, e.to_string()))?;
        } else {
            return Ok(acc);
        }
    }
}

fn parse_unary(ts: &mut Ts, s: &Session) -> Result<DiffExpr, CliError> {
    if ts.eat(&Tok::Minus) {
        Ok(parse_unary(ts, s)?.neg())
    } else {
        parse_power(ts, s)
    }
}

fn parse_power(ts: &mut Ts, s: &Session) -> Result<DiffExpr, CliError> {
    let base = parse_atom(ts, s)?;
    if ts.eat(&Tok::Caret) {
        if ts.peek() == Some(&Tok::Minus) {
            return Err(ts.err_here("exponents are nonnegative integers; use `/` for reciprocals"));
        }
        let e = parse_u32(ts, "exponent")?;
        Ok(base.pow(e))
    } else {
        Ok(base)
    }
}

fn parse_atom(ts: &mut Ts, s: &Session) -> Result<DiffExpr, CliError> {
    let (line, col) = ts.here();
    match ts.next() {
        Some(Token { tok: Tok::Number(d), .. }) => {
            let n = d.parse::<num::BigInt>().expect("digits");
            Ok(DiffExpr::from_rational(BigRational::from_integer(n)))
        }
        Some(Token { tok: Tok::LParen, .. }) => {
            let e = parse_expr(ts, s)?;
            ts.expect(Tok::RParen)?;
            Ok(e)
        }
        Some(Token { tok: Tok::Ident(name), line, col }) => resolve_ident(&name, line, col, s),
        Some(t) => Err(CliError::syntax(
            t.line,
            t.col,
            format!("expected an expression, found {}", t.tok.describe()),
        )),
        None => Err(CliError::syntax(line, col, "expected an expression, found end of input")),
    }
}

fn resolve_ident(name: &str, line: u32, col: u32, s: &Session) -> Result<DiffExpr, CliError> {
    if name == "x" {
        return Ok(DiffExpr::x());
    }
    if name == "D" {
        return Err(CliError::syntax(
            line,
            col,
            "`D` is the total derivative and only appears in operator entries",
        ));
    }
    if let Some(f) = s.fields.index(name) {
        return Ok(DiffExpr::jet(f, 0));
    }
    if let Some((prefix, suffix)) = name.rsplit_once('_') {
        if let Some(f) = s.fields.index(prefix) {
            if !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) {
                let order: u32 = suffix.parse().map_err(|_| {
                    CliError::syntax(line, col, format!("jet order in `{name}` is too large"))
                })?;
                if order > MAX_POWER {
                    return Err(CliError::syntax(
                        line,
                        col,
                        format!("jet order in `{name}` exceeds the limit of {MAX_POWER}"),
                    ));
                }
                return Ok(DiffExpr::jet(f, order));
            }
        }
    }
    if let Some(c) = s.constant(name) {
        return Ok(DiffExpr::constant(c));
    }
    if let Some(sym) = s.nonlocal(name) {
        return Ok(DiffExpr::omega(sym));
    }
    match s.expr(name) {
        Some(Value::Scalar(e)) => return Ok(e.clone()),
        Some(Value::Tuple(_)) => {
            return Err(CliError::syntax(
                line,
                col,
                format!("`{name}` is a tuple and cannot appear inside a scalar expression"),
            ))
        }
        None => {}
    }
    if s.op(name).is_some() {
        return Err(CliError::syntax(
            line,
            col,
            format!("`{name}` names an operator, not an expression"),
        ));
    }
    Err(CliError::syntax(line, col, format!("unknown identifier `{name}`")))
}

/// A parenthesized comma list `(e, ..., e)`; a single component is allowed.
fn parse_paren_tuple(ts: &mut Ts, s: &Session) -> Result<Vec<DiffExpr>, CliError> {
    ts.expect(Tok::LParen)?;
    let mut out = vec![parse_expr(ts, s)?];
    while ts.eat(&Tok::Comma) {
        out.push(parse_expr(ts, s)?);
    }
    ts.expect(Tok::RParen)?;
    Ok(out)
}

/// A value position: a tuple `(e, ..., e)` with at least one comma, or a
/// scalar expression.  Backtracks over the probe.
fn parse_value(ts: &mut Ts, s: &Session) -> Result<Value, CliError> {
    if ts.peek() == Some(&Tok::LParen) {
        let save = ts.pos;
        ts.next();
        if let Ok(first) = parse_expr(ts, s) {
            if ts.peek() == Some(&Tok::Comma) {
                let mut out = vec![first];
                while ts.eat(&Tok::Comma) {
                    out.push(parse_expr(ts, s)?);
                }
                ts.expect(Tok::RParen)?;
                return Ok(Value::Tuple(out));
            }
        }
        ts.pos = save;
    }
    Ok(Value::Scalar(parse_expr(ts, s)?))
}

/// One additive term of an operator entry: coefficient factors, then powers
/// of `D`.
fn parse_op_term(ts: &mut Ts, s: &Session) -> Result<(u32, DiffExpr), CliError> {
    let mut coeff = DiffExpr::one();
    let mut dpow: u32 = 0;
    let mut seen_d = false;
    let at_d = |ts: &Ts| matches!(ts.peek(), Some(Tok::Ident(name)) if name == "D");
    'factors: loop {
        if at_d(ts) {
            ts.next();
            let k = if ts.eat(&Tok::Caret) { parse_u32(ts, "power of `D`")? } else { 1 };
            dpow = dpow.saturating_add(k).min(MAX_POWER);
            seen_d = true;
        } else {
            if seen_d {
                return Err(ts.err_here("coefficients stand to the left of `D`"));
            }
            let f = parse_power(ts, s)?;
            coeff = coeff.mul(&f);
        }
        loop {
            if ts.eat(&Tok::Star) {
                continue 'factors;
            }
            if ts.peek() == Some(&Tok::Slash) {
                let (line, col) = ts.here();
                ts.next();
                if at_d(ts) {
                    return Err(CliError::syntax(line, col, "cannot divide by `D`"));
                }
                let d = parse_power(ts, s)?;
                if seen_d && d.as_knum().is_none() {
                    return Err(CliError::syntax(
                        line,
                        col,
                        "only constant divisors may follow `D`; write the coefficient to the left",
                    ));
                }
                coeff =
                    coeff.try_div(&d).map_err(|e| CliError::syntax(line, col, e.to_string()))?;
                continue;
            }
            return Ok((dpow, coeff));
        }
    }
}

/// One operator matrix entry: a sum of coefficient-times-`D`-power terms.
fn parse_op_entry(ts: &mut Ts, s: &Session) -> Result<BTreeMap<u32, DiffExpr>, CliError> {
    let mut acc: BTreeMap<u32, DiffExpr> = BTreeMap::new();
    let mut negate = ts.eat(&Tok::Minus);
    loop {
        let (dpow, coeff) = parse_op_term(ts, s)?;
        let coeff = if negate { coeff.neg() } else { coeff };
        let slot = acc.entry(dpow).or_insert_with(DiffExpr::zero);
        *slot = slot.add(&coeff);
        if ts.eat(&Tok::Plus) {
            negate = false;
        } else if ts.eat(&Tok::Minus) {
            negate = true;
        } else {
            acc.retain(|_, c| !c.is_zero());
            return Ok(acc);
        }
    }
}

fn parse_tail_term(ts: &mut Ts, s: &Session, n: usize) -> Result<Tail, CliError> {
    let (kw, line, col) = ts.expect_ident("`tail`")?;
    if kw != "tail" {
        return Err(CliError::syntax(line, col, format!("expected `tail`, found `{kw}`")));
    }
    ts.expect(Tok::LParen)?;
    let (ll, lc) = ts.here();
    let left = parse_paren_tuple(ts, s)?;
    ts.expect(Tok::Semi)?;
    let (rl, rc) = ts.here();
    let right = parse_paren_tuple(ts, s)?;
    ts.expect(Tok::RParen)?;
    if left.len() != n {
        return Err(CliError::syntax(
            ll,
            lc,
            format!("tail component count {} does not match the {} declared fields", left.len(), n),
        ));
    }
    if right.len() != n {
        return Err(CliError::syntax(
            rl,
            rc,
            format!("tail component count {} does not match the {} declared fields", right.len(), n),
        ));
    }
    Ok(Tail::new(left, right))
}

/// An operator literal: an optional `[[...], ...]` matrix followed by
/// `+ tail((...); (...))` terms, or tail terms alone.
fn parse_op_literal(
    ts: &mut Ts,
    s: &Session,
    variance: Variance,
) -> Result<PDOperator, CliError> {
    let n = s.n();
    let mut op = PDOperator::new(n, n, n, variance);
    let mut have_matrix = false;
    if ts.peek() == Some(&Tok::LBracket) {
        have_matrix = true;
        let (ml, mc) = ts.here();
        ts.next();
        let mut rows: Vec<Vec<BTreeMap<u32, DiffExpr>>> = Vec::new();
        loop {
            ts.expect(Tok::LBracket)?;
            let mut row = vec![parse_op_entry(ts, s)?];
            while ts.eat(&Tok::Comma) {
                row.push(parse_op_entry(ts, s)?);
            }
            ts.expect(Tok::RBracket)?;
            rows.push(row);
            if !ts.eat(&Tok::Comma) {
                break;
            }
        }
        ts.expect(Tok::RBracket)?;
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::syntax(
                ml,
                mc,
                format!(
                    "operator matrix is {}x{} but the session declares {} field{}",
                    rows.len(),
                    cols,
                    n,
                    if n == 1 { "" } else { "s" }
                ),
            ));
        }
        for (i, row) in rows.into_iter().enumerate() {
            for (j, entry) in row.into_iter().enumerate() {
                for (p, c) in entry {
                    op.set_coeff(i, j, p, c);
                }
            }
        }
    }
    if !have_matrix {
        op.add_tail(parse_tail_term(ts, s, n)?);
    }
    while ts.eat(&Tok::Plus) {
        op.add_tail(parse_tail_term(ts, s, n)?);
    }
    Ok(op)
}

fn parse_variance(ts: &mut Ts) -> Result<Variance, CliError> {
    let space = |ts: &mut Ts| -> Result<bool, CliError> {
        let (name, line, col) = ts.expect_ident("`V` or `Vs`")?;
        match name.as_str() {
            "V" => Ok(false),
            "Vs" => Ok(true),
            other => {
                Err(CliError::syntax(line, col, format!("expected `V` or `Vs`, found `{other}`")))
            }
        }
    };
    let input_star = space(ts)?;
    ts.expect(Tok::Arrow)?;
    let output_star = space(ts)?;
    Ok(match (input_star, output_star) {
        (true, false) => Variance::hamiltonian(),
        (false, true) => Variance::symplectic(),
        (false, false) => Variance::recursion(),
        (true, true) => Variance::corecursion(),
    })
}

/// Parses a complete session file.
pub fn parse_session(text: &str) -> Result<Session, CliError> {
    let mut ts = Ts::new(text)?;
    let mut session: Option<Session> = None;
    while !ts.at_end() {
        let (kw, line, col) = ts.expect_ident("a declaration keyword")?;
        if kw != "fields" && session.is_none() {
            return Err(CliError::syntax(line, col, "declare `fields` first"));
        }
        match kw.as_str() {
            "fields" => {
                if session.is_some() {
                    return Err(CliError::syntax(line, col, "`fields` is declared once"));
                }
                let mut names = Vec::new();
                loop {
                    let (name, nl, nc) = ts.expect_ident("a field name")?;
                    validate_name(&name, nl, nc)?;
                    names.push(name);
                    if !ts.eat(&Tok::Comma) {
                        break;
                    }
                }
                ts.expect(Tok::Semi)?;
                let fields = FieldSet::new(names)
                    .map_err(|e| CliError::syntax(line, col, e.to_string()))?;
                session = Some(Session {
                    fields,
                    constants: Vec::new(),
                    nonlocals: Vec::new(),
                    exprs: Vec::new(),
                    ops: Vec::new(),
                    decls: vec![Decl::Fields],
                });
            }
            "const" => {
                let s = session.as_mut().expect("fields declared");
                let (name, nl, nc) = ts.expect_ident("a constant name")?;
                validate_name(&name, nl, nc)?;
                if s.name_taken(&name) {
                    return Err(CliError::syntax(nl, nc, format!("`{name}` is already declared")));
                }
                ts.expect(Tok::Colon)?;
                let (again, al, ac) = ts.expect_ident("the constant name")?;
                if again != name {
                    return Err(CliError::syntax(
                        al,
                        ac,
                        format!("a constant declaration fixes its own square: write `{name}^2 = p/q`"),
                    ));
                }
                ts.expect(Tok::Caret)?;
                let (el, ec) = ts.here();
                if parse_u32(&mut ts, "exponent")? != 2 {
                    return Err(CliError::syntax(el, ec, "only squares can be declared: write `^2`"));
                }
                ts.expect(Tok::Eq)?;
                let sq = parse_signed_rational(&mut ts)?;
                ts.expect(Tok::Semi)?;
                let c = AlgebraicConstant::new(&name, sq)
                    .map_err(|e| CliError::syntax(nl, nc, e.to_string()))?;
                s.constants.push((name, c));
                let idx = s.constants.len() - 1;
                s.decls.push(Decl::Const(idx));
            }
            "nonlocal" => {
                let (name, nl, nc) = ts.expect_ident("a nonlocal variable name")?;
                validate_name(&name, nl, nc)?;
                let s = session.as_ref().expect("fields declared");
                if s.name_taken(&name) {
                    return Err(CliError::syntax(nl, nc, format!("`{name}` is already declared")));
                }
                ts.expect(Tok::Eq)?;
                let density = parse_expr(&mut ts, session.as_ref().expect("fields declared"))?;
                ts.expect(Tok::Semi)?;
                let s = session.as_mut().expect("fields declared");
                let sym = NonlocalSymbol::new(name.clone(), density);
                s.nonlocals.push((name, sym));
                let idx = s.nonlocals.len() - 1;
                s.decls.push(Decl::Nonlocal(idx));
            }
            "expr" => {
                let (name, nl, nc) = ts.expect_ident("an expression name")?;
                validate_name(&name, nl, nc)?;
                let s = session.as_ref().expect("fields declared");
                if s.name_taken(&name) {
                    return Err(CliError::syntax(nl, nc, format!("`{name}` is already declared")));
                }
                ts.expect(Tok::Eq)?;
                let value = parse_value(&mut ts, session.as_ref().expect("fields declared"))?;
                ts.expect(Tok::Semi)?;
                let s = session.as_mut().expect("fields declared");
                s.exprs.push((name, value));
                let idx = s.exprs.len() - 1;
                s.decls.push(Decl::Expr(idx));
            }
            "op" => {
                let (name, nl, nc) = ts.expect_ident("an operator name")?;
                validate_name(&name, nl, nc)?;
                let s = session.as_ref().expect("fields declared");
                if s.name_taken(&name) {
                    return Err(CliError::syntax(nl, nc, format!("`{name}` is already declared")));
                }
                let variance =
                    if ts.eat(&Tok::Colon) { parse_variance(&mut ts)? } else { Variance::hamiltonian() };
                ts.expect(Tok::Eq)?;
                let op =
                    parse_op_literal(&mut ts, session.as_ref().expect("fields declared"), variance)?;
                ts.expect(Tok::Semi)?;
                let s = session.as_mut().expect("fields declared");
                s.ops.push((name, op));
                let idx = s.ops.len() - 1;
                s.decls.push(Decl::Op(idx));
            }
            other => {
                return Err(CliError::syntax(
                    line,
                    col,
                    format!("expected `fields`, `const`, `nonlocal`, `expr`, or `op`, found `{other}`"),
                ))
            }
        }
    }
    session.ok_or_else(|| CliError::input("the session file declares no fields"))
}

/// An inline scalar-or-tuple argument: a declared expression name or a
/// literal expression.
pub fn parse_value_arg(text: &str, s: &Session) -> Result<Value, CliError> {
    let trimmed = text.trim();
    if let Some(v) = s.expr(trimmed) {
        return Ok(v.clone());
    }
    if s.op(trimmed).is_some() {
        return Err(CliError::input(format!(
            "`{trimmed}` names an operator; this argument takes an expression"
        )));
    }
    let mut ts = Ts::new(text)?;
    let v = parse_value(&mut ts, s)?;
    ts.expect_end()?;
    Ok(v)
}

/// An inline scalar argument.
pub fn parse_scalar_arg(text: &str, s: &Session) -> Result<DiffExpr, CliError> {
    match parse_value_arg(text, s)? {
        Value::Scalar(e) => Ok(e),
        Value::Tuple(_) => Err(CliError::input(format!("`{text}` is a tuple; a scalar is needed here"))),
    }
}

/// A comma-separated list of inline scalar expressions.
pub fn parse_scalar_list_arg(text: &str, s: &Session) -> Result<Vec<DiffExpr>, CliError> {
    let mut ts = Ts::new(text)?;
    let mut out = vec![parse_expr(&mut ts, s)?];
    while ts.eat(&Tok::Comma) {
        out.push(parse_expr(&mut ts, s)?);
    }
    ts.expect_end()?;
    Ok(out)
}

/// `--at` assignments `u=1, u_1=1/2, x=0`, valued at exact rationals.
pub fn parse_assignments(
    text: &str,
    s: &Session,
) -> Result<BTreeMap<Var, BigRational>, CliError> {
    let mut ts = Ts::new(text)?;
    let mut out = BTreeMap::new();
    loop {
        let (name, line, col) = ts.expect_ident("a variable name")?;
        let var = if name == "x" {
            Var::X
        } else if let Some(f) = s.fields.index(&name) {
            Var::Jet { field: f, order: 0 }
        } else if let Some(sym) = s.nonlocal(&name) {
            Var::Omega(sym.clone())
        } else if let Some((prefix, suffix)) = name.rsplit_once('_') {
            match s.fields.index(prefix) {
                Some(f) if !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) => {
                    let order = suffix.parse().map_err(|_| {
                        CliError::syntax(line, col, format!("jet order in `{name}` is too large"))
                    })?;
                    Var::Jet { field: f, order }
                }
                _ => {
                    return Err(CliError::syntax(line, col, format!("unknown variable `{name}`")))
                }
            }
        } else if s.constant(&name).is_some() {
            return Err(CliError::syntax(
                line,
                col,
                format!("`{name}` is an algebraic constant and cannot be assigned"),
            ));
        } else {
            return Err(CliError::syntax(line, col, format!("unknown variable `{name}`")));
        };
        ts.expect(Tok::Eq)?;
        out.insert(var, parse_signed_rational(&mut ts)?);
        if ts.at_end() {
            return Ok(out);
        }
        ts.expect(Tok::Comma)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::print::Pr;

    const RICH: &str = "\
fields u, v;
const sq2: sq2^2 = 2;
nonlocal w = u*v;
expr H = (u^2 + v^2)/sq2;
expr pair = (u_1, -v_1/3);
op J : V->Vs = [[0, 1], [-1, 0]];
op P = [[D^3 + 2*u*D + u_1, 0], [0, D]] + tail((u, v); (v_1, u_1)) + tail((1, 0); (0, 1));
op T : V->V = tail((w, 1); (u, u));
";

    fn roundtrip(text: &str) -> String {
        let s = parse_session(text).expect("fixture parses");
        Pr::for_session(&s).session(&s)
    }

    #[test]
    fn printing_reaches_a_fixpoint_after_one_pass() {
        let once = roundtrip(RICH);
        assert_eq!(roundtrip(&once), once);
    }

    #[test]
    fn canonical_print_annotates_variance_and_keeps_order() {
        let once = roundtrip(RICH);
        let lines: Vec<&str> = once.lines().collect();
        assert_eq!(lines[0], "fields u, v;");
        assert!(lines.iter().any(|l| l.starts_with("op J : V->Vs = ")), "{once}");
        assert!(lines.iter().any(|l| l.starts_with("op P : Vs->V = ")), "{once}");
        assert!(once.contains("tail((u, v); (v_1, u_1))"), "{once}");
    }

    #[test]
    fn the_tuple_probe_backtracks_to_grouping_parens() {
        let s = parse_session("fields u, v;\nexpr a = (u + v)*(u - v);\nexpr b = (u, v);\n")
            .expect("parses");
        assert!(matches!(s.expr("a"), Some(Value::Scalar(_))));
        assert!(matches!(s.expr("b"), Some(Value::Tuple(t)) if t.len() == 2));
    }

    #[test]
    fn jets_parse_by_suffix_and_bare_fields_are_order_zero() {
        let s = parse_session("fields u;\nexpr e = u_3 + u;\n").expect("parses");
        let Some(Value::Scalar(e)) = s.expr("e") else { panic!("scalar") };
        assert_eq!(e.max_jet_order(), Some(3));
    }

    #[test]
    fn names_must_be_alphabetic_and_unreserved() {
        for bad in ["fields D;", "fields tail;", "op lam = [[D]];", "expr a_b = 1;"] {
            let text = if bad.starts_with("fields") {
                format!("{bad}\n")
            } else {
                format!("fields u;\n{bad}\n")
            };
            assert!(parse_session(&text).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn redeclaring_a_name_is_rejected() {
        let err = parse_session("fields u;\nexpr a = 1;\nop a = [[D]];\n").unwrap_err();
        assert!(err.to_string().contains("already declared"), "{err}");
    }

    #[test]
    fn the_field_declaration_comes_first_and_only_once() {
        assert!(parse_session("expr a = 1;\nfields u;\n").is_err());
        assert!(parse_session("fields u;\nfields v;\n").is_err());
    }

    #[test]
    fn operator_coefficients_stand_left_of_d() {
        let err = parse_session("fields u;\nop P = [[D*u]];\n").unwrap_err();
        assert!(err.to_string().contains("left of `D`"), "{err}");
    }

    #[test]
    fn dividing_by_d_or_by_a_jet_after_d_is_rejected() {
        let err = parse_session("fields u;\nop P = [[u/D]];\n").unwrap_err();
        assert!(err.to_string().contains("cannot divide by `D`"), "{err}");
        assert!(parse_session("fields u;\nop P = [[D/u]];\n").is_err());
        assert!(parse_session("fields u;\nop P = [[D/2]];\n").is_ok());
    }

    #[test]
    fn tails_must_match_the_field_count() {
        let err = parse_session("fields u, v;\nop P = tail((u); (u, v));\n").unwrap_err();
        assert!(err.to_string().contains("does not match the 2 declared fields"), "{err}");
    }

    #[test]
    fn matrix_shape_must_match_the_field_count() {
        let err = parse_session("fields u, v;\nop P = [[D]];\n").unwrap_err();
        assert!(err.to_string().contains("1x1"), "{err}");
    }

    #[test]
    fn variance_arrows_cover_all_four_kinds() {
        let s = parse_session(
            "fields u;\nop A : Vs->V = [[D]];\nop B : V->Vs = [[D]];\nop C : V->V = [[D]];\nop E : Vs->Vs = [[D]];\n",
        )
        .expect("parses");
        assert_eq!(s.op("A").map(|o| o.variance()), Some(Variance::hamiltonian()));
        assert_eq!(s.op("B").map(|o| o.variance()), Some(Variance::symplectic()));
        assert_eq!(s.op("C").map(|o| o.variance()), Some(Variance::recursion()));
        assert_eq!(s.op("E").map(|o| o.variance()), Some(Variance::corecursion()));
    }

    #[test]
    fn oversized_exponents_are_refused() {
        let err = parse_session("fields u;\nexpr a = u^100000;\n").unwrap_err();
        assert!(err.to_string().contains("512"), "{err}");
        assert!(parse_session("fields u;\nop P = [[D^100000]];\n").is_err());
    }

    #[test]
    fn syntax_errors_carry_their_position() {
        let err = parse_session("fields u;\nexpr a = 1/0;\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2, column 11: division by zero");
    }

    #[test]
    fn inline_arguments_resolve_session_names_before_literals() {
        let s = parse_session("fields u;\nexpr tau = u^2;\nop P = [[D]];\n").expect("parses");
        let Value::Scalar(byname) = parse_value_arg("tau", &s).expect("named") else {
            panic!("scalar")
        };
        let Value::Scalar(literal) = parse_value_arg("u^2", &s).expect("literal") else {
            panic!("scalar")
        };
        assert_eq!(byname, literal);
        let err = parse_value_arg("P", &s).unwrap_err();
        assert!(err.to_string().contains("names an operator"), "{err}");
    }

    #[test]
    fn assignments_accept_jets_x_and_nonlocals_but_not_constants() {
        let s = parse_session("fields u;\nconst c: c^2 = 3;\nnonlocal w = u;\n")
            .expect("parses");
        let at = parse_assignments("u = 1/2, u_2 = -3, x = 0, w = 2", &s).expect("assigns");
        assert_eq!(at.len(), 4);
        let err = parse_assignments("c = 1", &s).unwrap_err();
        assert!(err.to_string().contains("cannot be assigned"), "{err}");
    }
}
