//! Canonical text rendering for expressions, operators, series, and whole
//! sessions.
//!
//! Everything printed here parses back to the same value, and printing is
//! deterministic, so the printer doubles as the canonical form used in
//! reports and JSON.  Operator entries are sums of `coefficient*D^k` with
//! the coefficient parenthesized exactly when it is a sum.

use std::collections::BTreeMap;

use num::BigRational;
use wnhcalc_core::opalg::{PDOperator, Space, TruncatedSeries, Variance};
use wnhcalc_core::ring::display::Printer;
use wnhcalc_core::ring::{DiffExpr, FieldSet, KNum, NonlocalSymbol};

use crate::session::{Decl, Session, Value};

pub struct Pr {
    inner: Printer,
}

impl Pr {
    pub fn new(fields: FieldSet) -> Pr {
        Pr { inner: Printer::new(fields) }
    }

    pub fn for_session(s: &Session) -> Pr {
        Pr::new(s.fields.clone())
    }

    pub fn expr(&self, e: &DiffExpr) -> String {
        self.inner.expr(e)
    }

    pub fn knum(&self, k: &KNum) -> String {
        self.inner.knum(k)
    }

    pub fn rational(q: &BigRational) -> String {
        if q.denom() == &num::BigInt::from(1) {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }

    pub fn tuple(&self, comps: &[DiffExpr]) -> String {
        let parts: Vec<String> = comps.iter().map(|e| self.expr(e)).collect();
        format!("({})", parts.join(", "))
    }

    pub fn value(&self, v: &Value) -> String {
        match v {
            Value::Scalar(e) => self.expr(e),
            Value::Tuple(comps) => self.tuple(comps),
        }
    }

    /// `coefficient*D^k` with the coefficient parenthesized when it is a sum.
    fn term(&self, power: i64, coeff: &DiffExpr) -> String {
        let d = match power {
            0 => return self.expr(coeff),
            1 => "D".to_string(),
            p => format!("D^{p}"),
        };
        if coeff.is_one() {
            return d;
        }
        if coeff.neg().is_one() {
            return format!("-{d}");
        }
        let c = self.expr(coeff);
        let c = if coeff.numerator().nterms() > 1 { format!("({c})") } else { c };
        format!("{c}*{d}")
    }

    /// A sum of terms over descending powers of `D`.
    fn power_sum(&self, pairs: &[(i64, DiffExpr)]) -> String {
        let mut out = String::new();
        for (power, coeff) in pairs.iter().rev() {
            if coeff.is_zero() {
                continue;
            }
            let piece = self.term(*power, coeff);
            if out.is_empty() {
                out.push_str(&piece);
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        if out.is_empty() {
            "0".to_string()
        } else {
            out
        }
    }

    pub fn entry(&self, map: &BTreeMap<u32, DiffExpr>) -> String {
        let pairs: Vec<(i64, DiffExpr)> =
            map.iter().map(|(p, c)| (*p as i64, c.clone())).collect();
        self.power_sum(&pairs)
    }

    pub fn op(&self, op: &PDOperator) -> String {
        let has_diff = (0..op.rows()).any(|i| (0..op.cols()).any(|j| !op.diff_entry(i, j).is_empty()));
        let mut parts = Vec::new();
        if has_diff || op.tails().is_empty() {
            let rows: Vec<String> = (0..op.rows())
                .map(|i| {
                    let entries: Vec<String> =
                        (0..op.cols()).map(|j| self.entry(op.diff_entry(i, j))).collect();
                    format!("[{}]", entries.join(", "))
                })
                .collect();
            parts.push(format!("[{}]", rows.join(", ")));
        }
        for t in op.tails() {
            let left: Vec<String> = t.left.iter().map(|e| self.expr(e)).collect();
            let right: Vec<String> = t.right.iter().map(|e| self.expr(e)).collect();
            parts.push(format!("tail(({}); ({}))", left.join(", "), right.join(", ")));
        }
        parts.join(" + ")
    }

    pub fn series(&self, s: &TruncatedSeries) -> String {
        let powers: Vec<i64> = s.powers().collect();
        let rows: Vec<String> = (0..s.rows())
            .map(|i| {
                let entries: Vec<String> = (0..s.cols())
                    .map(|j| {
                        let pairs: Vec<(i64, DiffExpr)> = powers
                            .iter()
                            .map(|&p| (p, s.coeff(p)[i][j].clone()))
                            .collect();
                        self.power_sum(&pairs)
                    })
                    .collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }

    pub fn variance(v: Variance) -> &'static str {
        let side = |s: Space| match s {
            Space::Vector => "V",
            Space::Covector => "Vs",
        };
        match (side(v.input), side(v.output)) {
            ("Vs", "V") => "Vs->V",
            ("V", "Vs") => "V->Vs",
            ("V", "V") => "V->V",
            _ => "Vs->Vs",
        }
    }

    pub fn symbol(&self, sym: &NonlocalSymbol) -> (String, String) {
        (sym.name().to_string(), self.expr(sym.density()))
    }

    /// The canonical session file: declarations in source order, one per line.
    pub fn session(&self, s: &Session) -> String {
        let mut out = String::new();
        for d in &s.decls {
            match *d {
                Decl::Fields => {
                    let names: Vec<&str> =
                        s.fields.indices().map(|i| s.fields.name(i)).collect();
                    out.push_str(&format!("fields {};\n", names.join(", ")));
                }
                Decl::Const(i) => {
                    let (name, c) = &s.constants[i];
                    out.push_str(&format!(
                        "const {name}: {name}^2 = {};\n",
                        Pr::rational(c.square())
                    ));
                }
                Decl::Nonlocal(i) => {
                    let (name, sym) = &s.nonlocals[i];
                    out.push_str(&format!("nonlocal {name} = {};\n", self.expr(sym.density())));
                }
                Decl::Expr(i) => {
                    let (name, v) = &s.exprs[i];
                    out.push_str(&format!("expr {name} = {};\n", self.value(v)));
                }
                Decl::Op(i) => {
                    let (name, op) = &s.ops[i];
                    out.push_str(&format!(
                        "op {name} : {} = {};\n",
                        Pr::variance(op.variance()),
                        self.op(op)
                    ));
                }
            }
        }
        out
    }
}
