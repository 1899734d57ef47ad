//! Canonical text rendering of ring elements.
//!
//! The output is a fixed normal form inside the expression grammar the
//! session parser accepts, so printing and re-parsing is the identity.
//! Terms appear in descending monomial order, fractions print as
//! `(numerator)/(denominator)`, and jet variables print as `u`, `u_1`,
//! `u_2`, … using the field names of the session.

use num::{BigRational, One, Signed};

use super::coeff::KNum;
use super::poly::{Mono, Poly, Var};
use super::{DiffExpr, FieldSet};

/// Renders ring elements against a fixed set of field names.
#[derive(Clone, Debug)]
pub struct Printer {
    fields: FieldSet,
}

impl Printer {
    pub fn new(fields: FieldSet) -> Self {
        Printer { fields }
    }

    pub fn fields(&self) -> &FieldSet {
        &self.fields
    }

    pub fn var(&self, v: &Var) -> String {
        match v {
            Var::X => "x".to_string(),
            Var::Jet { field, order } => {
                let name = self.fields.name(*field);
                if *order == 0 {
                    name.to_string()
                } else {
                    format!("{name}_{order}")
                }
            }
            Var::Omega(s) => s.name().to_string(),
            Var::Lambda => "lam".to_string(),
        }
    }

    fn mono_factors(&self, m: &Mono, out: &mut Vec<String>) {
        for (v, e) in m.iter() {
            let name = self.var(v);
            if *e == 1 {
                out.push(name);
            } else {
                out.push(format!("{name}^{e}"));
            }
        }
    }

    /// One product of rational × constants × monomial, sign stripped.
    fn product(&self, q: &BigRational, consts: &super::coeff::CMono, m: &Mono) -> String {
        let mut factors = Vec::new();
        let aq = q.abs();
        if !aq.is_one() || (consts.is_one() && m.is_one()) {
            factors.push(render_rational(&aq));
        }
        for c in consts.constants() {
            factors.push(c.name().to_string());
        }
        self.mono_factors(m, &mut factors);
        factors.join("*")
    }

    pub fn knum(&self, k: &KNum) -> String {
        if k.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (cm, q)) in k.terms().enumerate() {
            push_signed(&mut out, i == 0, q.is_negative(), &self.product(q, cm, &Mono::one()));
        }
        out
    }

    pub fn poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (m, k) in p.terms_desc() {
            match k.single_term() {
                Some((cm, q)) => {
                    push_signed(&mut out, first, q.is_negative(), &self.product(q, cm, m));
                }
                None => {
                    let mut factors = vec![format!("({})", self.knum(k))];
                    self.mono_factors(m, &mut factors);
                    push_signed(&mut out, first, false, &factors.join("*"));
                }
            }
            first = false;
        }
        out
    }

    pub fn expr(&self, e: &DiffExpr) -> String {
        if e.is_polynomial() {
            return self.poly(e.numerator());
        }
        let num = self.poly(e.numerator());
        let den = self.poly(e.denominator());
        let num = if e.numerator().nterms() > 1 { format!("({num})") } else { num };
        let den = if plain_power(e.denominator()) { den } else { format!("({den})") };
        format!("{num}/{den}")
    }
}

fn render_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn push_signed(out: &mut String, first: bool, negative: bool, body: &str) {
    if first {
        if negative {
            out.push('-');
        }
    } else if negative {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    out.push_str(body);
}

/// True when the polynomial is a single power of a single variable with
/// unit coefficient, so it needs no parentheses after `/`.
fn plain_power(p: &Poly) -> bool {
    let Some((m, k)) = p.leading() else { return false };
    p.nterms() == 1 && k.is_one() && m.iter().count() == 1
}
