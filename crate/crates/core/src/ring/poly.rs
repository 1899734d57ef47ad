//! Sparse multivariate polynomials over the coefficient field.
//!
//! Variables are the space coordinate x, jet variables u^a_j, nonlocal
//! symbols ω, and one internal scaling parameter λ. Terms are kept in a
//! BTreeMap under the graded order (total degree first, then lexicographic
//! over the fixed variable enumeration x < jets by (field, order) < ω < λ),
//! so the maximal key is the leading term.

use num::{BigRational, One, Zero};
use std::collections::{BTreeMap, BTreeSet};

use super::coeff::KNum;
use super::NonlocalSymbol;

/// A ring variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Var {
    /// The space coordinate.
    X,
    /// Jet variable u^field_order; order 0 is the field itself.
    Jet { field: u16, order: u32 },
    /// A nonlocal symbol ω = D⁻¹(density).
    Omega(NonlocalSymbol),
    /// Internal homotopy scaling parameter; never printed or parsed.
    Lambda,
}

impl Var {
    pub fn is_jet(&self) -> bool {
        matches!(self, Var::Jet { .. })
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Var::Omega(_))
    }
}

/// A monomial: sorted list of (variable, positive exponent) pairs.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Mono(Vec<(Var, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Mono(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Var, u32)> {
        self.0.iter()
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn degree_of(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    /// Total degree counting only jet variables.
    pub fn jet_degree(&self) -> u64 {
        self.0
            .iter()
            .filter(|(v, _)| v.is_jet())
            .map(|(_, e)| *e as u64)
            .sum()
    }

    /// Total degree counting only nonlocal symbols.
    pub fn omega_degree(&self) -> u64 {
        self.0
            .iter()
            .filter(|(v, _)| v.is_omega())
            .map(|(_, e)| *e as u64)
            .sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Mono(out)
    }

    /// Componentwise division; None if any exponent would go negative.
    pub fn try_div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            let mut e = *e;
            if j < other.0.len() && other.0[j].0 < *v {
                return None; // divisor has a variable we lack
            }
            if j < other.0.len() && other.0[j].0 == *v {
                if other.0[j].1 > e {
                    return None;
                }
                e -= other.0[j].1;
                j += 1;
            }
            if e > 0 {
                out.push((v.clone(), e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Removes one power of `v`; caller ensures the exponent is positive.
    pub fn decrement(&self, v: &Var) -> Mono {
        let mut out = Vec::with_capacity(self.0.len());
        for (w, e) in &self.0 {
            if w == v {
                if *e > 1 {
                    out.push((w.clone(), e - 1));
                }
            } else {
                out.push((w.clone(), *e));
            }
        }
        Mono(out)
    }

    pub fn pow_var(v: Var, e: u32) -> Mono {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(v, e)])
        }
    }

    /// The part of the monomial built from variables matching `keep`.
    pub fn filter<F: Fn(&Var) -> bool>(&self, keep: F) -> Mono {
        Mono(self.0.iter().filter(|(v, _)| keep(v)).cloned().collect())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    /// Graded order: total degree first, then lexicographic with the
    /// earlier variable (smaller in the Var order) dominating.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((v1, e1)), Some((v2, e2))) => match v1.cmp(v2) {
                    // self has a positive exponent on an earlier variable
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e1.cmp(e2) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

/// A sparse polynomial; maps monomials to nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, KNum>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(KNum::one())
    }

    pub fn constant(k: KNum) -> Self {
        let mut terms = BTreeMap::new();
        if !k.is_zero() {
            terms.insert(Mono::one(), k);
        }
        Poly { terms }
    }

    pub fn rational(q: BigRational) -> Self {
        Poly::constant(KNum::from_rational(q))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Mono::var(v), KNum::one())
    }

    pub fn term(m: Mono, k: KNum) -> Self {
        let mut terms = BTreeMap::new();
        if !k.is_zero() {
            terms.insert(m, k);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Mono::one()))
    }

    /// The constant term's coefficient.
    pub fn constant_coeff(&self) -> KNum {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(KNum::zero)
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &KNum)> {
        self.terms.iter()
    }

    /// Terms from the leading (largest) monomial down.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Mono, &KNum)> {
        self.terms.iter().rev()
    }

    /// Leading (maximal) term under the graded order.
    pub fn leading(&self) -> Option<(&Mono, &KNum)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Mono, k: KNum) {
        if k.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&k);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            Entry::Vacant(e) => {
                e.insert(k);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, k) in &other.terms {
            out.add_term(m.clone(), k.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, k1) in &self.terms {
            for (m2, k2) in &other.terms {
                out.add_term(m1.mul(m2), k1.mul(k2));
            }
        }
        out
    }

    pub fn mul_term(&self, m: &Mono, k: &KNum) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m1, k1)| (m1.mul(m), k1.mul(k)))
                .collect(),
        }
    }

    pub fn scale(&self, k: &KNum) -> Poly {
        self.mul_term(&Mono::one(), k)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative with respect to one variable.
    pub fn partial(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            let e = m.degree_of(v);
            if e > 0 {
                out.add_term(m.decrement(v), k.scale(&BigRational::from_integer(e.into())));
            }
        }
        out
    }

    /// All variables appearing in the polynomial.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in m.iter() {
                out.insert(v.clone());
            }
        }
        out
    }

    pub fn contains_var<F: Fn(&Var) -> bool>(&self, pred: F) -> bool {
        self.terms
            .keys()
            .any(|m| m.iter().any(|(v, _)| pred(v)))
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_of(v)).max().unwrap_or(0)
    }

    /// Maximal total degree in nonlocal symbols.
    pub fn omega_degree(&self) -> u64 {
        self.terms.keys().map(|m| m.omega_degree()).max().unwrap_or(0)
    }

    /// True when all coefficients are plain rationals.
    pub fn has_rational_coeffs(&self) -> bool {
        self.terms.values().all(|k| k.is_rational())
    }

    /// Substitutes zero for every variable matched by `pred`.
    pub fn subst_zero<F: Fn(&Var) -> bool>(&self, pred: F) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            if !m.iter().any(|(v, _)| pred(v)) {
                out.add_term(m.clone(), k.clone());
            }
        }
        out
    }

    /// Exact division; None when the division leaves a remainder.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let (dm, dk) = d.leading().expect("nonzero divisor");
        let dk_inv = dk.inv().ok()?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rk)) = r.leading() {
            let m = rm.try_div(dm)?;
            let c = rk.mul(&dk_inv);
            let t = Poly::term(m, c);
            q = q.add(&t);
            r = r.sub(&d.mul(&t));
        }
        Some(q)
    }

    /// The coefficients of the polynomial viewed as univariate in `v`.
    pub fn coeffs_in(&self, v: &Var) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, k) in &self.terms {
            let e = m.degree_of(v);
            let rest = m.filter(|w| w != v);
            out.entry(e).or_default().add_term(rest, k.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Splits by constant-monomial so each component has rational
    /// coefficients; used by the GCD layer.
    pub fn rational_components(&self) -> Vec<Poly> {
        let mut map: BTreeMap<super::coeff::CMono, Poly> = BTreeMap::new();
        for (m, k) in &self.terms {
            for (cm, q) in k.terms() {
                map.entry(cm.clone())
                    .or_default()
                    .add_term(m.clone(), KNum::from_rational(q.clone()));
            }
        }
        map.into_values().collect()
    }

    /// Scales so the leading coefficient becomes 1. Requires an invertible
    /// leading coefficient (always true over the field).
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, k)) => {
                let inv = k.inv().expect("leading coefficient invertible");
                self.scale(&inv)
            }
        }
    }

    /// Substitute a polynomial for a variable (used for small rewrites;
    /// exponential in the exponent, fine for the low degrees we handle).
    pub fn subst_var(&self, v: &Var, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            let e = m.degree_of(v);
            let rest = m.filter(|w| w != v);
            let base = Poly::term(rest, k.clone());
            out = out.add(&base.mul(&value.pow(e)));
        }
        out
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::one()
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

impl std::ops::Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        Poly::add(&self, &rhs)
    }
}

impl std::ops::Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        Poly::mul(&self, &rhs)
    }
}
