//! Canonical differential-algebra expressions.
//!
//! A `DiffExpr` is a fraction of sparse polynomials in x, the jet
//! variables, nonlocal symbols ω, and the internal scaling parameter λ,
//! kept in a canonical form:
//!
//! - the denominator is free of nonlocal symbols and declared constants
//!   (constants are rationalized away by conjugation),
//! - numerator and denominator share no polynomial factor (multivariate
//!   GCD over the rationals, applied per constant-monomial component),
//! - the denominator is monic under the graded monomial order.
//!
//! Two expressions are equal as ring elements iff their canonical forms
//! are componentwise equal, which is what derived `PartialEq` checks.

use num::{BigRational, Signed};
use std::collections::{BTreeMap, BTreeSet};

use super::coeff::KNum;
use super::gcd::poly_gcd_list;
use super::poly::{Mono, Poly, Var};
use super::{NonlocalSymbol, RingError};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffExpr {
    num: Poly,
    den: Poly,
}

impl DiffExpr {
    // ── constructors ────────────────────────────────────────────────

    pub fn zero() -> Self {
        DiffExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        DiffExpr { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_i64(n: i64) -> Self {
        DiffExpr { num: Poly::constant(KNum::from_i64(n)), den: Poly::one() }
    }

    pub fn from_rational(q: BigRational) -> Self {
        DiffExpr { num: Poly::rational(q), den: Poly::one() }
    }

    pub fn from_knum(k: KNum) -> Self {
        DiffExpr { num: Poly::constant(k), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        DiffExpr { num: p, den: Poly::one() }
    }

    pub fn x() -> Self {
        DiffExpr::from_poly(Poly::var(Var::X))
    }

    /// The jet variable u^field_order.
    pub fn jet(field: u16, order: u32) -> Self {
        DiffExpr::from_poly(Poly::var(Var::Jet { field, order }))
    }

    pub fn omega(sym: &NonlocalSymbol) -> Self {
        DiffExpr::from_poly(Poly::var(Var::Omega(sym.clone())))
    }

    pub fn constant(c: &super::coeff::AlgebraicConstant) -> Self {
        DiffExpr::from_knum(KNum::from_constant(c))
    }

    pub(crate) fn lambda() -> Self {
        DiffExpr::from_poly(Poly::var(Var::Lambda))
    }

    /// Builds the canonical fraction num/den.
    pub fn new(num: Poly, den: Poly) -> Result<Self, RingError> {
        if den.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(DiffExpr::zero());
        }
        let (mut num, mut den) = (num, den);

        // Move declared constants out of the denominator by conjugation.
        loop {
            let c = den
                .terms()
                .find_map(|(_, k)| k.some_constant());
            match c {
                None => break,
                Some(c) => {
                    let (a, b) = split_const(&den, &c);
                    let conj = a.sub(&b.mul_term(
                        &Mono::one(),
                        &KNum::from_constant(&c),
                    ));
                    let r = KNum::from_rational(c.square().clone());
                    num = num.mul(&conj);
                    den = a.mul(&a).sub(&b.mul(&b).scale(&r));
                    if den.is_zero() {
                        return Err(RingError::ReducibleConstant { name: c.name().to_string() });
                    }
                }
            }
        }

        if let Some(sym) = first_omega(&den) {
            return Err(RingError::NonlocalDenominator { symbol: sym.name().to_string() });
        }

        // GCD reduction, per rational component of the numerator.
        let mut comps = num.rational_components();
        comps.push(den.clone());
        let g = poly_gcd_list(comps.iter());
        if !g.is_constant() {
            num = num.div_exact(&g).expect("gcd divides numerator");
            den = den.div_exact(&g).expect("gcd divides denominator");
        }

        // Monic denominator; the scale lands in the numerator.
        let lead = den.leading().expect("nonzero denominator").1.clone();
        let lead_inv = lead.inv().expect("denominator leading coeff is rational");
        num = num.scale(&lead_inv);
        den = den.scale(&lead_inv);

        Ok(DiffExpr { num, den })
    }

    // ── access ──────────────────────────────────────────────────────

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self == &DiffExpr::one()
    }

    /// The value as a coefficient-field element, if jet/x/ω/λ-free.
    pub fn as_knum(&self) -> Option<KNum> {
        if self.den == Poly::one() && self.num.is_constant() {
            Some(self.num.constant_coeff())
        } else {
            None
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_knum().and_then(|k| k.as_rational())
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == Poly::one()
    }

    pub fn is_omega_free(&self) -> bool {
        !self.num.contains_var(Var::is_omega)
    }

    pub fn omega_degree(&self) -> u64 {
        self.num.omega_degree()
    }

    pub fn contains_lambda(&self) -> bool {
        self.num.contains_var(|v| *v == Var::Lambda) || self.den.contains_var(|v| *v == Var::Lambda)
    }

    pub fn contains_x(&self) -> bool {
        self.num.contains_var(|v| *v == Var::X) || self.den.contains_var(|v| *v == Var::X)
    }

    /// All nonlocal symbols appearing in the expression.
    pub fn omega_symbols(&self) -> BTreeSet<NonlocalSymbol> {
        let mut out = BTreeSet::new();
        for v in self.num.vars() {
            if let Var::Omega(s) = v {
                out.insert(s);
            }
        }
        out
    }

    /// All jet variables (field, order) appearing in the expression.
    pub fn jet_vars(&self) -> BTreeSet<(u16, u32)> {
        let mut out = BTreeSet::new();
        for v in self.num.vars().into_iter().chain(self.den.vars()) {
            if let Var::Jet { field, order } = v {
                out.insert((field, order));
            }
        }
        out
    }

    /// The highest jet order appearing, if any jet appears.
    pub fn max_jet_order(&self) -> Option<u32> {
        self.jet_vars().into_iter().map(|(_, j)| j).max()
    }

    // ── arithmetic ──────────────────────────────────────────────────

    pub fn add(&self, other: &DiffExpr) -> DiffExpr {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        DiffExpr::new(num, den).expect("addition preserves invariants")
    }

    pub fn sub(&self, other: &DiffExpr) -> DiffExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffExpr {
        DiffExpr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &DiffExpr) -> DiffExpr {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        DiffExpr::new(num, den).expect("multiplication preserves invariants")
    }

    pub fn scale_rational(&self, q: &BigRational) -> DiffExpr {
        DiffExpr::new(self.num.scale(&KNum::from_rational(q.clone())), self.den.clone())
            .expect("scaling preserves invariants")
    }

    pub fn scale_knum(&self, k: &KNum) -> DiffExpr {
        DiffExpr::new(self.num.scale(k), self.den.clone()).expect("scaling preserves invariants")
    }

    /// Division; fails on zero divisors and on denominators that would
    /// carry nonlocal symbols.
    pub fn try_div(&self, other: &DiffExpr) -> Result<DiffExpr, RingError> {
        DiffExpr::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<DiffExpr, RingError> {
        DiffExpr::one().try_div(self)
    }

    pub fn pow(&self, e: u32) -> DiffExpr {
        let mut out = DiffExpr::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    // ── calculus ────────────────────────────────────────────────────

    /// Formal partial derivative with respect to a single variable.
    pub fn partial(&self, v: &Var) -> DiffExpr {
        let dn = self.num.partial(v);
        let dd = self.den.partial(v);
        if dd.is_zero() {
            return DiffExpr::new(dn, self.den.clone()).expect("partial preserves invariants");
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        let den = self.den.mul(&self.den);
        DiffExpr::new(num, den).expect("partial preserves invariants")
    }

    /// ∂/∂u^field_order.
    pub fn partial_jet(&self, field: u16, order: u32) -> DiffExpr {
        self.partial(&Var::Jet { field, order })
    }

    /// The total derivative D = ∂_x + Σ u^a_{j+1} ∂/∂u^a_j, extended to
    /// nonlocal symbols by D(ω) = density(ω).
    pub fn total_derivative(&self) -> DiffExpr {
        let dn = d_poly(&self.num);
        if self.den == Poly::one() {
            return dn;
        }
        let dd = d_poly(&self.den);
        let den_e = DiffExpr::from_poly(self.den.clone());
        // (n/d)' = (n'·d − n·d') / d²
        let num_e = DiffExpr::from_poly(self.num.clone());
        dn.mul(&den_e)
            .sub(&num_e.mul(&dd))
            .try_div(&den_e.mul(&den_e))
            .expect("denominator square is nonzero and ω-free")
    }

    /// Applies D `k` times.
    pub fn total_derivative_n(&self, k: u32) -> DiffExpr {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.total_derivative();
        }
        out
    }

    /// Substitutes u^a_j ↦ λ·u^a_j for every jet variable. The input must
    /// be free of nonlocal symbols.
    pub fn scale_jets(&self) -> Result<DiffExpr, RingError> {
        if let Some(sym) = self.omega_symbols().into_iter().next() {
            return Err(RingError::NonlocalScale { symbol: sym.name().to_string() });
        }
        DiffExpr::new(scale_poly(&self.num), scale_poly(&self.den))
    }

    /// ∫₀¹ e dλ for e polynomial in λ; errors if λ survives in the
    /// denominator after canonicalization.
    pub fn integrate_unit_interval(&self) -> Result<DiffExpr, RingError> {
        if self.den.contains_var(|v| *v == Var::Lambda) {
            return Err(RingError::NonPolynomialParameter);
        }
        let mut num = Poly::zero();
        for (m, k) in self.num.terms() {
            let e = m.degree_of(&Var::Lambda);
            let rest = m.filter(|v| *v != Var::Lambda);
            let w = BigRational::new(1.into(), (e as i64 + 1).into());
            num.add_term(rest, k.scale(&w));
        }
        DiffExpr::new(num, self.den.clone())
    }

    /// Substitutes zero for every jet variable.
    pub fn subst_jets_zero(&self) -> Result<DiffExpr, RingError> {
        let num = self.num.subst_zero(Var::is_jet);
        let den = self.den.subst_zero(Var::is_jet);
        DiffExpr::new(num, den)
    }

    /// Substitutes λ ↦ λ² (for the rescaling composition law check).
    pub fn subst_lambda_squared(&self) -> DiffExpr {
        let sq = Poly::var(Var::Lambda).mul(&Poly::var(Var::Lambda));
        DiffExpr::new(
            self.num.subst_var(&Var::Lambda, &sq),
            self.den.subst_var(&Var::Lambda, &sq),
        )
        .expect("substitution preserves invariants")
    }

    /// Groups the expression by ω-monomial: e = Σ mᵢ·cᵢ with each cᵢ free
    /// of nonlocal symbols. Sorted with the largest ω-monomial last.
    pub fn omega_decompose(&self) -> Vec<(Mono, DiffExpr)> {
        let mut groups: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, k) in self.num.terms() {
            let om = m.filter(Var::is_omega);
            let rest = m.filter(|v| !v.is_omega());
            groups.entry(om).or_default().add_term(rest, k.clone());
        }
        groups
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(om, p)| {
                (
                    om,
                    DiffExpr::new(p, self.den.clone()).expect("component preserves invariants"),
                )
            })
            .collect()
    }

    /// The coefficient of a given ω-monomial in the decomposition.
    pub fn omega_coefficient(&self, om: &Mono) -> DiffExpr {
        self.omega_decompose()
            .into_iter()
            .find(|(m, _)| m == om)
            .map(|(_, c)| c)
            .unwrap_or_else(DiffExpr::zero)
    }

    /// The ω-free part of the expression.
    pub fn omega_free_part(&self) -> DiffExpr {
        self.omega_coefficient(&Mono::one())
    }

    /// Exact evaluation at a rational point (test oracle). Every variable
    /// present must be assigned; constants stay symbolic in the result.
    pub fn eval(&self, point: &BTreeMap<Var, BigRational>) -> Result<KNum, RingError> {
        let n = eval_poly(&self.num, point)?;
        let d = eval_poly(&self.den, point)?;
        n.div(&d)
    }
}

/// Splits `p` into (a, b) with p = a + c·b and b free of c.
fn split_const(p: &Poly, c: &super::coeff::AlgebraicConstant) -> (Poly, Poly) {
    let mut a = Poly::zero();
    let mut b = Poly::zero();
    for (m, k) in p.terms() {
        let (ka, kb) = k.split(c);
        a.add_term(m.clone(), ka);
        b.add_term(m.clone(), kb);
    }
    (a, b)
}

fn first_omega(p: &Poly) -> Option<NonlocalSymbol> {
    p.vars().into_iter().find_map(|v| match v {
        Var::Omega(s) => Some(s),
        _ => None,
    })
}

/// Total derivative of a polynomial; fractional because D(ω) may be one.
fn d_poly(p: &Poly) -> DiffExpr {
    let mut poly_part = Poly::zero();
    let mut frac_part = DiffExpr::zero();
    for (m, k) in p.terms() {
        for (v, e) in m.iter() {
            let cof = m.decrement(v);
            let scale = k.scale(&BigRational::from_integer((*e).into()));
            match v {
                Var::X => poly_part.add_term(cof, scale),
                Var::Jet { field, order } => poly_part.add_term(
                    cof.mul(&Mono::var(Var::Jet { field: *field, order: order + 1 })),
                    scale,
                ),
                Var::Omega(sym) => {
                    let base = DiffExpr::new(Poly::term(cof, scale), Poly::one())
                        .expect("term is polynomial");
                    frac_part = frac_part.add(&base.mul(sym.density()));
                }
                Var::Lambda => {}
            }
        }
    }
    DiffExpr::from_poly(poly_part).add(&frac_part)
}

fn scale_poly(p: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, k) in p.terms() {
        let jd = m.jet_degree();
        let lam = Mono::pow_var(Var::Lambda, jd as u32);
        out.add_term(m.mul(&lam), k.clone());
    }
    out
}

fn eval_poly(p: &Poly, point: &BTreeMap<Var, BigRational>) -> Result<KNum, RingError> {
    let mut acc = KNum::zero();
    for (m, k) in p.terms() {
        let mut factor = BigRational::from_integer(1.into());
        for (v, e) in m.iter() {
            let val = point.get(v).ok_or(RingError::UnassignedVariable)?;
            for _ in 0..*e {
                factor *= val;
            }
        }
        acc = acc.add(&k.scale(&factor));
    }
    Ok(acc)
}

impl std::ops::Add for &DiffExpr {
    type Output = DiffExpr;
    fn add(self, rhs: &DiffExpr) -> DiffExpr {
        DiffExpr::add(self, rhs)
    }
}
impl std::ops::Sub for &DiffExpr {
    type Output = DiffExpr;
    fn sub(self, rhs: &DiffExpr) -> DiffExpr {
        DiffExpr::sub(self, rhs)
    }
}
impl std::ops::Mul for &DiffExpr {
    type Output = DiffExpr;
    fn mul(self, rhs: &DiffExpr) -> DiffExpr {
        DiffExpr::mul(self, rhs)
    }
}
impl std::ops::Neg for &DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        DiffExpr::neg(self)
    }
}

/// True for a nonnegative rational constant (used by certificate
/// normalizations that need sign information).
pub fn is_nonneg_rational(e: &DiffExpr) -> bool {
    e.as_rational().map_or(false, |q| !q.is_negative())
}
