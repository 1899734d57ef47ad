//! Coefficient field: rationals extended by declared algebraic constants.
//!
//! A declared constant `c` carries a quadratic reduction rule c^2 ↦ r with
//! r a nonzero rational. Every product of constants therefore reduces to a
//! rational combination of *squarefree* constant monomials, and the whole
//! coefficient domain is ℚ adjoined finitely many square roots. For an
//! irreducible rule (r not a rational square) this is a field; a reducible
//! rule shows up as a zero divisor when inverting, and is reported as such.

use num::{BigRational, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::RingError;

static NEXT_CONST_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
struct ConstData {
    id: u64,
    name: String,
    /// The rational value of the constant's square.
    square: BigRational,
}

/// A declared algebraic constant with a quadratic reduction rule.
///
/// Constants compare by identity (creation order), not by name: two
/// declarations with the same name are distinct ring elements. Sessions
/// intern by name so this never surfaces through the CLI.
#[derive(Clone)]
pub struct AlgebraicConstant(Arc<ConstData>);

impl AlgebraicConstant {
    /// Declares a constant with the reduction rule `name`^2 = `square`.
    pub fn new(name: &str, square: BigRational) -> Result<Self, RingError> {
        if square.is_zero() {
            return Err(RingError::ZeroConstantSquare { name: name.to_string() });
        }
        Ok(AlgebraicConstant(Arc::new(ConstData {
            id: NEXT_CONST_ID.fetch_add(1, Ordering::Relaxed),
            name: name.to_string(),
            square,
        })))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    /// The rational value of the constant's square.
    pub fn square(&self) -> &BigRational {
        &self.0.square
    }

    #[inline]
    fn id(&self) -> u64 {
        self.0.id
    }
}

impl PartialEq for AlgebraicConstant {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}
impl Eq for AlgebraicConstant {}
impl PartialOrd for AlgebraicConstant {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for AlgebraicConstant {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id().cmp(&other.id())
    }
}
impl fmt::Debug for AlgebraicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.name)
    }
}

/// A squarefree product of declared constants (the reduced monomial form).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct CMono(Vec<AlgebraicConstant>);

impl CMono {
    pub fn one() -> Self {
        CMono(Vec::new())
    }

    pub fn single(c: &AlgebraicConstant) -> Self {
        CMono(vec![c.clone()])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn constants(&self) -> &[AlgebraicConstant] {
        &self.0
    }

    pub fn contains(&self, c: &AlgebraicConstant) -> bool {
        self.0.iter().any(|d| d == c)
    }

    /// Removes `c` from the monomial; caller must check `contains` first.
    fn without(&self, c: &AlgebraicConstant) -> CMono {
        CMono(self.0.iter().filter(|d| *d != c).cloned().collect())
    }

    /// Multiplies two squarefree monomials, returning the reduced monomial
    /// and the rational factor produced by squared constants.
    fn mul(&self, other: &CMono) -> (CMono, BigRational) {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let mut factor = BigRational::from_integer(1.into());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    factor *= self.0[i].square();
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        (CMono(out), factor)
    }
}

/// An element of the coefficient field: a rational combination of
/// squarefree constant monomials. The plain rationals are the terms with
/// the empty monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct KNum {
    terms: BTreeMap<CMono, BigRational>,
}

impl KNum {
    pub fn zero() -> Self {
        KNum { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::from_integer(1.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(CMono::one(), q);
        }
        KNum { terms }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_constant(c: &AlgebraicConstant) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(CMono::single(c), BigRational::from_integer(1.into()));
        KNum { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map_or(false, |q| q == BigRational::from_integer(1.into()))
    }

    /// The rational value, if the element carries no constants.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(q) = self.terms.get(&CMono::one()) {
                return Some(q.clone());
            }
        }
        None
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CMono, &BigRational)> {
        self.terms.iter()
    }

    /// The sole term, if the element is a rational multiple of one
    /// constant monomial.
    pub fn single_term(&self) -> Option<(&CMono, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Any constant appearing in the element, if there is one.
    pub fn some_constant(&self) -> Option<AlgebraicConstant> {
        self.terms
            .keys()
            .flat_map(|m| m.constants().iter())
            .next()
            .cloned()
    }

    fn add_term(&mut self, mono: CMono, q: BigRational) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += q;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(q);
            }
        }
    }

    pub fn add(&self, other: &KNum) -> KNum {
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }

    pub fn neg(&self) -> KNum {
        KNum {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), -q.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &KNum) -> KNum {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &KNum) -> KNum {
        let mut out = KNum::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &other.terms {
                let (m, factor) = m1.mul(m2);
                out.add_term(m, q1 * q2 * factor);
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> KNum {
        if q.is_zero() {
            return KNum::zero();
        }
        KNum {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    /// Splits into (part free of `c`, cofactor of `c`): self = a + c·b.
    pub fn split(&self, c: &AlgebraicConstant) -> (KNum, KNum) {
        let mut a = KNum::zero();
        let mut b = KNum::zero();
        for (m, q) in &self.terms {
            if m.contains(c) {
                b.add_term(m.without(c), q.clone());
            } else {
                a.add_term(m.clone(), q.clone());
            }
        }
        (a, b)
    }

    /// Multiplicative inverse via successive conjugation over each constant.
    pub fn inv(&self) -> Result<KNum, RingError> {
        if self.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        match self.some_constant() {
            None => {
                let q = self.terms.get(&CMono::one()).expect("nonzero rational");
                Ok(KNum::from_rational(q.recip()))
            }
            Some(c) => {
                let (a, b) = self.split(&c);
                // (a + c b)(a − c b) = a² − r b², free of c.
                let r = KNum::from_rational(c.square().clone());
                let denom = a.mul(&a).sub(&b.mul(&b).mul(&r));
                if denom.is_zero() {
                    return Err(RingError::ReducibleConstant { name: c.name().to_string() });
                }
                let dinv = denom.inv()?;
                let conj = a.sub(&KNum::from_constant(&c).mul(&b));
                Ok(conj.mul(&dinv))
            }
        }
    }

    pub fn div(&self, other: &KNum) -> Result<KNum, RingError> {
        Ok(self.mul(&other.inv()?))
    }

    /// True when the element is a nonnegative rational.
    pub fn is_nonneg_rational(&self) -> bool {
        self.as_rational().map_or(false, |q| !q.is_negative())
    }
}
