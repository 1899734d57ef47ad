//! Reduction of densities modulo total derivatives.
//!
//! Densities may involve nonlocal symbols ω_β with D(ω_β) = K_β. The
//! splitting engine peels off an exact part: f = D(σ) + ρ, rewriting
//! ω-monomial groups from the largest down. A group c·m is absorbed when
//! c = Σ_β d_β·K_β + D(s) for constants d_β over an admissible set of
//! symbols (found by matching variational derivatives), because then
//! c·m differs from D(s·m + Σ_β d_β·ω_β·m/(e_β+1)) by terms with strictly
//! smaller ω-monomials. Irreducible groups accumulate in the residue ρ.

use std::collections::BTreeSet;

use crate::linalg::SpanReduce;
use crate::ring::{DiffExpr, KNum, Mono, NonlocalSymbol, Poly, Var};

use super::{antiderivative, euler, VarError};

/// An exact/residual splitting f = D(potential) + residue.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitExact {
    pub potential: DiffExpr,
    pub residue: DiffExpr,
}

fn mono_symbols(m: &Mono) -> Vec<(NonlocalSymbol, u32)> {
    m.iter()
        .filter_map(|(v, e)| match v {
            Var::Omega(sym) => Some((sym.clone(), *e)),
            _ => None,
        })
        .collect()
}

fn mono_expr(m: &Mono) -> DiffExpr {
    DiffExpr::from_poly(Poly::term(m.clone(), KNum::one()))
}

/// One admissible rewrite attempt for the group c·m. Returns the partial
/// potential whose derivative cancels the group (modulo smaller
/// ω-monomials), or None when the group is irreducible.
fn reduce_group(
    c: &DiffExpr,
    m: &Mono,
    n: usize,
    universe: &[NonlocalSymbol],
) -> Result<Option<DiffExpr>, VarError> {
    let in_m = mono_symbols(m);
    if in_m.iter().any(|(s, _)| !s.density().is_omega_free()) {
        return Ok(None);
    }
    let max_sym = in_m.iter().map(|(s, _)| s.clone()).max();
    let mut candidates: Vec<(NonlocalSymbol, u32)> = Vec::new();
    for sym in universe {
        if !sym.density().is_omega_free() {
            continue;
        }
        match &max_sym {
            None => candidates.push((sym.clone(), 0)),
            Some(top) => {
                if sym == top {
                    let e = in_m.iter().find(|(s, _)| s == sym).map(|(_, e)| *e).unwrap();
                    candidates.push((sym.clone(), e));
                } else if sym > top {
                    candidates.push((sym.clone(), 0));
                }
            }
        }
    }
    // Dependent densities are dropped from the basis; their coefficient
    // stays zero, which picks one valid combination deterministically.
    let mut span = SpanReduce::new(n);
    let mut kept: Vec<(NonlocalSymbol, u32)> = Vec::new();
    let mut cols: Vec<usize> = Vec::new();
    for (sym, e) in candidates {
        let ek = euler(sym.density(), n)?;
        if matches!(
            span.insert(&ek).map_err(VarError::Ring)?,
            crate::linalg::SpanOutcome::Independent
        ) {
            cols.push(kept.len());
        }
        kept.push((sym, e));
    }
    let target = euler(c, n)?;
    let Some(coeffs) = span.try_express(&target).map_err(VarError::Ring)? else {
        return Ok(None);
    };
    let mut d = vec![KNum::zero(); kept.len()];
    for (idx, col) in cols.iter().enumerate() {
        d[*col] = coeffs[idx].clone();
    }
    let mut local = c.clone();
    for ((sym, _), dk) in kept.iter().zip(&d) {
        if !dk.is_zero() {
            local = local.sub(&DiffExpr::from_knum(dk.clone()).mul(sym.density()));
        }
    }
    let sigma_local = match antiderivative(&local, n) {
        Ok(g) => g,
        Err(VarError::Unsupported { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut sigma = sigma_local.mul(&mono_expr(m));
    for ((sym, e), dk) in kept.iter().zip(&d) {
        if dk.is_zero() {
            continue;
        }
        let weight = KNum::from_rational(num::BigRational::new(1.into(), (*e as i64 + 1).into()))
            .mul(dk);
        let term = DiffExpr::from_knum(weight).mul(&mono_expr(m)).mul(&DiffExpr::omega(sym));
        sigma = sigma.add(&term);
    }
    Ok(Some(sigma))
}

/// Splits f = D(potential) + residue, reducing nonlocal monomial groups
/// against the declared symbols. The identity is re-verified before
/// returning.
pub fn split_exact(
    f: &DiffExpr,
    n: usize,
    symbols: &[NonlocalSymbol],
) -> Result<SplitExact, VarError> {
    let mut universe: BTreeSet<NonlocalSymbol> = symbols.iter().cloned().collect();
    universe.extend(f.omega_symbols());
    let universe: Vec<NonlocalSymbol> = universe.into_iter().collect();

    let mut potential = DiffExpr::zero();
    let mut residue = DiffExpr::zero();
    let mut work = f.clone();
    let mut last_top: Option<Mono> = None;
    while !work.is_zero() {
        let groups = work.omega_decompose();
        let Some((top, c)) = groups.last().cloned() else { break };
        if let Some(prev) = &last_top {
            assert!(top < *prev, "nonlocal reduction failed to make progress");
        }
        if top.is_one() {
            match reduce_group(&c, &top, n, &universe)? {
                Some(sigma) => potential = potential.add(&sigma),
                None => residue = residue.add(&c),
            }
            break;
        }
        match reduce_group(&c, &top, n, &universe)? {
            Some(sigma) => {
                work = work.sub(&sigma.total_derivative());
                potential = potential.add(&sigma);
            }
            None => {
                let grp = c.mul(&mono_expr(&top));
                work = work.sub(&grp);
                residue = residue.add(&grp);
            }
        }
        last_top = Some(top);
    }
    let check = potential.total_derivative().add(&residue);
    assert!(check == *f, "splitting postcondition failed");
    Ok(SplitExact { potential, residue })
}

/// How unresolvable integrals are handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolutionMode {
    /// Error when the integrand is not exact relative to the symbols.
    Strict,
    /// Introduce a fresh nonlocal symbol for the irreducible part.
    Lax,
}

/// The result of resolving D⁻¹ of a density.
#[derive(Clone, Debug)]
pub struct ResolvedIntegral {
    pub value: DiffExpr,
    pub introduced: Option<NonlocalSymbol>,
}

/// D⁻¹(h) as an element of the extended ring.
pub fn resolve_dinv(
    h: &DiffExpr,
    n: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<ResolvedIntegral, VarError> {
    let split = split_exact(h, n, symbols)?;
    if split.residue.is_zero() {
        return Ok(ResolvedIntegral { value: split.potential, introduced: None });
    }
    if mode == ResolutionMode::Strict || !split.residue.is_omega_free() {
        return Err(VarError::Irreducible { residue: split.residue });
    }
    let fresh = NonlocalSymbol::fresh(split.residue);
    let value = split.potential.add(&DiffExpr::omega(&fresh));
    Ok(ResolvedIntegral { value, introduced: Some(fresh) })
}

/// Verdict on whether a functional (a density modulo Im D) vanishes.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassZero {
    Zero,
    Nonzero { variational: Vec<DiffExpr> },
    Inconclusive { residue: DiffExpr },
}

/// A local functional ∫ f dx represented by its density.
#[derive(Clone, Debug)]
pub struct FunctionalClass {
    density: DiffExpr,
    fields: usize,
}

impl FunctionalClass {
    pub fn new(density: DiffExpr, fields: usize) -> Self {
        FunctionalClass { density, fields }
    }

    pub fn density(&self) -> &DiffExpr {
        &self.density
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn add(&self, other: &FunctionalClass) -> FunctionalClass {
        assert_eq!(self.fields, other.fields);
        FunctionalClass::new(self.density.add(&other.density), self.fields)
    }

    pub fn sub(&self, other: &FunctionalClass) -> FunctionalClass {
        assert_eq!(self.fields, other.fields);
        FunctionalClass::new(self.density.sub(&other.density), self.fields)
    }

    pub fn scale(&self, k: &KNum) -> FunctionalClass {
        FunctionalClass::new(self.density.scale_knum(k), self.fields)
    }

    /// A reduced representative: the density minus the exact part that
    /// the splitting engine can remove.
    pub fn representative(&self, symbols: &[NonlocalSymbol]) -> Result<DiffExpr, VarError> {
        Ok(split_exact(&self.density, self.fields, symbols)?.residue)
    }

    /// Trilean test for ∫ f dx = 0.
    pub fn is_zero(&self, symbols: &[NonlocalSymbol]) -> Result<ClassZero, VarError> {
        let r = self.representative(symbols)?;
        if r.is_zero() {
            return Ok(ClassZero::Zero);
        }
        if !r.is_omega_free() {
            return Ok(ClassZero::Inconclusive { residue: r });
        }
        let variational = euler(&r, self.fields)?;
        if variational.iter().any(|c| !c.is_zero()) {
            Ok(ClassZero::Nonzero { variational })
        } else {
            Ok(ClassZero::Inconclusive { residue: r })
        }
    }

    /// Trilean test for equality of two functionals.
    pub fn equals(
        &self,
        other: &FunctionalClass,
        symbols: &[NonlocalSymbol],
    ) -> Result<ClassZero, VarError> {
        self.sub(other).is_zero(symbols)
    }
}
