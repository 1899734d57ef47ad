//! Exact differential algebra on jet space.
//!
//! The ring is ℚ(c₁, …)[x][u^a_j][ω_β] localized at polynomials free of
//! the nonlocal symbols ω: rational functions whose denominators involve
//! only x and jet variables. Declared constants cᵢ satisfy cᵢ² = rᵢ for
//! fixed rationals rᵢ and live in the coefficient field. The total
//! derivative D acts by
//!
//!   D = ∂x + Σ_{a,j} u^a_{j+1} ∂/∂u^a_j + Σ_β density(ω_β) ∂/∂ω_β.

pub mod coeff;
pub mod display;
pub mod expr;
pub mod gcd;
pub mod poly;

pub use coeff::{AlgebraicConstant, CMono, KNum};
pub use expr::DiffExpr;
pub use poly::{Mono, Poly, Var};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("constant `{name}` must square to a nonzero rational")]
    ZeroConstantSquare { name: String },
    #[error("constant `{name}` is a zero divisor: its square is already a rational square")]
    ReducibleConstant { name: String },
    #[error("denominator contains nonlocal symbol `{symbol}`")]
    NonlocalDenominator { symbol: String },
    #[error("jet rescaling applied to expression containing nonlocal symbol `{symbol}`")]
    NonlocalScale { symbol: String },
    #[error("expression is not polynomial in the scaling parameter")]
    NonPolynomialParameter,
    #[error("evaluation point leaves a variable unassigned")]
    UnassignedVariable,
    #[error("duplicate field name `{name}`")]
    DuplicateField { name: String },
    #[error("a system needs at least one field")]
    EmptyFieldSet,
}

static NEXT_SYMBOL_ID: AtomicU64 = AtomicU64::new(0);

#[derive(Debug)]
struct SymbolData {
    id: u64,
    name: String,
    density: DiffExpr,
}

/// A nonlocal symbol ω with a fixed total derivative D(ω) = density.
///
/// Identity is nominal: two symbols are equal only if they came from the
/// same `new` call, so redeclaring a name yields a distinct symbol.
#[derive(Clone, Debug)]
pub struct NonlocalSymbol(Arc<SymbolData>);

impl NonlocalSymbol {
    pub fn new(name: impl Into<String>, density: DiffExpr) -> Self {
        NonlocalSymbol(Arc::new(SymbolData {
            id: NEXT_SYMBOL_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            density,
        }))
    }

    /// A fresh symbol named after its unique id, for integrals that
    /// cannot be resolved against the declared symbols.
    pub fn fresh(density: DiffExpr) -> Self {
        let id = NEXT_SYMBOL_ID.fetch_add(1, Ordering::Relaxed);
        NonlocalSymbol(Arc::new(SymbolData { id, name: format!("nl{id}"), density }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn density(&self) -> &DiffExpr {
        &self.0.density
    }
}

impl PartialEq for NonlocalSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for NonlocalSymbol {}
impl PartialOrd for NonlocalSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NonlocalSymbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.id.cmp(&other.0.id)
    }
}
impl std::hash::Hash for NonlocalSymbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

/// The ordered list of dependent-variable names u¹, …, uⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSet {
    names: Vec<String>,
}

impl FieldSet {
    pub fn new(names: Vec<String>) -> Result<Self, RingError> {
        if names.is_empty() {
            return Err(RingError::EmptyFieldSet);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(RingError::DuplicateField { name: n.clone() });
            }
        }
        Ok(FieldSet { names })
    }

    /// Single field named `u`.
    pub fn single() -> Self {
        FieldSet { names: vec!["u".to_string()] }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, field: u16) -> &str {
        &self.names[field as usize]
    }

    pub fn index(&self, name: &str) -> Option<u16> {
        self.names.iter().position(|n| n == name).map(|i| i as u16)
    }

    pub fn indices(&self) -> impl Iterator<Item = u16> {
        0..self.len() as u16
    }
}
