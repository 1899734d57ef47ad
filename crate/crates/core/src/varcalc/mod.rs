//! Variational calculus on jet space.
//!
//! The Euler operator δ/δu^a = Σ_j (−D)^j ∘ ∂/∂u^a_j decides exactness:
//! for densities polynomial in x, a local density is a total x-derivative
//! exactly when its variational derivative vanishes. The homotopy formula
//! reconstructs antiderivatives, and the splitting engine in [`split`]
//! reduces densities containing nonlocal symbols modulo Im D.

mod frechet;
mod split;

pub use frechet::{
    directional, directional_vec, frechet, helmholtz_is_variational, reconstruct_density,
    Directional,
};
pub use split::{
    resolve_dinv, split_exact, ClassZero, FunctionalClass, ResolutionMode, ResolvedIntegral,
    SplitExact,
};

use num::BigRational;
use thiserror::Error;

use crate::ring::{DiffExpr, RingError, Var};

/// Components of a vector field (one entry per dependent variable).
pub type LocalVector = Vec<DiffExpr>;
/// Components of a covector, such as a variational derivative.
pub type LocalCovector = Vec<DiffExpr>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VarError {
    #[error("`{operation}` requires a local expression, found nonlocal symbol `{symbol}`")]
    NonlocalInput { operation: &'static str, symbol: String },
    #[error("density is not a total derivative")]
    NotExact { variational: Vec<DiffExpr> },
    #[error("antiderivative leaves the ring: {reason}")]
    Unsupported { reason: String },
    #[error("covector is not a variational gradient")]
    NotVariational,
    #[error("integral cannot be resolved against the declared nonlocal symbols")]
    Irreducible { residue: DiffExpr },
    #[error(transparent)]
    Ring(#[from] RingError),
}

pub(crate) fn ensure_local(operation: &'static str, f: &DiffExpr) -> Result<(), VarError> {
    match f.omega_symbols().into_iter().next() {
        Some(sym) => {
            Err(VarError::NonlocalInput { operation, symbol: sym.name().to_string() })
        }
        None => Ok(()),
    }
}

/// (−D)^k applied to `e`.
fn d_pow_signed(e: &DiffExpr, k: u32) -> DiffExpr {
    let d = e.total_derivative_n(k);
    if k % 2 == 1 { d.neg() } else { d }
}

pub(crate) fn binom(i: u32, j: u32) -> BigRational {
    let mut c = num::BigInt::from(1);
    for t in 0..j.min(i - j) {
        c = c * num::BigInt::from(i - t) / num::BigInt::from(t + 1);
    }
    BigRational::from_integer(c)
}

/// The variational derivative (δf/δu¹, …, δf/δuⁿ).
pub fn euler(f: &DiffExpr, n: usize) -> Result<LocalCovector, VarError> {
    ensure_local("euler", f)?;
    let jets = f.jet_vars();
    let mut out = Vec::with_capacity(n);
    for a in 0..n as u16 {
        let mut comp = DiffExpr::zero();
        for &(field, order) in &jets {
            if field != a {
                continue;
            }
            comp = comp.add(&d_pow_signed(&f.partial_jet(a, order), order));
        }
        out.push(comp);
    }
    Ok(out)
}

/// The higher Euler operator E_a^{(j)}(f) = Σ_{i≥j} C(i,j)·(−D)^{i−j}(∂f/∂u^a_i).
pub fn higher_euler(f: &DiffExpr, field: u16, j: u32) -> Result<DiffExpr, VarError> {
    ensure_local("higher_euler", f)?;
    let mut out = DiffExpr::zero();
    for &(a, i) in &f.jet_vars() {
        if a != field || i < j {
            continue;
        }
        let term = d_pow_signed(&f.partial_jet(a, i), i - j);
        out = out.add(&term.scale_rational(&binom(i, j)));
    }
    Ok(out)
}

/// Whether the local density `f` is a total x-derivative.
pub fn is_exact(f: &DiffExpr, n: usize) -> Result<bool, VarError> {
    Ok(euler(f, n)?.iter().all(|c| c.is_zero()))
}

/// An antiderivative g with D(g) = f, normalized to zero constant term.
///
/// The jet-dependent part comes from the homotopy formula
/// g = ∫₀¹ (Σ_a Σ_{j≥1} D^{j−1}(u^a·E_a^{(j)}(f)))[λu] dλ/λ and the
/// jet-free remainder is integrated as a polynomial in x. The result is
/// re-verified by differentiation.
pub fn antiderivative(f: &DiffExpr, n: usize) -> Result<DiffExpr, VarError> {
    ensure_local("antiderivative", f)?;
    if f.is_zero() {
        return Ok(DiffExpr::zero());
    }
    let variational = euler(f, n)?;
    if variational.iter().any(|c| !c.is_zero()) {
        return Err(VarError::NotExact { variational });
    }
    let mut interior = DiffExpr::zero();
    for a in 0..n as u16 {
        let max = f
            .jet_vars()
            .into_iter()
            .filter(|&(b, _)| b == a)
            .map(|(_, j)| j)
            .max()
            .unwrap_or(0);
        for j in 1..=max {
            let e = higher_euler(f, a, j)?;
            if e.is_zero() {
                continue;
            }
            let term = DiffExpr::jet(a, 0).mul(&e);
            interior = interior.add(&term.total_derivative_n(j - 1));
        }
    }
    let mut g = DiffExpr::zero();
    if !interior.is_zero() {
        let scaled = interior.scale_jets()?;
        let integrand = scaled.try_div(&DiffExpr::lambda())?;
        g = integrand.integrate_unit_interval().map_err(|_| VarError::Unsupported {
            reason: "homotopy integrand is not polynomial in the scaling parameter".to_string(),
        })?;
    }
    let remainder = f.sub(&g.total_derivative());
    if !remainder.is_zero() {
        if !remainder.jet_vars().is_empty() || !remainder.is_polynomial() {
            return Err(VarError::Unsupported {
                reason: "remainder after the homotopy step is not polynomial in x".to_string(),
            });
        }
        let mut tail = DiffExpr::zero();
        for (m, k) in remainder.numerator().terms() {
            let e = m.degree_of(&Var::X);
            let mono = DiffExpr::from_knum(k.clone())
                .mul(&DiffExpr::x().pow(e as u32 + 1))
                .scale_rational(&BigRational::new(1.into(), (e as i64 + 1).into()));
            tail = tail.add(&mono);
        }
        g = g.add(&tail);
    }
    if g.total_derivative() != *f {
        return Err(VarError::Unsupported {
            reason: "homotopy antiderivative failed re-verification".to_string(),
        });
    }
    Ok(g)
}
