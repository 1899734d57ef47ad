//! Linearization (Fréchet derivative) in the nonlocal setting.
//!
//! For f depending on jets and on nonlocal symbols ω_β with
//! D(ω_β) = K_β, the linearization along a flow Q is
//!
//!   f′[Q] = Σ_{a,j} (∂f/∂u^a_j)·D^j(Q^a) + Σ_β (∂f/∂ω_β)·D⁻¹(K_β′[Q]),
//!
//! and as an operator f′ = Σ (∂f/∂u^a_j)·D^j + Σ_β (∂f/∂ω_β)·D⁻¹∘K_β′,
//! where the composite D⁻¹∘K_β′ is rewritten into local terms plus a
//! rank-one tail.

use crate::opalg::{dinv_compose, PDOperator, Space, Tail, Variance};
use crate::ring::{DiffExpr, NonlocalSymbol, Var};

use super::{euler, resolve_dinv, ResolutionMode, VarError};

/// A directional derivative together with any nonlocal symbols that had
/// to be introduced to express it.
#[derive(Clone, Debug)]
pub struct Directional {
    pub value: DiffExpr,
    pub introduced: Vec<NonlocalSymbol>,
}

/// f′[Q], resolving D⁻¹ of differentiated densities against `symbols`.
pub fn directional(
    f: &DiffExpr,
    q: &[DiffExpr],
    fields: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Directional, VarError> {
    assert_eq!(q.len(), fields, "flow dimension");
    let mut universe: Vec<NonlocalSymbol> = symbols.to_vec();
    for s in f.omega_symbols() {
        if !universe.contains(&s) {
            universe.push(s);
        }
    }
    let mut introduced = Vec::new();
    let mut value = DiffExpr::zero();
    for (a, j) in f.jet_vars() {
        let c = f.partial_jet(a, j);
        value = value.add(&c.mul(&q[a as usize].total_derivative_n(j)));
    }
    for sym in f.omega_symbols() {
        let c = f.partial(&Var::Omega(sym.clone()));
        if c.is_zero() {
            continue;
        }
        let dk = directional(sym.density(), q, fields, &universe, mode)?;
        for s in dk.introduced {
            if !universe.contains(&s) {
                universe.push(s.clone());
                introduced.push(s);
            }
        }
        let r = resolve_dinv(&dk.value, fields, &universe, mode)?;
        if let Some(s) = r.introduced {
            universe.push(s.clone());
            introduced.push(s);
        }
        value = value.add(&c.mul(&r.value));
    }
    Ok(Directional { value, introduced })
}

/// Componentwise directional derivative of a vector or covector.
pub fn directional_vec(
    f: &[DiffExpr],
    q: &[DiffExpr],
    fields: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<(Vec<DiffExpr>, Vec<NonlocalSymbol>), VarError> {
    let mut universe: Vec<NonlocalSymbol> = symbols.to_vec();
    let mut introduced = Vec::new();
    let mut out = Vec::with_capacity(f.len());
    for comp in f {
        let d = directional(comp, q, fields, &universe, mode)?;
        for s in d.introduced {
            if !universe.contains(&s) {
                universe.push(s.clone());
                introduced.push(s);
            }
        }
        out.push(d.value);
    }
    Ok((out, introduced))
}

/// The linearization operator of an n-component object. `output` states
/// whether the components form a vector or a covector, which fixes the
/// operator's variance (the input is always a vector).
pub fn frechet(
    components: &[DiffExpr],
    output: Space,
    fields: usize,
) -> Result<PDOperator, VarError> {
    assert_eq!(components.len(), fields, "component count");
    let variance = Variance { input: Space::Vector, output };
    let mut op = PDOperator::new(fields, fields, fields, variance);
    for (i, f) in components.iter().enumerate() {
        for (a, j) in f.jet_vars() {
            op.add_coeff(i, a as usize, j, &f.partial_jet(a, j));
        }
        for sym in f.omega_symbols() {
            let c = f.partial(&Var::Omega(sym.clone()));
            if c.is_zero() {
                continue;
            }
            let density = sym.density();
            if let Some(nested) = density.omega_symbols().into_iter().next() {
                return Err(VarError::NonlocalInput {
                    operation: "frechet",
                    symbol: nested.name().to_string(),
                });
            }
            let mut residual = vec![DiffExpr::zero(); fields];
            for (a, j) in density.jet_vars() {
                let (locals, res) = dinv_compose(&density.partial_jet(a, j), j);
                residual[a as usize] = residual[a as usize].add(&res);
                for (power, loc) in locals {
                    op.add_coeff(i, a as usize, power, &c.mul(&loc));
                }
            }
            let mut left = vec![DiffExpr::zero(); fields];
            left[i] = c;
            op.add_tail(Tail::new(left, residual));
        }
    }
    Ok(op)
}

/// Whether a local covector is a variational gradient: its linearization
/// must be formally self-adjoint.
pub fn helmholtz_is_variational(w: &[DiffExpr], fields: usize) -> Result<bool, VarError> {
    for comp in w {
        super::ensure_local("helmholtz", comp)?;
    }
    let op = frechet(w, Space::Covector, fields)?;
    let diff = op.sub(&op.adjoint()).expect("shapes match");
    assert!(diff.tails().is_empty(), "local covector has no tails");
    for i in 0..fields {
        for j in 0..fields {
            if diff.diff_entry(i, j).values().any(|e| !e.is_zero()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Reconstructs H with δH/δu = w via H = ∫₀¹ u·w[λu] dλ, then verifies
/// the reconstruction.
pub fn reconstruct_density(w: &[DiffExpr], fields: usize) -> Result<DiffExpr, VarError> {
    assert_eq!(w.len(), fields, "component count");
    for comp in w {
        super::ensure_local("reconstruct_density", comp)?;
    }
    let mut integrand = DiffExpr::zero();
    for (a, comp) in w.iter().enumerate() {
        let scaled = comp.scale_jets()?;
        integrand = integrand.add(&DiffExpr::jet(a as u16, 0).mul(&scaled));
    }
    let h = integrand.integrate_unit_interval().map_err(|_| VarError::Unsupported {
        reason: "homotopy integrand is not polynomial in the scaling parameter".to_string(),
    })?;
    let grad = euler(&h, fields)?;
    for (g, comp) in grad.iter().zip(w) {
        if g != comp {
            return Err(VarError::NotVariational);
        }
    }
    Ok(h)
}
