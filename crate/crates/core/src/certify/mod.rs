//! Certificate procedures for symplectic and Hamiltonian structure.
//!
//! Every certificate is constructive: the returned data contain a potential
//! whose defining identity (`J = γ′ − (γ′)†`, `P̃ = L_τ(P)`, …) has been
//! re-verified exactly before the certificate is issued.  A nonzero residual
//! refutes; inputs outside a procedure's scope come back `NotApplicable` with
//! the obstruction named.

mod compat;
mod dn;

pub use compat::{
    compatibility_certificate, hamiltonian_pair_certificate, jpj_decompose, left_inverse_ok,
    CompatibilityCertificate, HamiltonianCertificate, JpjData,
};
pub use dn::{
    dn_canonical, dn_operator, dn_validate, zero_order_check, DnCanonicalReport, DnData,
    ZeroOrderReport,
};

use crate::linalg::SpanReduce;
use crate::opalg::{OpError, PDOperator, Space};
use crate::ring::{AlgebraicConstant, DiffExpr, KNum, NonlocalSymbol, RingError};
use crate::varcalc::{
    euler, frechet, helmholtz_is_variational, reconstruct_density, resolve_dinv, ResolutionMode,
    VarError,
};
use num::{BigRational, Signed};
use thiserror::Error;

/// Failure modes of the certificate procedures.
#[derive(Debug, Error)]
pub enum CertError {
    #[error("operator is not formally skew-symmetric")]
    NotSkew,
    #[error("the homotopy formula needs a purely differential operator, but tails are present")]
    TailsPresent,
    #[error("operator coefficients contain nonlocal variables")]
    NonlocalCoefficients,
    #[error("variational derivative of density {index} vanishes")]
    VanishingGradient { index: usize },
    #[error("variational derivatives are linearly dependent over constants")]
    DependentGradients,
    #[error("mismatched density and weight list lengths")]
    LengthMismatch,
    #[error("weight {index} is zero")]
    ZeroWeight { index: usize },
    #[error("provided density {index} does not have the tail vector as its gradient")]
    DensityMismatch { index: usize },
    #[error("left-inverse check failed: the composition is not the identity to the cutoff")]
    InverseCheckFailed,
    #[error("the metric must be a square matrix matching the number of fields")]
    MetricShape,
    #[error("metric entry ({i},{j}) must be a function of the fields only")]
    MetricEntry { i: usize, j: usize },
    #[error("metric entries ({i},{j}) and ({j},{i}) differ")]
    AsymmetricMetric { i: usize, j: usize },
    #[error("the metric is degenerate")]
    DegenerateMetric,
    #[error("the coordinate-change Jacobian is degenerate")]
    DegenerateJacobian,
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Var(#[from] VarError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Result of a certificate procedure: a verified witness, a refutation with
/// its nonzero residual, or an explanation of why the method does not apply.
#[derive(Debug, Clone)]
pub enum CertOutcome<T> {
    Certified(T),
    Refuted { residual: PDOperator },
    NotApplicable { reason: String },
}

impl<T> CertOutcome<T> {
    pub fn is_certified(&self) -> bool {
        matches!(self, CertOutcome::Certified(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> CertOutcome<U> {
        match self {
            CertOutcome::Certified(t) => CertOutcome::Certified(f(t)),
            CertOutcome::Refuted { residual } => CertOutcome::Refuted { residual },
            CertOutcome::NotApplicable { reason } => CertOutcome::NotApplicable { reason },
        }
    }
}

/// Potential covector produced by the homotopy formula, with its defining
/// identity re-checked.
#[derive(Debug, Clone)]
pub struct HomotopyPotential {
    /// `ζ = ∫₀¹ (J(u))[λu] dλ`.
    pub zeta: Vec<DiffExpr>,
    /// Whether `ζ′ − (ζ′)† = J` holds exactly.
    pub reproduces: bool,
    /// `J − (ζ′ − (ζ′)†)`; zero exactly when `reproduces`.
    pub residual: PDOperator,
}

/// The image `γ′ − (γ′)†` of a covector, in the operator's own variance.
pub(crate) fn gradient_image(gamma: &[DiffExpr], fields: usize) -> Result<PDOperator, OpError> {
    let gop = frechet(gamma, Space::Covector, fields)?;
    gop.sub(&gop.adjoint())
}

/// `ζ = ∫₀¹ (J(u))[λu] dλ` for a purely differential, local operator.
pub fn homotopy_potential(j: &PDOperator) -> Result<HomotopyPotential, CertError> {
    if !j.tails().is_empty() {
        return Err(CertError::TailsPresent);
    }
    let n = j.fields();
    let ids: Vec<DiffExpr> = (0..n).map(|a| DiffExpr::jet(a as u16, 0)).collect();
    let image = j.apply(&ids, &[], ResolutionMode::Strict)?;
    let mut zeta = Vec::with_capacity(n);
    for f in &image.components {
        if !f.is_omega_free() {
            return Err(CertError::NonlocalCoefficients);
        }
        zeta.push(f.scale_jets()?.integrate_unit_interval()?);
    }
    let residual = j.sub(&gradient_image(&zeta, n)?)?.normal_form()?;
    let reproduces = residual.is_zero()?;
    Ok(HomotopyPotential {
        zeta,
        reproduces,
        residual,
    })
}

/// `J = Σ ε_α (δψ_α/δu) ⊗ D⁻¹ ∘ (δψ_α/δu)`, symplectic by construction.
pub fn symplectic_from_densities(
    psis: &[DiffExpr],
    eps: &[KNum],
    fields: usize,
) -> Result<PDOperator, CertError> {
    if psis.len() != eps.len() {
        return Err(CertError::LengthMismatch);
    }
    let mut j = PDOperator::new(fields, fields, fields, crate::opalg::Variance::symplectic());
    let mut span = SpanReduce::new(fields);
    for (index, (psi, e)) in psis.iter().zip(eps).enumerate() {
        if e.is_zero() {
            return Err(CertError::ZeroWeight { index });
        }
        let w = euler(psi, fields)?;
        if w.iter().all(DiffExpr::is_zero) {
            return Err(CertError::VanishingGradient { index });
        }
        if matches!(span.insert(&w)?, crate::linalg::SpanOutcome::Dependent(_)) {
            return Err(CertError::DependentGradients);
        }
        let left: Vec<DiffExpr> = w.iter().map(|c| c.scale_knum(e)).collect();
        j.add_tail(crate::opalg::Tail::new(left, w));
    }
    Ok(j)
}

/// Per-density verdict of the Casimir test `P(δψ/δu) = 0`.
#[derive(Debug, Clone)]
pub struct CasimirVerdict {
    pub is_casimir: bool,
    /// `P(δψ/δu)`; the witness of failure when nonzero.
    pub witness: Vec<DiffExpr>,
}

/// Tests which densities generate Casimir functionals of a differential
/// Hamiltonian operator.
pub fn casimir_check(
    p: &PDOperator,
    psis: &[DiffExpr],
    symbols: &[NonlocalSymbol],
) -> Result<Vec<CasimirVerdict>, CertError> {
    let mut out = Vec::with_capacity(psis.len());
    for psi in psis {
        let w = euler(psi, p.fields())?;
        let applied = p.apply(&w, symbols, ResolutionMode::Strict)?;
        let is_casimir = applied.components.iter().all(DiffExpr::is_zero);
        out.push(CasimirVerdict {
            is_casimir,
            witness: applied.components,
        });
    }
    Ok(out)
}

/// Witness data for a weakly nonlocal symplectic operator: the potential
/// `γ = γ₀ + ½ Σ ε_α (δH_α/δu)·D⁻¹(H_α)` with `J = γ′ − (γ′)†`.
#[derive(Debug, Clone)]
pub struct SymplecticCertificate {
    pub gamma0: Vec<DiffExpr>,
    pub gamma: Vec<DiffExpr>,
    /// `(ε_α, H_α)` with `ε_α = ±1`.
    pub tail_data: Vec<(BigRational, DiffExpr)>,
    pub introduced: Vec<NonlocalSymbol>,
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let num = q.numer();
    let den = q.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Finds `s` in the declared coefficient field with `s² = |c|`, together with
/// the sign of `c`.  `c` must be rational.
fn absorb_square_root(
    c: &KNum,
    constants: &[AlgebraicConstant],
) -> Option<(KNum, BigRational)> {
    let q = c.as_rational()?;
    let sign = if q.is_negative() {
        BigRational::from_integer((-1).into())
    } else {
        BigRational::from_integer(1.into())
    };
    let a = q.abs();
    if let Some(s) = rational_sqrt(&a) {
        return Some((KNum::from_rational(s), sign));
    }
    for g in constants {
        let ratio = &a / g.square();
        if let Some(m) = rational_sqrt(&ratio) {
            let s = KNum::from_rational(m).mul(&KNum::from_constant(g));
            return Some((s, sign));
        }
    }
    None
}

/// Flips the sign of a covector so its leading coefficient is positive.
fn normalize_sign(w: &mut [DiffExpr]) {
    for comp in w.iter() {
        if comp.is_zero() {
            continue;
        }
        let leading = comp
            .numerator()
            .terms_desc()
            .next()
            .and_then(|(_, k)| k.terms().next().map(|(_, q)| q.clone()));
        if let Some(q) = leading {
            if q.is_negative() {
                for c in w.iter_mut() {
                    *c = c.neg();
                }
            }
        }
        return;
    }
}

/// Extracts `(c_α, f_α)` from the tails of a normal-form operator, requiring
/// every tail to have its right vector proportional to its left: the tail is
/// `f ⊗ D⁻¹ ∘ (c·f)`, i.e. `c · f ⊗ D⁻¹ ∘ f`.
pub(crate) fn symmetric_tail_data(
    op: &PDOperator,
) -> Result<Option<Vec<(KNum, Vec<DiffExpr>)>>, RingError> {
    let mut out = Vec::new();
    for t in op.tails() {
        let mut span = SpanReduce::new(t.left.len());
        span.insert(&t.left)?;
        match span.try_express(&t.right)? {
            Some(coeffs) => out.push((coeffs[0].clone(), t.left.clone())),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Resolves `D⁻¹` of a density against the universe, minting a fresh symbol
/// when no declared one matches.
pub(crate) fn omega_of(
    density: &DiffExpr,
    fields: usize,
    universe: &mut Vec<NonlocalSymbol>,
    introduced: &mut Vec<NonlocalSymbol>,
) -> Result<DiffExpr, VarError> {
    let r = resolve_dinv(density, fields, universe, ResolutionMode::Lax)?;
    if let Some(s) = r.introduced {
        universe.push(s.clone());
        introduced.push(s);
    }
    Ok(r.value)
}

/// Decides symplecticity of a weakly nonlocal skew operator by constructing
/// the potential covector and re-verifying `J = γ′ − (γ′)†` exactly.
pub fn wnl_symplectic_certificate(
    j: &PDOperator,
    densities: Option<&[DiffExpr]>,
    symbols: &[NonlocalSymbol],
    constants: &[AlgebraicConstant],
) -> Result<CertOutcome<SymplecticCertificate>, CertError> {
    let jn = j.normal_form()?;
    if !jn.series_profile()?.formally_skew {
        return Err(CertError::NotSkew);
    }
    let n = jn.fields();
    let raw = match symmetric_tail_data(&jn)? {
        Some(data) => data,
        None => {
            return Ok(CertOutcome::NotApplicable {
                reason: "a nonlocal tail is not of the rank-one symmetric form f ⊗ D⁻¹ ∘ c·f"
                    .into(),
            })
        }
    };
    let mut tail_data = Vec::new();
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let mut gamma_tail = vec![DiffExpr::zero(); n];
    for (index, (c, f)) in raw.into_iter().enumerate() {
        let (scale, sign) = match absorb_square_root(&c, constants) {
            Some(pair) => pair,
            None => {
                let shown = c
                    .as_rational()
                    .map(|q| q.to_string())
                    .unwrap_or_else(|| "an irrational constant".into());
                return Ok(CertOutcome::NotApplicable {
                    reason: format!(
                        "tail weight {shown} is not a signed square in the declared coefficient field"
                    ),
                })
            }
        };
        let mut w: Vec<DiffExpr> = f.iter().map(|e| e.scale_knum(&scale)).collect();
        normalize_sign(&mut w);
        if !helmholtz_is_variational(&w, n)? {
            return Ok(CertOutcome::NotApplicable {
                reason: "a tail vector is not a variational gradient".into(),
            });
        }
        let h = match densities {
            Some(hs) => {
                let h = hs.get(index).ok_or(CertError::LengthMismatch)?.clone();
                let grad = euler(&h, n)?;
                if grad.iter().zip(&w).any(|(a, b)| !a.sub(b).is_zero()) {
                    return Err(CertError::DensityMismatch { index });
                }
                h
            }
            None => reconstruct_density(&w, n)?,
        };
        let omega = omega_of(&h, n, &mut universe, &mut introduced)?;
        let half_eps = &sign / BigRational::from_integer(2.into());
        for (a, comp) in w.iter().enumerate() {
            gamma_tail[a] = gamma_tail[a].add(&comp.mul(&omega).scale_rational(&half_eps));
        }
        tail_data.push((sign, h));
    }
    let differential = jn.sub(&gradient_image(&gamma_tail, n)?)?.normal_form()?;
    if !differential.tails().is_empty() || !differential.omega_universe().is_empty() {
        return Ok(CertOutcome::Refuted {
            residual: differential,
        });
    }
    let hom = homotopy_potential(&differential)?;
    let gamma: Vec<DiffExpr> = hom
        .zeta
        .iter()
        .zip(&gamma_tail)
        .map(|(a, b)| a.add(b))
        .collect();
    let residual = jn.sub(&gradient_image(&gamma, n)?)?.normal_form()?;
    if residual.is_zero()? {
        Ok(CertOutcome::Certified(SymplecticCertificate {
            gamma0: hom.zeta,
            gamma,
            tail_data,
            introduced,
        }))
    } else {
        Ok(CertOutcome::Refuted { residual })
    }
}
