//! Compatibility and Hamiltonianity certificates built on the squared-structure
//! decomposition.
//!
//! Given a symplectic `J`, its differential left inverse `P`, and a candidate
//! second structure `P̃`, the chain runs: decompose `JP̃J` into the canonical
//! nonlocal form, assemble the potential `γ` with `JP̃J = γ′ − (γ′)†`, set
//! `τ = −P(γ)`, and verify `P̃ = L_τ(P)`.  A further pass assembles `γ̃` for
//! `(JP̃)²J` and verifies the second-order identity `L_τ(L_τ(P)) = L_τ̃(P)`
//! with `τ̃ = P̃(γ) − 2P(γ̃)`, which together certify that `P̃` is Hamiltonian
//! and compatible with `P`.

use super::{
    gradient_image, homotopy_potential, omega_of, symmetric_tail_data, CertError, CertOutcome,
};
use crate::geom::{lie_covector, lie_operator};
use crate::opalg::{expand_truncated, OpError, PDOperator, Tail};
use crate::ring::{DiffExpr, KNum, NonlocalSymbol};
use crate::varcalc::{
    euler, helmholtz_is_variational, reconstruct_density, ResolutionMode, VarError,
};
use num::BigRational;

/// Canonical decomposition of `JP̃J` with its potential covector.
#[derive(Debug, Clone)]
pub struct JpjData {
    /// `(ε_α, ψ_α, K_α)`: tail data of `J` and the densities with
    /// `δK_α/δu = J P̃ (δψ_α/δu)`.
    pub psi_data: Vec<(KNum, DiffExpr, DiffExpr)>,
    /// `(ε̃_ρ, H_ρ)`: tail data of `P̃` and the densities with
    /// `δH_ρ/δu = J(Y_ρ)`.
    pub h_data: Vec<(KNum, DiffExpr)>,
    /// The exact composition `J∘P̃∘J` in normal form.
    pub jpj: PDOperator,
    pub gamma0: Vec<DiffExpr>,
    /// Potential with `JP̃J = γ′ − (γ′)†`.
    pub gamma: Vec<DiffExpr>,
    pub introduced: Vec<NonlocalSymbol>,
}

/// Witness that `P̃ = L_τ(P)`, which makes the pair compatible.
#[derive(Debug, Clone)]
pub struct CompatibilityCertificate {
    pub decomposition: JpjData,
    /// `τ = −P(γ)`.
    pub tau: Vec<DiffExpr>,
    pub introduced: Vec<NonlocalSymbol>,
}

/// Witness of the second-order identity that upgrades compatibility to
/// Hamiltonianity of `P̃`.
#[derive(Debug, Clone)]
pub struct HamiltonianCertificate {
    /// `L_ρ` densities with `δL_ρ/δu = JP̃(δH_ρ/δu)`, aligned with `h_data`.
    pub l_data: Vec<(KNum, DiffExpr)>,
    /// `M_α` densities with `δM_α/δu = JP̃(δK_α/δu)`, aligned with `psi_data`.
    pub m_data: Vec<(KNum, DiffExpr)>,
    pub gamma_tilde: Vec<DiffExpr>,
    /// `τ̃ = P̃(γ) − 2P(γ̃)`.
    pub tau_tilde: Vec<DiffExpr>,
    pub introduced: Vec<NonlocalSymbol>,
}

macro_rules! require {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(reason) => return Ok(CertOutcome::NotApplicable { reason }),
        }
    };
}

fn strict_apply(
    op: &PDOperator,
    v: &[DiffExpr],
    universe: &[NonlocalSymbol],
    what: &str,
) -> Result<Result<Vec<DiffExpr>, String>, CertError> {
    match op.apply(v, universe, ResolutionMode::Strict) {
        Ok(a) => Ok(Ok(a.components)),
        Err(OpError::Var(VarError::Irreducible { .. })) => {
            Ok(Err(format!("{what} does not reduce to the declared nonlocal variables")))
        }
        Err(e) => Err(e.into()),
    }
}

fn strict_compose(
    a: &PDOperator,
    b: &PDOperator,
    universe: &[NonlocalSymbol],
    what: &str,
) -> Result<Result<PDOperator, String>, CertError> {
    match a.compose_with_symbols(b, universe) {
        Ok(c) => Ok(Ok(c)),
        Err(OpError::NotWeaklyNonlocal { .. }) => {
            Ok(Err(format!("{what} leaves the weakly nonlocal class")))
        }
        Err(e) => Err(e.into()),
    }
}

fn gradient_density(
    w: &[DiffExpr],
    fields: usize,
    what: &str,
) -> Result<Result<DiffExpr, String>, CertError> {
    if !w.iter().all(DiffExpr::is_omega_free) {
        return Ok(Err(format!("{what} is not local")));
    }
    if !helmholtz_is_variational(w, fields)? {
        return Ok(Err(format!("{what} is not a variational gradient")));
    }
    Ok(Ok(reconstruct_density(w, fields)?))
}

fn diff_part(op: &PDOperator) -> PDOperator {
    let mut out = PDOperator::new(op.fields(), op.rows(), op.cols(), op.variance());
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            for (&p, c) in op.diff_entry(i, j) {
                out.add_coeff(i, j, p, c);
            }
        }
    }
    out
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// Decomposes `J∘P̃∘J` into the canonical weakly nonlocal form and assembles
/// its potential covector.
pub fn jpj_decompose(
    j: &PDOperator,
    pt: &PDOperator,
    symbols: &[NonlocalSymbol],
) -> Result<CertOutcome<JpjData>, CertError> {
    let jn = j.normal_form()?;
    let pn = pt.normal_form()?;
    if !jn.series_profile()?.formally_skew || !pn.series_profile()?.formally_skew {
        return Err(CertError::NotSkew);
    }
    let n = jn.fields();
    let j_tails = require!(symmetric_tail_data(&jn)?.ok_or_else(|| {
        "a tail of the symplectic operator is not of the symmetric rank-one form".to_string()
    }));
    let p_tails = require!(symmetric_tail_data(&pn)?.ok_or_else(|| {
        "a tail of the second operator is not of the symmetric rank-one form".to_string()
    }));
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();

    let mut psi_data = Vec::new();
    for (eps, w) in &j_tails {
        let psi = require!(gradient_density(w, n, "a tail vector of the symplectic operator")?);
        let pv = require!(strict_apply(&pn, w, &universe, "the second operator applied to δψ")?);
        let jpv = require!(strict_apply(&jn, &pv, &universe, "J∘P̃ applied to δψ")?);
        let k = require!(gradient_density(&jpv, n, "JP̃(δψ)")?);
        psi_data.push((eps.clone(), psi, k));
    }
    let mut h_data = Vec::new();
    for (eps_t, y) in &p_tails {
        let g = require!(strict_apply(&jn, y, &universe, "J applied to a tail vector of P̃")?);
        let h = require!(gradient_density(&g, n, "J(Y)")?);
        h_data.push((eps_t.clone(), h));
    }

    let pj = require!(strict_compose(&pn, &jn, &universe, "the composition P̃∘J")?);
    let jpj = require!(strict_compose(&jn, &pj, &universe, "the composition J∘P̃∘J")?);

    let mut expected = diff_part(&jpj);
    for ((eps, _, k), (_, w)) in psi_data.iter().zip(&j_tails) {
        let dk = euler(k, n)?;
        let left_k: Vec<DiffExpr> = dk.iter().map(|e| e.scale_knum(eps)).collect();
        expected.add_tail(Tail::new(left_k, w.clone()));
        let left_w: Vec<DiffExpr> = w.iter().map(|e| e.scale_knum(eps)).collect();
        expected.add_tail(Tail::new(left_w, dk));
    }
    for (eps_t, h) in &h_data {
        let dh = euler(h, n)?;
        let left: Vec<DiffExpr> = dh.iter().map(|e| e.scale_knum(&eps_t.neg())).collect();
        expected.add_tail(Tail::new(left, dh));
    }
    if !jpj.equals(&expected)? {
        return Ok(CertOutcome::Refuted {
            residual: jpj.sub(&expected)?.normal_form()?,
        });
    }

    let mut gamma_tail = vec![DiffExpr::zero(); n];
    for ((eps, psi, k), (_, w)) in psi_data.iter().zip(&j_tails) {
        let om_psi = omega_of(psi, n, &mut universe, &mut introduced)?;
        let om_k = omega_of(k, n, &mut universe, &mut introduced)?;
        let dk = euler(k, n)?;
        let half_eps = eps.scale(&half());
        for a in 0..n {
            let term = dk[a].mul(&om_psi).add(&w[a].mul(&om_k));
            gamma_tail[a] = gamma_tail[a].add(&term.scale_knum(&half_eps));
        }
    }
    for (eps_t, h) in &h_data {
        let om_h = omega_of(h, n, &mut universe, &mut introduced)?;
        let dh = euler(h, n)?;
        let minus_half = eps_t.scale(&half()).neg();
        for a in 0..n {
            gamma_tail[a] = gamma_tail[a].add(&dh[a].mul(&om_h).scale_knum(&minus_half));
        }
    }

    let differential = jpj.sub(&gradient_image(&gamma_tail, n)?)?.normal_form()?;
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
    let residual = jpj.sub(&gradient_image(&gamma, n)?)?.normal_form()?;
    if !residual.is_zero()? {
        return Ok(CertOutcome::Refuted { residual });
    }
    Ok(CertOutcome::Certified(JpjData {
        psi_data,
        h_data,
        jpj,
        gamma0: hom.zeta,
        gamma,
        introduced,
    }))
}

/// Checks `A∘B = identity` as truncated series down to the given cutoff.
pub fn left_inverse_ok(a: &PDOperator, b: &PDOperator, cutoff: u32) -> Result<bool, CertError> {
    let min = -(cutoff as i64);
    let sa = expand_truncated(&a.normal_form()?, min);
    let sb = expand_truncated(&b.normal_form()?, min);
    let prod = sa.compose(&sb);
    if prod.min_power() > 0 {
        return Ok(false);
    }
    let mut saw_identity = false;
    for pw in prod.powers().collect::<Vec<_>>() {
        if pw < prod.min_power() {
            continue;
        }
        let m = prod.coeff(pw);
        for (i, row) in m.iter().enumerate() {
            for (jj, e) in row.iter().enumerate() {
                let expect_one = pw == 0 && i == jj;
                if expect_one {
                    if !e.is_one() {
                        return Ok(false);
                    }
                    saw_identity = true;
                } else if !e.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(saw_identity)
}

/// Runs the full compatibility chain and certifies `P̃ = L_τ(P)`.
pub fn compatibility_certificate(
    p: &PDOperator,
    pt: &PDOperator,
    j: &PDOperator,
    symbols: &[NonlocalSymbol],
    cutoff: u32,
) -> Result<CertOutcome<CompatibilityCertificate>, CertError> {
    if !left_inverse_ok(j, p, cutoff)? {
        return Err(CertError::InverseCheckFailed);
    }
    let jd = match jpj_decompose(j, pt, symbols)? {
        CertOutcome::Certified(d) => d,
        CertOutcome::Refuted { residual } => return Ok(CertOutcome::Refuted { residual }),
        CertOutcome::NotApplicable { reason } => {
            return Ok(CertOutcome::NotApplicable { reason })
        }
    };
    let n = j.fields();
    let mut universe = symbols.to_vec();
    for s in &jd.introduced {
        if !universe.contains(s) {
            universe.push(s.clone());
        }
    }
    let mut introduced = jd.introduced.clone();

    let pn = p.normal_form()?;
    if !pn.tails().is_empty() {
        let mut basis: Vec<(String, DiffExpr)> = Vec::new();
        for (i, (_, psi, k)) in jd.psi_data.iter().enumerate() {
            basis.push((format!("ψ_{}", i + 1), psi.clone()));
            basis.push((format!("K_{}", i + 1), k.clone()));
        }
        for (i, (_, h)) in jd.h_data.iter().enumerate() {
            basis.push((format!("H_{}", i + 1), h.clone()));
        }
        for t in pn.tails() {
            for side in [&t.left, &t.right] {
                for (label, dens) in &basis {
                    let grad = euler(dens, n)?;
                    let lc = match lie_covector(&grad, side, n, &universe, ResolutionMode::Strict)
                    {
                        Ok(d) => d,
                        Err(OpError::Var(VarError::Irreducible { .. })) => {
                            return Ok(CertOutcome::NotApplicable {
                                reason: format!(
                                    "locality condition for {label} leaves the declared nonlocal variables"
                                ),
                            })
                        }
                        Err(e) => return Err(e.into()),
                    };
                    if lc.value.iter().any(|e| !e.is_zero()) {
                        return Ok(CertOutcome::NotApplicable {
                            reason: format!(
                                "locality condition fails: the gradient of {label} moves along a tail vector of the first operator"
                            ),
                        });
                    }
                }
            }
        }
    }

    let tau_raw = require!(strict_apply(&pn, &jd.gamma, &universe, "P applied to the potential")?);
    let tau: Vec<DiffExpr> = tau_raw.iter().map(DiffExpr::neg).collect();

    let lt = lie_operator(&pn, &tau, &universe, ResolutionMode::Strict)?;
    for s in &lt.introduced {
        if !universe.contains(s) {
            universe.push(s.clone());
            introduced.push(s.clone());
        }
    }
    let residual = pt.normal_form()?.sub(&lt.value)?.normal_form()?;
    if residual.is_zero()? {
        Ok(CertOutcome::Certified(CompatibilityCertificate {
            decomposition: jd,
            tau,
            introduced,
        }))
    } else {
        Ok(CertOutcome::Refuted { residual })
    }
}

/// Extends a compatibility certificate with the second-order identity,
/// certifying that `P̃` is Hamiltonian and compatible with `P`.
pub fn hamiltonian_pair_certificate(
    p: &PDOperator,
    pt: &PDOperator,
    j: &PDOperator,
    compat: &CompatibilityCertificate,
    symbols: &[NonlocalSymbol],
) -> Result<CertOutcome<HamiltonianCertificate>, CertError> {
    let jn = j.normal_form()?;
    let pn = p.normal_form()?;
    let ptn = pt.normal_form()?;
    let n = jn.fields();
    let jd = &compat.decomposition;
    let mut universe = symbols.to_vec();
    for s in &compat.introduced {
        if !universe.contains(s) {
            universe.push(s.clone());
        }
    }
    let mut introduced = Vec::new();

    let mut l_data = Vec::new();
    for (eps_t, h) in &jd.h_data {
        let dh = euler(h, n)?;
        let v1 = require!(strict_apply(&ptn, &dh, &universe, "P̃ applied to δH")?);
        let v2 = require!(strict_apply(&jn, &v1, &universe, "J∘P̃ applied to δH")?);
        let l = require!(gradient_density(&v2, n, "JP̃(δH)")?);
        l_data.push((eps_t.clone(), l));
    }
    let mut m_data = Vec::new();
    for (eps, _, k) in &jd.psi_data {
        let dk = euler(k, n)?;
        let v1 = require!(strict_apply(&ptn, &dk, &universe, "P̃ applied to δK")?);
        let v2 = require!(strict_apply(&jn, &v1, &universe, "J∘P̃ applied to δK")?);
        let m = require!(gradient_density(&v2, n, "JP̃(δK)")?);
        m_data.push((eps.clone(), m));
    }

    let mut gamma_tail = vec![DiffExpr::zero(); n];
    for ((eps_t, h), (_, l)) in jd.h_data.iter().zip(&l_data) {
        let om_h = omega_of(h, n, &mut universe, &mut introduced)?;
        let om_l = omega_of(l, n, &mut universe, &mut introduced)?;
        let dh = euler(h, n)?;
        let dl = euler(l, n)?;
        let minus_half = eps_t.scale(&half()).neg();
        for a in 0..n {
            let term = dl[a].mul(&om_h).add(&dh[a].mul(&om_l));
            gamma_tail[a] = gamma_tail[a].add(&term.scale_knum(&minus_half));
        }
    }
    for ((eps, psi, k), (_, m)) in jd.psi_data.iter().zip(&m_data) {
        let om_psi = omega_of(psi, n, &mut universe, &mut introduced)?;
        let om_k = omega_of(k, n, &mut universe, &mut introduced)?;
        let om_m = omega_of(m, n, &mut universe, &mut introduced)?;
        let dpsi = euler(psi, n)?;
        let dk = euler(k, n)?;
        let dm = euler(m, n)?;
        let half_eps = eps.scale(&half());
        for a in 0..n {
            let term = dm[a]
                .mul(&om_psi)
                .add(&dk[a].mul(&om_k))
                .add(&dpsi[a].mul(&om_m));
            gamma_tail[a] = gamma_tail[a].add(&term.scale_knum(&half_eps));
        }
    }

    let jp = require!(strict_compose(&jn, &ptn, &universe, "the composition J∘P̃")?);
    let jp2 = require!(strict_compose(&jp, &jp, &universe, "the composition (J∘P̃)²")?);
    let jpjpj = require!(strict_compose(&jp2, &jn, &universe, "the composition (JP̃)²J")?);

    let differential = jpjpj.sub(&gradient_image(&gamma_tail, n)?)?.normal_form()?;
    if !differential.tails().is_empty() || !differential.omega_universe().is_empty() {
        return Ok(CertOutcome::Refuted {
            residual: differential,
        });
    }
    let hom = homotopy_potential(&differential)?;
    let gamma_tilde: Vec<DiffExpr> = hom
        .zeta
        .iter()
        .zip(&gamma_tail)
        .map(|(a, b)| a.add(b))
        .collect();
    let residual = jpjpj
        .sub(&gradient_image(&gamma_tilde, n)?)?
        .normal_form()?;
    if !residual.is_zero()? {
        return Ok(CertOutcome::Refuted { residual });
    }

    let pg = require!(strict_apply(&ptn, &jd.gamma, &universe, "P̃ applied to the potential")?);
    let pgt = require!(strict_apply(&pn, &gamma_tilde, &universe, "P applied to γ̃")?);
    let two = BigRational::from_integer(2.into());
    let tau_tilde: Vec<DiffExpr> = pg
        .iter()
        .zip(&pgt)
        .map(|(a, b)| a.sub(&b.scale_rational(&two)))
        .collect();

    let l1 = lie_operator(&pn, &compat.tau, &universe, ResolutionMode::Strict)?;
    for s in &l1.introduced {
        if !universe.contains(s) {
            universe.push(s.clone());
        }
    }
    let l2 = lie_operator(&l1.value, &compat.tau, &universe, ResolutionMode::Strict)?;
    for s in &l2.introduced {
        if !universe.contains(s) {
            universe.push(s.clone());
        }
    }
    let lt2 = lie_operator(&pn, &tau_tilde, &universe, ResolutionMode::Strict)?;
    let second = l2.value.sub(&lt2.value)?.normal_form()?;
    if !second.is_zero()? {
        return Ok(CertOutcome::Refuted { residual: second });
    }
    Ok(CertOutcome::Certified(HamiltonianCertificate {
        l_data,
        m_data,
        gamma_tilde,
        tau_tilde,
        introduced,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::Variance;
    use crate::ring::AlgebraicConstant;

    fn u(order: u32) -> DiffExpr {
        DiffExpr::jet(0, order)
    }

    fn v(order: u32) -> DiffExpr {
        DiffExpr::jet(1, order)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn kdv_ptilde() -> PDOperator {
        let mut p = PDOperator::new(1, 1, 1, Variance::hamiltonian());
        p.add_coeff(0, 0, 3, &DiffExpr::one());
        p.add_coeff(0, 0, 1, &u(0).scale_rational(&q(2, 1)));
        p.add_coeff(0, 0, 0, &u(1));
        p
    }

    fn kdv_j() -> PDOperator {
        let mut j = PDOperator::new(1, 1, 1, Variance::symplectic());
        j.add_tail(Tail::new(vec![DiffExpr::one()], vec![DiffExpr::one()]));
        j
    }

    fn d_op() -> PDOperator {
        PDOperator::diagonal_d(1, 1, 1, Variance::hamiltonian())
    }

    #[test]
    fn left_inverse_recognized_and_rejected() {
        assert!(left_inverse_ok(&kdv_j(), &d_op(), 8).unwrap());
        let d3 = PDOperator::diagonal_d(1, 1, 3, Variance::hamiltonian());
        assert!(!left_inverse_ok(&kdv_j(), &d3, 8).unwrap());
    }

    #[test]
    fn third_order_jpj_decomposition() {
        let jd = match jpj_decompose(&kdv_j(), &kdv_ptilde(), &[]).unwrap() {
            CertOutcome::Certified(d) => d,
            other => panic!("expected certification, got {other:?}"),
        };
        assert_eq!(jd.h_data.len(), 0);
        assert_eq!(jd.psi_data.len(), 1);
        assert!(jd.psi_data[0].0.is_one());
        assert!(jd.psi_data[0].1.sub(&u(0)).is_zero());
        let k = u(0).pow(2).scale_rational(&q(1, 2));
        assert!(jd.psi_data[0].2.sub(&k).is_zero());

        let mut expected = PDOperator::new(1, 1, 1, Variance::symplectic());
        expected.add_coeff(0, 0, 1, &DiffExpr::one());
        expected.add_tail(Tail::new(vec![u(0)], vec![DiffExpr::one()]));
        expected.add_tail(Tail::new(vec![DiffExpr::one()], vec![u(0)]));
        assert!(jd.jpj.equals(&expected).unwrap());

        assert!(jd.gamma0[0].sub(&u(1).scale_rational(&q(1, 2))).is_zero());
        assert_eq!(jd.introduced.len(), 2);
        assert!(jd.introduced[0].density().sub(&u(0)).is_zero());
        assert!(jd.introduced[1].density().sub(&k).is_zero());
        let om1 = DiffExpr::omega(&jd.introduced[0]);
        let om2 = DiffExpr::omega(&jd.introduced[1]);
        let gamma = u(1)
            .scale_rational(&q(1, 2))
            .add(&u(0).mul(&om1).scale_rational(&q(1, 2)))
            .add(&om2.scale_rational(&q(1, 2)));
        assert!(jd.gamma[0].sub(&gamma).is_zero());
    }

    #[test]
    fn degenerate_image_refutes_decomposition() {
        // P̃ = D sends the tail gradient of J = D⁻¹ to zero, so JP̃J = D⁻¹
        // cannot match its two-sided tail decomposition.
        match jpj_decompose(&kdv_j(), &d_op(), &[]).unwrap() {
            CertOutcome::Refuted { residual } => {
                assert_eq!(residual.tails().len(), 1);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn first_order_candidate_is_not_hamiltonian() {
        // P̃ = u₁·D + u₂/2 is skew but JP̃(δψ) is not a gradient.
        let mut pt = PDOperator::new(1, 1, 1, Variance::hamiltonian());
        pt.add_coeff(0, 0, 1, &u(1));
        pt.add_coeff(0, 0, 0, &u(2).scale_rational(&q(1, 2)));
        match jpj_decompose(&kdv_j(), &pt, &[]).unwrap() {
            CertOutcome::NotApplicable { reason } => {
                assert!(reason.contains("variational gradient"), "reason: {reason}")
            }
            other => panic!("expected not-applicable, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_inverse_is_an_error() {
        let d3 = PDOperator::diagonal_d(1, 1, 3, Variance::hamiltonian());
        assert!(matches!(
            compatibility_certificate(&d3, &kdv_ptilde(), &kdv_j(), &[], 8),
            Err(CertError::InverseCheckFailed)
        ));
    }

    #[test]
    fn third_order_compatibility() {
        let cc = match compatibility_certificate(&d_op(), &kdv_ptilde(), &kdv_j(), &[], 8).unwrap()
        {
            CertOutcome::Certified(c) => c,
            other => panic!("expected certification, got {other:?}"),
        };
        let om1 = DiffExpr::omega(&cc.decomposition.introduced[0]);
        let tau = u(2)
            .scale_rational(&q(-1, 2))
            .add(&u(0).pow(2).scale_rational(&q(-3, 4)))
            .add(&u(1).mul(&om1).scale_rational(&q(-1, 2)));
        assert!(cc.tau[0].sub(&tau).is_zero());
    }


       #[test]
    fn third_order_hamiltonian_pair() {
        let p = d_op();
        let pt = kdv_ptilde();
        let j = kdv_j();
        let cc = match compatibility_certificate(&p, &pt, &j, &[], 8).unwrap() {
            CertOutcome::Certified(c) => c,
            other => panic!("expected certification, got {other:?}"),
        };
        let hc = match hamiltonian_pair_certificate(&p, &pt, &j, &cc, &[]).unwrap() {
            CertOutcome::Certified(c) => c,
            other => panic!("expected certification, got {other:?}"),
        };
        assert!(hc.l_data.is_empty());
        assert_eq!(hc.m_data.len(), 1);
        assert!(hc.m_data[0].0.is_one());
        let m = u(0)
            .mul(&u(2))
            .scale_rational(&q(1, 2))
            .add(&u(0).pow(3).scale_rational(&q(1, 2)));
        assert!(hc.m_data[0].1.sub(&m).is_zero());
        assert_eq!(hc.introduced.len(), 1);
        assert!(hc.introduced[0].density().sub(&m).is_zero());

        let om1 = DiffExpr::omega(&cc.decomposition.introduced[0]);
        let om2 = DiffExpr::omega(&cc.decomposition.introduced[1]);
        let om3 = DiffExpr::omega(&hc.introduced[0]);
        let gamma_tilde = u(3)
            .scale_rational(&q(1, 2))
            .add(&u(0).mul(&u(1)).scale_rational(&q(9, 4)))
            .add(
                &u(2)
                    .add(&u(0).pow(2).scale_rational(&q(3, 2)))
                    .mul(&om1)
                    .scale_rational(&q(1, 2)),
            )
            .add(&u(0).mul(&om2).scale_rational(&q(1, 2)))
            .add(&om3.scale_rational(&q(1, 2)));
        assert!(hc.gamma_tilde[0].sub(&gamma_tilde).is_zero());

        let tau_tilde = u(4)
            .scale_rational(&q(-1, 2))
            .add(&u(0).mul(&u(2)).scale_rational(&q(-5, 2)))
            .add(&u(1).pow(2).scale_rational(&q(-2, 1)))
            .add(&u(0).pow(3).neg())
            .add(
                &u(3)
                    .scale_rational(&q(1, 2))
                    .add(&u(0).mul(&u(1)).scale_rational(&q(3, 2)))
                    .mul(&om1)
                    .neg(),
            )
            .add(&u(1).mul(&om2).scale_rational(&q(-1, 2)));
        assert!(hc.tau_tilde[0].sub(&tau_tilde).is_zero());
    }

    #[test]
    fn two_component_pipeline() {
        let sq2 = AlgebraicConstant::new("sq2", q(2, 1)).unwrap();
        let s = DiffExpr::constant(&sq2);
        let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
        j.add_coeff(0, 1, 0, &DiffExpr::one());
        j.add_coeff(1, 0, 0, &DiffExpr::one().neg());
        let mut p = PDOperator::new(2, 2, 2, Variance::hamiltonian());
        p.add_coeff(0, 1, 0, &DiffExpr::one().neg());
        p.add_coeff(1, 0, 0, &DiffExpr::one());
        let y = vec![s.mul(&v(0)).neg(), s.mul(&u(0))];
        let mut pt = PDOperator::diagonal_d(2, 2, 1, Variance::hamiltonian());
        pt.add_tail(Tail::new(y.clone(), y));

        let jd = match jpj_decompose(&j, &pt, &[]).unwrap() {
            CertOutcome::Certified(d) => d,
            other => panic!("expected certification, got {other:?}"),
        };
        assert!(jd.psi_data.is_empty());
        assert_eq!(jd.h_data.len(), 1);
        assert!(jd.h_data[0].0.is_one());
        let h = s
            .mul(&u(0).pow(2).add(&v(0).pow(2)))
            .scale_rational(&q(1, 2));
        assert!(jd.h_data[0].1.sub(&h).is_zero());

        let dh = vec![s.mul(&u(0)), s.mul(&v(0))];
        let mut expected = PDOperator::new(2, 2, 2, Variance::symplectic());
        expected.add_coeff(0, 0, 1, &DiffExpr::one().neg());
        expected.add_coeff(1, 1, 1, &DiffExpr::one().neg());
        expected.add_tail(Tail::new(
            vec![dh[0].neg(), dh[1].neg()],
            dh.clone(),
        ));
        assert!(jd.jpj.equals(&expected).unwrap());
        assert!(jd.gamma0[0].sub(&u(1).scale_rational(&q(-1, 2))).is_zero());
        assert!(jd.gamma0[1].sub(&v(1).scale_rational(&q(-1, 2))).is_zero());

        let cc = match compatibility_certificate(&p, &pt, &j, &[], 8).unwrap() {
            CertOutcome::Certified(c) => c,
            other => panic!("expected certification, got {other:?}"),
        };
        let om = DiffExpr::omega(&cc.decomposition.introduced[0]);
        let tau0 = v(1)
            .scale_rational(&q(-1, 2))
            .add(&s.mul(&v(0)).mul(&om).scale_rational(&q(-1, 2)));
        let tau1 = u(1)
            .scale_rational(&q(1, 2))
            .add(&s.mul(&u(0)).mul(&om).scale_rational(&q(1, 2)));
        assert!(cc.tau[0].sub(&tau0).is_zero());
        assert!(cc.tau[1].sub(&tau1).is_zero());

        let hc = match hamiltonian_pair_certificate(&p, &pt, &j, &cc, &[]).unwrap() {
            CertOutcome::Certified(c) => c,
            other => panic!("expected certification, got {other:?}"),
        };
        assert!(hc.m_data.is_empty());
        assert_eq!(hc.l_data.len(), 1);
        let l = s
            .mul(&u(0).mul(&v(1)).sub(&v(0).mul(&u(1))))
            .scale_rational(&q(1, 2));
        assert!(hc.l_data[0].1.sub(&l).is_zero());
    }
}
