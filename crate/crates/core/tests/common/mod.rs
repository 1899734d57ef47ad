//! Shared generators, property bodies, and fixture operators for the
//! randomized suites and the acceptance battery.

#![allow(dead_code)]

use num::BigRational;
use proptest::prelude::*;
use wnhcalc_core::geom::symplectic_trilinear;
use wnhcalc_core::opalg::{
    expand_truncated, invert_truncated, PDOperator, Space, Tail, TruncatedSeries, Variance,
};
use wnhcalc_core::ring::{AlgebraicConstant, DiffExpr, NonlocalSymbol};
use wnhcalc_core::varcalc::{
    euler, frechet, helmholtz_is_variational, reconstruct_density, ClassZero, ResolutionMode,
};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn jet(field: u16, order: u32) -> DiffExpr {
    DiffExpr::jet(field, order)
}

/// Small nonzero rational.
pub fn rational() -> impl Strategy<Value = BigRational> {
    ((-4i32..=4).prop_filter("nonzero", |n| *n != 0), 1i32..=3)
        .prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn monomial(
    fields: u16,
    max_order: u32,
    max_exp: u32,
    with_x: bool,
) -> impl Strategy<Value = DiffExpr> {
    let factor =
        (0..fields, 0..=max_order, 1..=max_exp).prop_map(|(f, k, e)| DiffExpr::jet(f, k).pow(e));
    let x_exp = if with_x { 0..=1u32 } else { 0..=0u32 };
    (prop::collection::vec(factor, 0..=2), x_exp).prop_map(|(factors, xe)| {
        let mut m = DiffExpr::x().pow(xe);
        for f in factors {
            m = m.mul(&f);
        }
        m
    })
}

/// Random differential polynomial with bounded order, factor exponents,
/// and term count.
pub fn scalar_sized(
    fields: u16,
    max_order: u32,
    max_exp: u32,
    max_terms: usize,
    with_x: bool,
) -> impl Strategy<Value = DiffExpr> {
    prop::collection::vec(
        (rational(), monomial(fields, max_order, max_exp, with_x)),
        1..=max_terms,
    )
    .prop_map(|terms| {
        let mut e = DiffExpr::zero();
        for (q, m) in terms {
            e = e.add(&m.scale_rational(&q));
        }
        e
    })
}

/// Random differential polynomial with up to three small rational terms.
pub fn scalar(fields: u16, max_order: u32, with_x: bool) -> impl Strategy<Value = DiffExpr> {
    scalar_sized(fields, max_order, 2, 3, with_x)
}

/// Component vector sized to the field count.
pub fn components(fields: u16, max_order: u32) -> impl Strategy<Value = Vec<DiffExpr>> {
    prop::collection::vec(scalar(fields, max_order, false), fields as usize)
}

/// Slim component vector: linear-in-monomial terms for the cubic checks.
pub fn slim_components(fields: u16, max_order: u32) -> impl Strategy<Value = Vec<DiffExpr>> {
    prop::collection::vec(scalar_sized(fields, max_order, 1, 2, false), fields as usize)
}

/// Random purely differential square operator of order at most two.
pub fn local_op(fields: u16, variance: Variance) -> impl Strategy<Value = PDOperator> {
    let entry = prop::collection::vec((0..=2u32, scalar(fields, 1, false)), 0..=2);
    prop::collection::vec(entry, (fields as usize).pow(2)).prop_map(move |entries| {
        let n = fields as usize;
        let mut op = PDOperator::new(n, n, n, variance);
        for (idx, terms) in entries.into_iter().enumerate() {
            for (p, c) in terms {
                op.add_coeff(idx / n, idx % n, p, &c);
            }
        }
        op
    })
}

/// Random weakly nonlocal operator: differential part plus up to one tail.
pub fn wnl_op(fields: u16, variance: Variance) -> impl Strategy<Value = PDOperator> {
    (
        local_op(fields, variance),
        prop::collection::vec((components(fields, 1), components(fields, 1)), 0..=1),
    )
        .prop_map(|(mut op, tails)| {
            for (l, r) in tails {
                op.add_tail(Tail::new(l, r));
            }
            op
        })
}

pub fn d_is_a_derivation(f: &DiffExpr, g: &DiffExpr) -> Result<(), TestCaseError> {
    let lhs = f.mul(g).total_derivative();
    let rhs = f.total_derivative().mul(g).add(&f.mul(&g.total_derivative()));
    prop_assert!(lhs.sub(&rhs).is_zero(), "Leibniz rule failed");
    Ok(())
}

pub fn euler_kills_total_derivatives(f: &DiffExpr, fields: usize) -> Result<(), TestCaseError> {
    let grad = euler(&f.total_derivative(), fields).unwrap();
    for c in &grad {
        prop_assert!(c.is_zero(), "variational derivative of an exact density");
    }
    Ok(())
}

pub fn helmholtz_roundtrip(f: &DiffExpr, fields: usize) -> Result<(), TestCaseError> {
    let w = euler(f, fields).unwrap();
    prop_assert!(
        helmholtz_is_variational(&w, fields).unwrap(),
        "a gradient failed the symmetry test"
    );
    let h = reconstruct_density(&w, fields).unwrap();
    let back = euler(&h, fields).unwrap();
    for (a, b) in back.iter().zip(&w) {
        prop_assert!(a.sub(b).is_zero(), "reconstructed density has a different gradient");
    }
    Ok(())
}

pub fn adjoint_is_an_involution(op: &PDOperator) -> Result<(), TestCaseError> {
    prop_assert!(op.adjoint().adjoint().equals(op).unwrap(), "double adjoint moved the operator");
    Ok(())
}

pub fn adjoint_reverses_composition(
    a: &PDOperator,
    b: &PDOperator,
) -> Result<(), TestCaseError> {
    let lhs = a.compose(b).unwrap().adjoint();
    let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
    prop_assert!(lhs.equals(&rhs).unwrap(), "(A∘B)† differs from B†∘A†");
    Ok(())
}

pub fn composition_is_associative(
    a: &PDOperator,
    b: &PDOperator,
    c: &PDOperator,
) -> Result<(), TestCaseError> {
    let lhs = a.compose(b).unwrap().compose(c).unwrap();
    let rhs = a.compose(&b.compose(c).unwrap()).unwrap();
    prop_assert!(lhs.equals(&rhs).unwrap(), "composition is not associative");
    Ok(())
}

/// Truncated expansion of a composition against the composition of
/// expansions, compared over the reliable common window.
pub fn expansion_commutes_with_composition(
    a: &PDOperator,
    b: &PDOperator,
) -> Result<(), TestCaseError> {
    let window = -8i64;
    let deep = window - 4;
    let c = a.compose(b).unwrap();
    let lhs = expand_truncated(&c, window);
    let rhs = expand_truncated(a, deep).compose(&expand_truncated(b, deep));
    prop_assert!(rhs.min_power() <= window, "composed series window too shallow");
    let diff = lhs.sub(&rhs);
    prop_assert!(diff.is_zero_from(window), "expansion and composition disagree");
    Ok(())
}

/// op∘op⁻¹ agrees with the identity down to `window`.
pub fn inverse_series_reproduces_identity(
    op: &PDOperator,
    window: i64,
) -> Result<(), TestCaseError> {
    let top = op.max_order().unwrap_or(0) as i64;
    let deep = window - top;
    let inv = invert_truncated(op, deep).unwrap();
    let prod = expand_truncated(op, deep).compose(&inv);
    prop_assert!(prod.min_power() <= window, "product window too shallow");
    let diff = prod.sub(&TruncatedSeries::identity(op.rows(), window));
    prop_assert!(diff.is_zero_from(window), "inverse fails to reproduce the identity");
    Ok(())
}

/// The closedness form vanishes on operators built as γ′ − (γ′)†.
pub fn trilinear_vanishes_on_gradient_images(
    gamma: &[DiffExpr],
    xs: [&[DiffExpr]; 3],
    fields: usize,
) -> Result<(), TestCaseError> {
    let gop = frechet(gamma, Space::Covector, fields).unwrap();
    let j = gop.sub(&gop.adjoint()).unwrap();
    let t = symplectic_trilinear(&j, xs, &[], ResolutionMode::Strict).unwrap();
    prop_assert!(
        matches!(t.value.is_zero(&[]).unwrap(), ClassZero::Zero),
        "closedness form did not vanish"
    );
    Ok(())
}

pub fn kdv_p() -> PDOperator {
    PDOperator::diagonal_d(1, 1, 1, Variance::hamiltonian())
}

pub fn kdv_ptilde() -> PDOperator {
    let mut p = PDOperator::new(1, 1, 1, Variance::hamiltonian());
    p.add_coeff(0, 0, 3, &DiffExpr::one());
    p.add_coeff(0, 0, 1, &jet(0, 0).scale_rational(&rat(2, 1)));
    p.add_coeff(0, 0, 0, &jet(0, 1));
    p
}

/// Inverse of the first structure: D⁻¹ as a pure tail.
pub fn kdv_jinv() -> PDOperator {
    let mut j = PDOperator::new(1, 1, 1, Variance::symplectic());
    j.add_tail(Tail::new(vec![DiffExpr::one()], vec![DiffExpr::one()]));
    j
}

pub fn sqrt2() -> AlgebraicConstant {
    AlgebraicConstant::new("sq2", rat(2, 1)).unwrap()
}

/// Constant skew first structure of the two-component flow.
pub fn nls_p() -> PDOperator {
    let mut p = PDOperator::new(2, 2, 2, Variance::hamiltonian());
    p.add_coeff(0, 1, 0, &DiffExpr::one().neg());
    p.add_coeff(1, 0, 0, &DiffExpr::one());
    p
}

/// Weakly nonlocal second structure of the two-component flow.
pub fn nls_ptilde() -> PDOperator {
    let s = DiffExpr::constant(&sqrt2());
    let mut p = PDOperator::new(2, 2, 2, Variance::hamiltonian());
    p.add_coeff(0, 0, 1, &DiffExpr::one());
    p.add_coeff(1, 1, 1, &DiffExpr::one());
    let t = vec![jet(1, 0).mul(&s).neg(), jet(0, 0).mul(&s)];
    p.add_tail(Tail::new(t.clone(), t));
    p
}

/// Constant symplectic left inverse of the first structure.
pub fn nls_j() -> PDOperator {
    let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
    j.add_coeff(0, 1, 0, &DiffExpr::one());
    j.add_coeff(1, 0, 0, &DiffExpr::one().neg());
    j
}

/// Third-order structure D³ + 2uD + u₁ used by the inversion checks.
pub fn third_order_op() -> PDOperator {
    kdv_ptilde().with_variance(Variance::recursion())
}

/// First-order structure uD + u₁/2 used by the inversion checks.
pub fn first_order_op() -> PDOperator {
    let mut p = PDOperator::new(1, 1, 1, Variance::recursion());
    p.add_coeff(0, 0, 1, &jet(0, 0));
    p.add_coeff(0, 0, 0, &jet(0, 1).scale_rational(&rat(1, 2)));
    p
}

/// Attaches a nonlocal symbol `w` with density `u` for kernel-field checks.
pub fn omega_u() -> (NonlocalSymbol, DiffExpr) {
    let w = NonlocalSymbol::new("w", jet(0, 0));
    let om = DiffExpr::omega(&w);
    (w, om)
}
