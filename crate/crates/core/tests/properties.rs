//! Randomized laws of the core calculus: derivation and variational
//! identities, adjoint and composition algebra, series expansion, and the
//! closedness form on gradient images.

mod common;

use common::*;
use proptest::prelude::*;
use wnhcalc_core::opalg::Variance;

fn any_wnl() -> impl Strategy<Value = wnhcalc_core::opalg::PDOperator> {
    (1u16..=2).prop_flat_map(|n| wnl_op(n, Variance::recursion()))
}

fn gradient_image_inputs(
) -> impl Strategy<Value = (u16, Vec<wnhcalc_core::ring::DiffExpr>, [Vec<wnhcalc_core::ring::DiffExpr>; 3])>
{
    (1u16..=2).prop_flat_map(|n| {
        (
            components(n, 2),
            components(n, 1),
            components(n, 1),
            components(n, 1),
        )
            .prop_map(move |(g, x1, x2, x3)| (n, g, [x1, x2, x3]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn total_derivative_obeys_the_leibniz_rule(
        f in scalar(2, 2, true),
        g in scalar(2, 2, true),
    ) {
        d_is_a_derivation(&f, &g)?;
    }

    #[test]
    fn variational_derivative_annihilates_exact_densities(
        f in (1u16..=2).prop_flat_map(|n| scalar(n, 2, true).prop_map(move |f| (n, f))),
    ) {
        euler_kills_total_derivatives(&f.1, f.0 as usize)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn gradients_pass_the_symmetry_test_and_reconstruct(
        f in (1u16..=2).prop_flat_map(|n| scalar(n, 2, false).prop_map(move |f| (n, f))),
    ) {
        helmholtz_roundtrip(&f.1, f.0 as usize)?;
    }

    #[test]
    fn double_adjoint_is_the_identity(op in any_wnl()) {
        adjoint_is_an_involution(&op)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn adjoint_reverses_products(
        a in local_op(2, Variance::recursion()),
        b in local_op(2, Variance::recursion()),
    ) {
        adjoint_reverses_composition(&a, &b)?;
    }

    #[test]
    fn composition_associates(
        a in local_op(2, Variance::recursion()),
        b in local_op(2, Variance::recursion()),
        c in local_op(2, Variance::recursion()),
    ) {
        composition_is_associative(&a, &b, &c)?;
    }

    #[test]
    fn series_expansion_commutes_with_composition(
        a in local_op(1, Variance::recursion()),
        b in wnl_op(1, Variance::recursion()),
    ) {
        expansion_commutes_with_composition(&a, &b)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closedness_form_vanishes_on_gradient_images(
        inputs in gradient_image_inputs(),
    ) {
        let (n, gamma, xs) = inputs;
        let refs = [xs[0].as_slice(), xs[1].as_slice(), xs[2].as_slice()];
        trilinear_vanishes_on_gradient_images(&gamma, refs, n as usize)?;
    }
}

#[test]
fn third_order_operator_inverts_to_the_cutoff() {
    inverse_series_reproduces_identity(&third_order_op(), -8).unwrap();
}

#[test]
fn first_order_operator_inverts_to_the_cutoff() {
    inverse_series_reproduces_identity(&first_order_op(), -8).unwrap();
}
