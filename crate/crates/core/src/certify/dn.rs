//! Hydrodynamic-type structures and zero-order symplectic operators.
//!
//! A first-order homogeneous operator `g^{ij}D + b^{ij}_k u^k_1` with
//! nondegenerate symmetric `g` is Hamiltonian exactly when `b` encodes the
//! Levi-Civita connection of the contravariant metric `g` and the metric is
//! flat.  `dn_validate` computes the connection and the Riemann curvature
//! from `g` alone and reports every nonzero component; `dn_canonical` tests
//! a proposed change of coordinates for bringing `g` to a constant diagonal
//! `±1` form.  `zero_order_check` handles the complementary classification:
//! a matrix of multiplication operators is symplectic only if its entries
//! depend on `x`, the fields, and first-order jets alone, affinely in the
//! latter, and the closedness test is then delegated to the general
//! certificate.

use super::{wnl_symplectic_certificate, CertError, CertOutcome, SymplecticCertificate};
use crate::linalg::{matrix_det, matrix_inverse};
use crate::opalg::{PDOperator, Variance};
use crate::ring::{AlgebraicConstant, DiffExpr, NonlocalSymbol, Var};
use num::BigRational;

/// Levi-Civita data of a contravariant hydrodynamic metric.
#[derive(Debug, Clone)]
pub struct DnData {
    /// The given contravariant metric `g^{ij}`.
    pub metric: Vec<Vec<DiffExpr>>,
    /// The covariant metric `g_{ij}`.
    pub inverse_metric: Vec<Vec<DiffExpr>>,
    /// Christoffel symbols `Γ^k_{ij}` indexed `[k][i][j]`.
    pub christoffel: Vec<Vec<Vec<DiffExpr>>>,
    /// Operator coefficients `b^{ij}_k = −Σ_m g^{im} Γ^j_{mk}` indexed `[i][j][k]`.
    pub b: Vec<Vec<Vec<DiffExpr>>>,
    /// Nonzero Riemann components `(i, j, k, l, R^i_{jkl})`.
    pub curvature: Vec<(usize, usize, usize, usize, DiffExpr)>,
    /// True when every curvature component vanishes.
    pub flat: bool,
}

/// Report on a proposed flat coordinate chart.
#[derive(Debug, Clone)]
pub struct DnCanonicalReport {
    /// The transformed metric `η^{αβ} = Σ T^α_i g^{ij} T^β_j`.
    pub eta: Vec<Vec<DiffExpr>>,
    /// True when `η` is diagonal with constant entries `±1`.
    pub is_flat_chart: bool,
    /// The canonical constant-coefficient operator when the chart is flat.
    pub p_can: Option<PDOperator>,
}

/// Outcome of the zero-order shape test together with the closedness
/// certificate when the shape holds.
#[derive(Debug)]
pub struct ZeroOrderReport {
    pub form_ok: bool,
    pub violations: Vec<String>,
    pub certificate: Option<CertOutcome<SymplecticCertificate>>,
}

fn depends_on_fields_only(e: &DiffExpr) -> bool {
    e.is_omega_free()
        && !e.contains_lambda()
        && !e.contains_x()
        && e.jet_vars().iter().all(|&(_, order)| order == 0)
}

fn validate_metric(g: &[Vec<DiffExpr>]) -> Result<usize, CertError> {
    let n = g.len();
    if n == 0 || g.iter().any(|row| row.len() != n) {
        return Err(CertError::MetricShape);
    }
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if !depends_on_fields_only(e) {
                return Err(CertError::MetricEntry { i: i + 1, j: j + 1 });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !g[i][j].sub(&g[j][i]).is_zero() {
                return Err(CertError::AsymmetricMetric { i: i + 1, j: j + 1 });
            }
        }
    }
    Ok(n)
}

fn field_var(i: usize) -> Var {
    Var::Jet { field: i as u16, order: 0 }
}

/// Computes Levi-Civita connection and curvature of a contravariant metric.
pub fn dn_validate(g: &[Vec<DiffExpr>]) -> Result<DnData, CertError> {
    let n = validate_metric(g)?;
    if matrix_det(g)?.is_zero() {
        return Err(CertError::DegenerateMetric);
    }
    let lower = matrix_inverse(g)?.ok_or(CertError::DegenerateMetric)?;
    let half = BigRational::new(1.into(), 2.into());

    let mut christoffel = vec![vec![vec![DiffExpr::zero(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut sum = DiffExpr::zero();
                for s in 0..n {
                    let bracket = lower[s][j]
                        .partial(&field_var(i))
                        .add(&lower[i][s].partial(&field_var(j)))
                        .sub(&lower[i][j].partial(&field_var(s)));
                    sum = sum.add(&g[k][s].mul(&bracket));
                }
                christoffel[k][i][j] = sum.scale_rational(&half);
            }
        }
    }

    let mut b = vec![vec![vec![DiffExpr::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut sum = DiffExpr::zero();
                for m in 0..n {
                    sum = sum.add(&g[i][m].mul(&christoffel[j][m][k]));
                }
                b[i][j][k] = sum.neg();
            }
        }
    }

    let mut curvature = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = christoffel[i][l][j]
                        .partial(&field_var(k))
                        .sub(&christoffel[i][k][j].partial(&field_var(l)));
                    for m in 0..n {
                        r = r
                            .add(&christoffel[i][k][m].mul(&christoffel[m][l][j]))
                            .sub(&christoffel[i][l][m].mul(&christoffel[m][k][j]));
                    }
                    if !r.is_zero() {
                        curvature.push((i + 1, j + 1, k + 1, l + 1, r));
                    }
                }
            }
        }
    }
    let flat = curvature.is_empty();
    Ok(DnData {
        metric: g.to_vec(),
        inverse_metric: lower,
        christoffel,
        b,
        curvature,
        flat,
    })
}

/// Builds the first-order operator `g^{ij}D + b^{ij}_k u^k_1` from validated
/// metric data.
pub fn dn_operator(data: &DnData) -> PDOperator {
    let n = data.metric.len();
    let mut op = PDOperator::new(n, n, n, Variance::hamiltonian());
    for i in 0..n {
        for j in 0..n {
            op.set_coeff(i, j, 1, data.metric[i][j].clone());
            let mut zero_order = DiffExpr::zero();
            for k in 0..n {
                zero_order =
                    zero_order.add(&data.b[i][j][k].mul(&DiffExpr::jet(k as u16, 1)));
            }
            op.set_coeff(i, j, 0, zero_order);
        }
    }
    op
}

fn is_plus_minus_one(e: &DiffExpr) -> bool {
    e.is_one() || e.neg().is_one()
}

/// Transforms the metric by the Jacobian of `psi` and tests for the constant
/// diagonal `±1` canonical form.
pub fn dn_canonical(
    g: &[Vec<DiffExpr>],
    psi: &[DiffExpr],
) -> Result<DnCanonicalReport, CertError> {
    let n = validate_metric(g)?;
    if psi.len() != n {
        return Err(CertError::MetricShape);
    }
    for e in psi {
        if !depends_on_fields_only(e) {
            return Err(CertError::MetricEntry { i: 1, j: 1 });
        }
    }
    let mut jac = vec![vec![DiffExpr::zero(); n]; n];
    for (a, component) in psi.iter().enumerate() {
        for i in 0..n {
            jac[a][i] = component.partial(&field_var(i));
        }
    }
    if matrix_det(&jac)?.is_zero() {
        return Err(CertError::DegenerateJacobian);
    }

    let mut eta = vec![vec![DiffExpr::zero(); n]; n];
    for a in 0..n {
        for bx in 0..n {
            let mut sum = DiffExpr::zero();
            for i in 0..n {
                for j in 0..n {
                    sum = sum.add(&jac[a][i].mul(&g[i][j]).mul(&jac[bx][j]));
                }
            }
            eta[a][bx] = sum;
        }
    }

    let mut is_flat_chart = true;
    for a in 0..n {
        for bx in 0..n {
            if a == bx {
                if !is_plus_minus_one(&eta[a][bx]) {
                    is_flat_chart = false;
                }
            } else if !eta[a][bx].is_zero() {
                is_flat_chart = false;
            }
        }
    }
    let p_can = is_flat_chart.then(|| {
        let mut op = PDOperator::new(n, n, n, Variance::hamiltonian());
        for a in 0..n {
            op.set_coeff(a, a, 1, eta[a][a].clone());
        }
        op
    });
    Ok(DnCanonicalReport { eta, is_flat_chart, p_can })
}

fn affine_in_first_jets(e: &DiffExpr) -> bool {
    if e.denominator()
        .terms()
        .any(|(m, _)| m.iter().any(|(v, _)| matches!(v, Var::Jet { order: 1, .. })))
    {
        return false;
    }
    e.numerator().terms().all(|(m, _)| {
        let deg: u32 = m
            .iter()
            .filter(|(v, _)| matches!(v, Var::Jet { order: 1, .. }))
            .map(|(_, p)| *p)
            .sum();
        deg <= 1
    })
}

/// Classifies a matrix of multiplication operators as a symplectic candidate
/// and, when the shape admits one, runs the closedness certificate.
pub fn zero_order_check(
    j: &PDOperator,
    symbols: &[NonlocalSymbol],
    constants: &[AlgebraicConstant],
) -> Result<ZeroOrderReport, CertError> {
    let jn = j.normal_form()?;
    let mut violations = Vec::new();
    if !jn.tails().is_empty() {
        violations.push("a nonlocal tail is present".to_string());
    }
    for i in 0..jn.rows() {
        for jj in 0..jn.cols() {
            for (&p, c) in jn.diff_entry(i, jj) {
                if c.is_zero() {
                    continue;
                }
                let at = format!("entry ({},{})", i + 1, jj + 1);
                if p > 0 {
                    violations.push(format!("{at} has positive differential order"));
                    continue;
                }
                if !c.is_omega_free() {
                    violations.push(format!("{at} involves a nonlocal variable"));
                }
                if c.max_jet_order().is_some_and(|o| o > 1) {
                    violations.push(format!("{at} depends on jets of order above one"));
                } else if !affine_in_first_jets(c) {
                    violations.push(format!("{at} is not affine in the first-order jets"));
                }
            }
        }
    }
    let form_ok = violations.is_empty();
    let certificate = if form_ok {
        Some(wnl_symplectic_certificate(&jn, None, symbols, constants)?)
    } else {
        None
    };
    Ok(ZeroOrderReport { form_ok, violations, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{Tail, Variance};

    fn u(order: u32) -> DiffExpr {
        DiffExpr::jet(0, order)
    }

    fn w1(order: u32) -> DiffExpr {
        DiffExpr::jet(1, order)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn diag(entries: &[DiffExpr]) -> Vec<Vec<DiffExpr>> {
        let n = entries.len();
        let mut g = vec![vec![DiffExpr::zero(); n]; n];
        for (i, e) in entries.iter().enumerate() {
            g[i][i] = e.clone();
        }
        g
    }

    #[test]
    fn euclidean_metric_is_flat() {
        let g = diag(&[DiffExpr::one(), DiffExpr::one()]);
        let data = dn_validate(&g).unwrap();
        assert!(data.flat);
        assert!(data.curvature.is_empty());
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(data.christoffel[k][i][j].is_zero());
                    assert!(data.b[k][i][j].is_zero());
                }
            }
        }
        let p = dn_operator(&data);
        assert!(p.coeff(0, 0, 1).is_one());
        assert!(p.coeff(1, 1, 1).is_one());
        assert!(p.coeff(0, 1, 1).is_zero());
        assert!(p.coeff(0, 0, 0).is_zero());
    }

    #[test]
    fn field_scaled_metric_operator() {
        // g¹¹ = u yields Γ¹₁₁ = −1/(2u), b¹¹₁ = 1/2 and the operator
        // u·D + u₁/2.
        let g = vec![vec![u(0)]];
        let data = dn_validate(&g).unwrap();
        assert!(data.flat);
        let gamma = DiffExpr::one()
            .neg()
            .try_div(&u(0).scale_rational(&q(2, 1)))
            .unwrap();
        assert!(data.christoffel[0][0][0].sub(&gamma).is_zero());
        assert!(data.b[0][0][0].sub(&DiffExpr::from_rational(q(1, 2))).is_zero());
        let p = dn_operator(&data);
        assert!(p.coeff(0, 0, 1).sub(&u(0)).is_zero());
        assert!(p.coeff(0, 0, 0).sub(&u(1).scale_rational(&q(1, 2))).is_zero());
        assert!(p.normal_form().unwrap().series_profile().unwrap().formally_skew);
    }

    #[test]
    fn curved_metric_is_reported() {
        // Upper metric diag(1, 1/(1+u²)) has R¹₂₁₂ = −1/(1+u²) and is not
        // flat.
        let denom = DiffExpr::one().add(&u(0).pow(2));
        let g = diag(&[DiffExpr::one(), DiffExpr::one().try_div(&denom).unwrap()]);
        let data = dn_validate(&g).unwrap();
        assert!(!data.flat);
        let gamma122 = u(0).neg();
        assert!(data.christoffel[0][1][1].sub(&gamma122).is_zero());
        let gamma212 = u(0).try_div(&denom).unwrap();
        assert!(data.christoffel[1][0][1].sub(&gamma212).is_zero());
        assert!(data.christoffel[1][1][0].sub(&gamma212).is_zero());
        let b122 = u(0).neg().try_div(&denom).unwrap();
        assert!(data.b[0][1][1].sub(&b122).is_zero());
        let b212 = u(0).try_div(&denom).unwrap();
        assert!(data.b[1][0][1].sub(&b212).is_zero());
        let b221 = u(0).neg().try_div(&denom.pow(2)).unwrap();
        assert!(data.b[1][1][0].sub(&b221).is_zero());
        let r = data
            .curvature
            .iter()
            .find(|(i, j, k, l, _)| (*i, *j, *k, *l) == (1, 2, 1, 2))
            .expect("R^1_{212} should be nonzero");
        let expected = DiffExpr::one().neg().try_div(&denom).unwrap();
        assert!(r.4.sub(&expected).is_zero());
    }

    #[test]
    fn metric_validation_rejects_bad_input() {
        let g = vec![vec![DiffExpr::one(), u(0)], vec![DiffExpr::zero(), DiffExpr::one()]];
        assert!(matches!(dn_validate(&g), Err(CertError::AsymmetricMetric { .. })));
        let g = vec![vec![u(1)]];
        assert!(matches!(dn_validate(&g), Err(CertError::MetricEntry { i: 1, j: 1 })));
        let g = vec![vec![DiffExpr::one(), DiffExpr::one()]];
        assert!(matches!(dn_validate(&g), Err(CertError::MetricShape)));
        let g = vec![
            vec![DiffExpr::one(), DiffExpr::one()],
            vec![DiffExpr::one(), DiffExpr::one()],
        ];
        assert!(matches!(dn_validate(&g), Err(CertError::DegenerateMetric)));
    }

    #[test]
    fn canonical_change_of_coordinates() {
        // ψ = (u/2, v) flattens diag(4, 1) to the Euclidean form.
        let g = diag(&[DiffExpr::from_i64(4), DiffExpr::one()]);
        let psi = vec![u(0).scale_rational(&q(1, 2)), w1(0)];
        let report = dn_canonical(&g, &psi).unwrap();
        assert!(report.is_flat_chart);
        assert!(report.eta[0][0].is_one());
        assert!(report.eta[1][1].is_one());
        assert!(report.eta[0][1].is_zero());
        let p = report.p_can.expect("flat chart should carry an operator");
        assert!(p.coeff(0, 0, 1).is_one());
        assert!(p.coeff(1, 1, 1).is_one());
    }

    #[test]
    fn non_flattening_map_reports_failure() {
        let g = diag(&[DiffExpr::one(), DiffExpr::one()]);
        let psi = vec![u(0).pow(2), w1(0)];
        let report = dn_canonical(&g, &psi).unwrap();
        assert!(!report.is_flat_chart);
        assert!(report.p_can.is_none());
        let psi = vec![u(0), u(0)];
        assert!(matches!(
            dn_canonical(&g, &psi),
            Err(CertError::DegenerateJacobian)
        ));
        let psi = vec![u(1), w1(0)];
        assert!(matches!(dn_canonical(&g, &psi), Err(CertError::MetricEntry { .. })));
    }

    #[test]
    fn constant_skew_matrix_is_certified() {
        let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
        j.add_coeff(0, 1, 0, &DiffExpr::one());
        j.add_coeff(1, 0, 0, &DiffExpr::one().neg());
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.form_ok);
        assert!(report.violations.is_empty());
        assert!(matches!(report.certificate, Some(CertOutcome::Certified(_))));
    }

    #[test]
    fn x_dependent_entries_are_admitted() {
        let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
        j.add_coeff(0, 1, 0, &DiffExpr::x());
        j.add_coeff(1, 0, 0, &DiffExpr::x().neg());
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.form_ok);
        assert!(matches!(report.certificate, Some(CertOutcome::Certified(_))));
    }

    #[test]
    fn form_violations_are_reported() {
        let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
        j.add_coeff(0, 1, 0, &u(2));
        j.add_coeff(1, 0, 0, &u(2).neg());
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(!report.form_ok);
        assert!(report.violations.iter().any(|v| v.contains("jets of order above one")));
        assert!(report.certificate.is_none());

        let mut j = PDOperator::new(1, 1, 1, Variance::symplectic());
        j.add_coeff(0, 0, 1, &u(0));
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.violations.iter().any(|v| v.contains("positive differential order")));

        let mut j = PDOperator::new(2, 2, 2, Variance::symplectic());
        j.add_coeff(0, 1, 0, &u(1).pow(2));
        j.add_coeff(1, 0, 0, &u(1).pow(2).neg());
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.violations.iter().any(|v| v.contains("affine in the first-order jets")));

        let mut j = PDOperator::new(1, 1, 1, Variance::symplectic());
        j.add_tail(Tail::new(vec![DiffExpr::one()], vec![DiffExpr::one()]));
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.violations.iter().any(|v| v.contains("nonlocal tail")));
    }

    #[test]
    fn field_valued_entries_refute_closedness() {
        // J¹² = w (the third field) passes the shape test but is not closed.
        let mut j = PDOperator::new(3, 3, 3, Variance::symplectic());
        j.add_coeff(0, 1, 0, &DiffExpr::jet(2, 0));
        j.add_coeff(1, 0, 0, &DiffExpr::jet(2, 0).neg());
        let report = zero_order_check(&j, &[], &[]).unwrap();
        assert!(report.form_ok);
        match report.certificate {
            Some(CertOutcome::Refuted { residual }) => {
                let c = residual.coeff(0, 2, 0);
                assert!(!c.is_zero());
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }
}
