//! Truncated formal series in powers of D.
//!
//! A series holds matrix coefficients for powers above a cutoff; tails
//! expand as f·D⁻¹∘g = Σ_q (−1)^q·f·D^q(g)·D^{−1−q}. Composition uses
//! the generalized Leibniz rule with binomial coefficients extended to
//! negative upper index, which keeps every product finite after
//! truncation.

use std::collections::BTreeMap;

use num::BigRational;

use crate::linalg::matrix_inverse;
use crate::ring::DiffExpr;

use super::{OpError, PDOperator};

type Matrix = Vec<Vec<DiffExpr>>;

fn zero_matrix(rows: usize, cols: usize) -> Matrix {
    vec![vec![DiffExpr::zero(); cols]; rows]
}

fn matrix_is_zero(m: &Matrix) -> bool {
    m.iter().flatten().all(|e| e.is_zero())
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.len();
    let inner = b.len();
    let cols = b[0].len();
    let mut out = zero_matrix(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    out
}

fn mat_d(m: &Matrix, t: u32) -> Matrix {
    m.iter()
        .map(|row| row.iter().map(|e| e.total_derivative_n(t)).collect())
        .collect()
}

/// C(p, t) = p(p−1)⋯(p−t+1)/t! for integer p of either sign.
fn binom_general(p: i64, t: u32) -> BigRational {
    let mut num = num::BigInt::from(1);
    let mut den = num::BigInt::from(1);
    for s in 0..t as i64 {
        num *= num::BigInt::from(p - s);
        den *= num::BigInt::from(s + 1);
    }
    BigRational::new(num, den)
}

/// Matrix coefficients of powers of D, truncated below `min_power`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    rows: usize,
    cols: usize,
    min_power: i64,
    coeffs: BTreeMap<i64, Matrix>,
}

impl TruncatedSeries {
    pub fn new(rows: usize, cols: usize, min_power: i64) -> Self {
        TruncatedSeries { rows, cols, min_power, coeffs: BTreeMap::new() }
    }

    pub fn identity(n: usize, min_power: i64) -> Self {
        let mut s = TruncatedSeries::new(n, n, min_power);
        let mut m = zero_matrix(n, n);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = DiffExpr::one();
        }
        s.add_matrix(0, m);
        s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn min_power(&self) -> i64 {
        self.min_power
    }

    pub fn coeff(&self, power: i64) -> Matrix {
        self.coeffs.get(&power).cloned().unwrap_or_else(|| zero_matrix(self.rows, self.cols))
    }

    pub fn powers(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    /// Adds `m` at `power`; contributions below the cutoff are dropped.
    pub fn add_matrix(&mut self, power: i64, m: Matrix) {
        if power < self.min_power || matrix_is_zero(&m) {
            return;
        }
        let entry = self
            .coeffs
            .entry(power)
            .or_insert_with(|| zero_matrix(self.rows, self.cols));
        for i in 0..self.rows {
            for j in 0..self.cols {
                entry[i][j] = entry[i][j].add(&m[i][j]);
            }
        }
        if matrix_is_zero(entry) {
            self.coeffs.remove(&power);
        }
    }

    pub fn top_power(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Highest power ≥ `from` carrying a nonzero matrix.
    pub fn top_power_from(&self, from: i64) -> Option<i64> {
        self.coeffs.range(from..).next_back().map(|(p, _)| *p)
    }

    pub fn is_zero_from(&self, from: i64) -> bool {
        self.top_power_from(from).is_none()
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        out.min_power = self.min_power.max(other.min_power);
        out.coeffs.retain(|p, _| *p >= out.min_power);
        for (p, m) in &other.coeffs {
            let negated: Matrix = m
                .iter()
                .map(|row| row.iter().map(|e| e.neg()).collect())
                .collect();
            out.add_matrix(*p, negated);
        }
        out
    }

    /// Composition self∘other. The result is reliable only for powers at
    /// or above the returned series' cutoff, which accounts for both
    /// operands' truncation.
    pub fn compose(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert_eq!(self.cols, other.rows, "series shapes");
        let self_top = self.top_power().unwrap_or(self.min_power);
        let other_top = other.top_power().unwrap_or(other.min_power);
        let min_power =
            (self.min_power + other_top).max(other.min_power + self_top);
        let mut out = TruncatedSeries::new(self.rows, other.cols, min_power);
        for (p, ma) in &self.coeffs {
            for (q, mb) in &other.coeffs {
                let t_max = p + q - min_power;
                if t_max < 0 {
                    continue;
                }
                for t in 0..=t_max as u32 {
                    let c = binom_general(*p, t);
                    if num::Zero::is_zero(&c) {
                        continue;
                    }
                    let mut m = mat_mul(ma, &mat_d(mb, t));
                    for row in &mut m {
                        for e in row {
                            *e = e.scale_rational(&c);
                        }
                    }
                    out.add_matrix(p + q - t as i64, m);
                }
            }
        }
        out
    }
}

/// Expands an operator into a truncated series, including all tail
/// contributions down to `min_power`.
pub fn expand_truncated(op: &PDOperator, min_power: i64) -> TruncatedSeries {
    let mut s = TruncatedSeries::new(op.rows(), op.cols(), min_power);
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            for (p, e) in op.diff_entry(i, j) {
                let mut m = zero_matrix(op.rows(), op.cols());
                m[i][j] = e.clone();
                s.add_matrix(*p as i64, m);
            }
        }
    }
    for tail in op.tails() {
        let mut q = 0u32;
        while -1 - (q as i64) >= min_power {
            let mut m = zero_matrix(op.rows(), op.cols());
            for (i, f) in tail.left.iter().enumerate() {
                for (j, g) in tail.right.iter().enumerate() {
                    let mut e = f.mul(&g.total_derivative_n(q));
                    if q % 2 == 1 {
                        e = e.neg();
                    }
                    m[i][j] = e;
                }
            }
            s.add_matrix(-1 - q as i64, m);
            q += 1;
        }
    }
    s
}

/// Formal inverse of a square operator as a truncated series, built by
/// leading-coefficient elimination. The inverse satisfies
/// op∘result = identity for all powers at or above `min_power`.
pub fn invert_truncated(op: &PDOperator, min_power: i64) -> Result<TruncatedSeries, OpError> {
    assert_eq!(op.rows(), op.cols(), "inverse needs a square operator");
    let probe = expand_truncated(op, min_power - 1);
    let Some(top) = probe.top_power() else {
        return Err(OpError::NotInvertible);
    };
    let depth = min_power - top.abs();
    let a = expand_truncated(op, depth);
    let leading = a.coeff(top);
    let Some(inv) = matrix_inverse(&leading).map_err(OpError::Ring)? else {
        return Err(OpError::NotInvertible);
    };
    let mut b = TruncatedSeries::new(op.rows(), op.cols(), depth);
    b.add_matrix(-top, inv.clone());
    let identity = TruncatedSeries::identity(op.rows(), min_power);
    let mut residual = identity.sub(&a.compose(&b));
    let mut guard = residual.top_power_from(min_power);
    while let Some(r_top) = residual.top_power_from(min_power) {
        let corr = mat_mul(&inv, &residual.coeff(r_top));
        let mut step = TruncatedSeries::new(op.rows(), op.cols(), depth);
        step.add_matrix(r_top - top, corr);
        residual = residual.sub(&a.compose(&step));
        b.add_matrix(r_top - top, step.coeff(r_top - top));
        let new_guard = residual.top_power_from(min_power);
        assert!(
            new_guard.map_or(true, |g| guard.map_or(false, |old| g < old)),
            "inverse elimination failed to make progress"
        );
        guard = new_guard;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{PDOperator, Tail, Variance};
    use crate::ring::DiffExpr;
    use num::BigRational;

    fn u(order: u32) -> DiffExpr {
        DiffExpr::jet(0, order)
    }

    #[test]
    fn tail_expansion_alternates_derivatives() {
        // u⊗D⁻¹∘u = u²·D⁻¹ − u·u₁·D⁻² + u·u₂·D⁻³ − …
        let mut t = PDOperator::new(1, 1, 1, Variance::recursion());
        t.add_tail(Tail::new(vec![u(0)], vec![u(0)]));
        let s = expand_truncated(&t, -3);
        assert_eq!(s.coeff(-1)[0][0], u(0).mul(&u(0)));
        assert_eq!(s.coeff(-2)[0][0], u(0).mul(&u(1)).neg());
        assert_eq!(s.coeff(-3)[0][0], u(0).mul(&u(2)));
        assert!(s.coeff(0)[0][0].is_zero());
    }

    #[test]
    fn series_composition_matches_operator_composition() {
        // Expanding A∘B agrees with composing the expansions where both are valid.
        let mut a = PDOperator::new(1, 1, 1, Variance::recursion());
        a.add_coeff(0, 0, 1, &u(0));
        a.add_coeff(0, 0, 0, &u(1));
        let mut b = PDOperator::new(1, 1, 1, Variance::recursion());
        b.add_coeff(0, 0, 2, &DiffExpr::one());
        b.add_tail(Tail::new(vec![DiffExpr::one()], vec![u(0)]));
        let direct = expand_truncated(&a.compose(&b).unwrap(), -4);
        let composed = expand_truncated(&a, -4).compose(&expand_truncated(&b, -4));
        let diff = direct.sub(&composed);
        for p in diff.powers() {
            if p >= composed.min_power() {
                assert!(
                    diff.coeff(p).iter().all(|row| row.iter().all(DiffExpr::is_zero)),
                    "mismatch at power {p}"
                );
            }
        }
    }

    #[test]
    fn inverse_of_pure_derivative() {
        let d = PDOperator::diagonal_d(1, 1, 1, Variance::recursion());
        let inv = invert_truncated(&d, -4).unwrap();
        assert_eq!(inv.coeff(-1)[0][0], DiffExpr::one());
        for p in inv.powers() {
            if p != -1 {
                assert!(inv.coeff(p)[0][0].is_zero());
            }
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        // (u·D + u₁/2)⁻¹ as a series, checked by composing back.
        let mut a = PDOperator::new(1, 1, 1, Variance::hamiltonian());
        a.add_coeff(0, 0, 1, &u(0));
        a.add_coeff(
            0,
            0,
            0,
            &u(1).scale_rational(&BigRational::new(1.into(), 2.into())),
        );
        let inv = invert_truncated(&a, -6).unwrap();
        let series = expand_truncated(&a, -6);
        let product = series.compose(&inv);
        for p in product.powers() {
            if p < product.min_power() {
                continue;
            }
            let expect = if p == 0 { DiffExpr::one() } else { DiffExpr::zero() };
            assert_eq!(product.coeff(p)[0][0], expect, "power {p}");
        }
    }

    #[test]
    fn degenerate_leading_matrix_is_rejected() {
        let mut a = PDOperator::new(2, 2, 2, Variance::recursion());
        a.add_coeff(0, 0, 1, &DiffExpr::one());
        a.add_coeff(1, 0, 1, &DiffExpr::one());
        assert!(invert_truncated(&a, -4).is_err());
    }
}
