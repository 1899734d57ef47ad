//! Exact linear algebra over the coefficient field.
//!
//! Vectors of ring elements are treated as members of a vector space
//! over the coefficient field (rationals extended by the declared
//! constants): each component is brought over a common polynomial
//! denominator and the numerator monomials become coordinates. This is
//! what "linear independence over constants" means everywhere in the
//! operator calculus.

use std::collections::BTreeMap;

use crate::ring::gcd::poly_gcd;
use crate::ring::{DiffExpr, KNum, Mono, Poly, RingError};

/// Solves rows·x = rhs by Gaussian elimination. Returns None when the
/// system is inconsistent; free variables are set to zero.
pub fn solve_linear(
    rows: &[Vec<KNum>],
    rhs: &[KNum],
    unknowns: usize,
) -> Result<Option<Vec<KNum>>, RingError> {
    let mut a: Vec<Vec<KNum>> = rows.to_vec();
    let mut b: Vec<KNum> = rhs.to_vec();
    let m = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; unknowns];
    let mut row = 0;
    for col in 0..unknowns {
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].inv()?;
        for c in col..unknowns {
            a[row][c] = a[row][c].mul(&inv);
        }
        b[row] = b[row].mul(&inv);
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..unknowns {
                    let t = a[row][c].mul(&factor);
                    a[r][c] = a[r][c].sub(&t);
                }
                let t = b[row].mul(&factor);
                b[r] = b[r].sub(&t);
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == m {
            break;
        }
    }
    for r in row..m {
        if a[r].iter().all(|k| k.is_zero()) && !b[r].is_zero() {
            return Ok(None);
        }
    }
    let mut x = vec![KNum::zero(); unknowns];
    for col in 0..unknowns {
        if let Some(r) = pivot_of_col[col] {
            x[col] = b[r].clone();
        }
    }
    Ok(Some(x))
}

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    let g = poly_gcd(a, b);
    let q = b.div_exact(&g).expect("gcd divides");
    a.mul(&q)
}

/// Incremental span of rational-function vectors over the coefficient
/// field. `try_express` finds constants cᵢ with v = Σ cᵢ·basisᵢ, if any.
#[derive(Clone, Debug)]
pub struct SpanReduce {
    dim: usize,
    basis: Vec<Vec<DiffExpr>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanOutcome {
    Independent,
    Dependent(Vec<KNum>),
}

impl SpanReduce {
    pub fn new(dim: usize) -> Self {
        SpanReduce { dim, basis: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<DiffExpr>] {
        &self.basis
    }

    /// Expresses `v` over the current basis, or reports independence.
    pub fn try_express(&self, v: &[DiffExpr]) -> Result<Option<Vec<KNum>>, RingError> {
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        if self.basis.is_empty() {
            return if v.iter().all(|e| e.is_zero()) { Ok(Some(Vec::new())) } else { Ok(None) };
        }
        // Common denominator per component across basis and v.
        let mut dens: Vec<Poly> = vec![Poly::one(); self.dim];
        for i in 0..self.dim {
            for row in self.basis.iter().chain(std::iter::once(&v.to_vec())) {
                dens[i] = poly_lcm(&dens[i], row[i].denominator());
            }
        }
        let coords = |row: &[DiffExpr]| -> BTreeMap<(usize, Mono), KNum> {
            let mut out = BTreeMap::new();
            for (i, e) in row.iter().enumerate() {
                let scale = dens[i].div_exact(e.denominator()).expect("lcm divides");
                let p = e.numerator().mul(&scale);
                for (m, k) in p.terms() {
                    out.insert((i, m.clone()), k.clone());
                }
            }
            out
        };
        let basis_coords: Vec<_> = self.basis.iter().map(|r| coords(r)).collect();
        let v_coords = coords(v);
        let mut keys: std::collections::BTreeSet<(usize, Mono)> = v_coords.keys().cloned().collect();
        for bc in &basis_coords {
            keys.extend(bc.keys().cloned());
        }
        let rows: Vec<Vec<KNum>> = keys
            .iter()
            .map(|key| {
                basis_coords
                    .iter()
                    .map(|bc| bc.get(key).cloned().unwrap_or_else(KNum::zero))
                    .collect()
            })
            .collect();
        let rhs: Vec<KNum> = keys
            .iter()
            .map(|key| v_coords.get(key).cloned().unwrap_or_else(KNum::zero))
            .collect();
        solve_linear(&rows, &rhs, self.basis.len())
    }

    /// Adds `v` to the span, reporting how it relates to the basis.
    pub fn insert(&mut self, v: &[DiffExpr]) -> Result<SpanOutcome, RingError> {
        match self.try_express(v)? {
            Some(c) => Ok(SpanOutcome::Dependent(c)),
            None => {
                self.basis.push(v.to_vec());
                Ok(SpanOutcome::Independent)
            }
        }
    }
}

/// Inverse of a square matrix over the rational-function field, or None
/// when singular.
pub fn matrix_inverse(m: &[Vec<DiffExpr>]) -> Result<Option<Vec<Vec<DiffExpr>>>, RingError> {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    let mut a: Vec<Vec<DiffExpr>> = m.to_vec();
    let mut inv: Vec<Vec<DiffExpr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { DiffExpr::one() } else { DiffExpr::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(None);
        };
        a.swap(col, p);
        inv.swap(col, p);
        let pivot = a[col][col].clone();
        for c in 0..n {
            a[col][c] = a[col][c].try_div(&pivot)?;
            inv[col][c] = inv[col][c].try_div(&pivot)?;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..n {
                    let t = a[col][c].mul(&factor);
                    a[r][c] = a[r][c].sub(&t);
                    let t = inv[col][c].mul(&factor);
                    inv[r][c] = inv[r][c].sub(&t);
                }
            }
        }
    }
    Ok(Some(inv))
}

/// Determinant over the rational-function field by exact Gaussian
/// elimination.
pub fn matrix_det(m: &[Vec<DiffExpr>]) -> Result<DiffExpr, RingError> {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    let mut a: Vec<Vec<DiffExpr>> = m.to_vec();
    let mut det = DiffExpr::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(DiffExpr::zero());
        };
        if p != col {
            a.swap(col, p);
            det = det.neg();
        }
        let pivot = a[col][col].clone();
        det = det.mul(&pivot);
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let factor = a[r][col].try_div(&pivot)?;
                for c in col..n {
                    let t = a[col][c].mul(&factor);
                    a[r][c] = a[r][c].sub(&t);
                }
            }
        }
    }
    Ok(det)
}
