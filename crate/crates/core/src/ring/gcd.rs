//! Multivariate polynomial GCD over the rationals.
//!
//! Recursive primitive pseudo-remainder sequences: pick the largest
//! variable, split off contents (GCDs of the coefficient polynomials in the
//! remaining variables), run a PRS on the primitive parts, and recurse.
//! Inputs here are small (the fractions produced by the calculus stay tiny),
//! so the classical algorithm is plenty.
//!
//! All routines require rational coefficients; callers split mixed
//! coefficients into rational components first.

use super::poly::{Mono, Poly, Var};

/// GCD of two polynomials with rational coefficients, normalized monic.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    debug_assert!(a.has_rational_coeffs() && b.has_rational_coeffs());
    let g = gcd_inner(a, b);
    if g.is_zero() {
        g
    } else {
        g.monic()
    }
}

/// GCD of a list of polynomials (rational coefficients), normalized monic.
pub fn poly_gcd_list<'a, I: IntoIterator<Item = &'a Poly>>(polys: I) -> Poly {
    let mut acc = Poly::zero();
    for p in polys {
        acc = poly_gcd(&acc, p);
        if !acc.is_zero() && acc.is_constant() {
            return Poly::one();
        }
    }
    acc
}

fn gcd_inner(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let mut vars = a.vars();
    vars.extend(b.vars());
    let xm = vars.into_iter().next_back().expect("nonconstant polys have vars");

    let ac = a.coeffs_in(&xm);
    let bc = b.coeffs_in(&xm);
    let a_has = ac.keys().any(|e| *e > 0);
    let b_has = bc.keys().any(|e| *e > 0);
    // A common divisor must be free of any variable missing from one side,
    // so it divides every coefficient of the side that does contain it.
    if !a_has {
        return gcd_inner(a, &poly_gcd_list(bc.values()));
    }
    if !b_has {
        return gcd_inner(&poly_gcd_list(ac.values()), b);
    }

    let ca = poly_gcd_list(ac.values());
    let cb = poly_gcd_list(bc.values());
    let cont = gcd_inner(&ca, &cb);
    let ap = a.div_exact(&ca).expect("content divides");
    let bp = b.div_exact(&cb).expect("content divides");

    let (mut f, mut g) = if ap.degree_in(&xm) >= bp.degree_in(&xm) {
        (ap, bp)
    } else {
        (bp, ap)
    };
    loop {
        let r = prem(&f, &g, &xm);
        if r.is_zero() {
            break;
        }
        let rp = primitive_wrt(&r, &xm);
        f = g;
        g = rp;
        if g.degree_in(&xm) == 0 {
            // Primitive parts are coprime in xm.
            g = Poly::one();
            break;
        }
    }
    cont.mul(&g)
}

/// Pseudo-remainder of `a` by `b` with respect to `xm`; eliminates the
/// leading term of the running remainder after scaling by b's leading
/// coefficient, so no coefficient division is needed.
fn prem(a: &Poly, b: &Poly, xm: &Var) -> Poly {
    let db = b.degree_in(xm);
    let lb = lead_coeff_in(b, xm, db);
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let dr = r.degree_in(xm);
        if dr < db {
            return r;
        }
        let lr = lead_coeff_in(&r, xm, dr);
        let shift = Poly::term(Mono::pow_var(xm.clone(), dr - db), super::coeff::KNum::one());
        r = r.mul(&lb).sub(&b.mul(&lr).mul(&shift));
    }
}

/// Coefficient of xm^deg in `p`, as a polynomial in the other variables.
fn lead_coeff_in(p: &Poly, xm: &Var, deg: u32) -> Poly {
    let mut out = Poly::zero();
    for (m, k) in p.terms() {
        if m.degree_of(xm) == deg {
            out.add_term(m.filter(|v| v != xm), k.clone());
        }
    }
    out
}

/// Divides out the content with respect to `xm` and normalizes monic to
/// keep PRS coefficients from growing.
fn primitive_wrt(p: &Poly, xm: &Var) -> Poly {
    let coeffs = p.coeffs_in(xm);
    let cont = poly_gcd_list(coeffs.values());
    let pp = if cont.is_zero() || cont.is_constant() {
        p.clone()
    } else {
        p.div_exact(&cont).expect("content divides")
    };
    pp.monic()
}
