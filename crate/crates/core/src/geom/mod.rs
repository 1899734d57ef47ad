//! Geometric calculus on evolutionary vector fields, covectors, and operators.
//!
//! An evolutionary vector field `Q` acts on every object in sight through its
//! Lie derivative.  On covectors the action is `L_Q(γ) = γ′[Q] + (Q′)†(γ)`;
//! on operators it dispatches on the variance tag:
//!
//! * recursion `R: V→V`:      `L_Q(R) = R′[Q] − [Q′, R]`
//! * corecursion `N: V*→V*`:  `L_Q(N) = N′[Q] + [Q′†, N]`
//! * Hamiltonian `P: V*→V`:   `L_Q(P) = P′[Q] − Q′∘P − P∘Q′†`
//! * symplectic `J: V→V*`:    `L_Q(J) = J′[Q] + Q′†∘J + J∘Q′`
//!
//! Here `A′[Q]` differentiates the coefficients of `A` along `Q`, with the
//! product rule splitting every tail `f⊗D⁻¹∘g` into `f′[Q]⊗D⁻¹∘g + f⊗D⁻¹∘g′[Q]`.
//!
//! The module also evaluates the trilinear forms that decide structure:
//! the Schouten expression `⟨H L_{Kχ₁}(χ₂), χ₃⟩ + ⟨K L_{Hχ₁}(χ₂), χ₃⟩ + cyclic`
//! and the symplecticity form `⟨J′[X₁]X₂, X₃⟩ + cyclic`, both returned as
//! functional classes modulo total derivatives.

use crate::opalg::{OpError, PDOperator, Space, Tail};
use crate::ring::{DiffExpr, NonlocalSymbol};
use crate::varcalc::{
    directional, directional_vec, euler, frechet, FunctionalClass, ResolutionMode, VarError,
};

/// A value together with any nonlocal symbols minted while computing it.
#[derive(Debug, Clone)]
pub struct Derived<T> {
    pub value: T,
    pub introduced: Vec<NonlocalSymbol>,
}

fn extend_universe(
    universe: &mut Vec<NonlocalSymbol>,
    introduced: &mut Vec<NonlocalSymbol>,
    fresh: Vec<NonlocalSymbol>,
) {
    for s in fresh {
        if !universe.contains(&s) {
            universe.push(s.clone());
        }
        if !introduced.contains(&s) {
            introduced.push(s);
        }
    }
}

/// Differentiates every coefficient of `a` along `q`, splitting tails by the
/// product rule.
pub fn operator_directional(
    a: &PDOperator,
    q: &[DiffExpr],
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<PDOperator>, OpError> {
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let mut out = PDOperator::new(a.fields(), a.rows(), a.cols(), a.variance());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            for (&p, c) in a.diff_entry(i, j) {
                let d = directional(c, q, a.fields(), &universe, mode)?;
                extend_universe(&mut universe, &mut introduced, d.introduced);
                out.add_coeff(i, j, p, &d.value);
            }
        }
    }
    for t in a.tails() {
        let (dl, fresh) = directional_vec(&t.left, q, a.fields(), &universe, mode)?;
        extend_universe(&mut universe, &mut introduced, fresh);
        let left_tail = Tail::new(dl, t.right.clone());
        if !left_tail.is_zero() {
            out.add_tail(left_tail);
        }
        let (dr, fresh) = directional_vec(&t.right, q, a.fields(), &universe, mode)?;
        extend_universe(&mut universe, &mut introduced, fresh);
        let right_tail = Tail::new(t.left.clone(), dr);
        if !right_tail.is_zero() {
            out.add_tail(right_tail);
        }
    }
    Ok(Derived {
        value: out,
        introduced,
    })
}

/// Commutator of evolutionary vector fields, `[P,Q] = Q′[P] − P′[Q]`.
pub fn commutator(
    p: &[DiffExpr],
    q: &[DiffExpr],
    fields: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<Vec<DiffExpr>>, VarError> {
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let (qp, fresh) = directional_vec(q, p, fields, &universe, mode)?;
    extend_universe(&mut universe, &mut introduced, fresh);
    let (pq, fresh) = directional_vec(p, q, fields, &universe, mode)?;
    extend_universe(&mut universe, &mut introduced, fresh);
    let value = qp.iter().zip(&pq).map(|(a, b)| a.sub(b)).collect();
    Ok(Derived {
        value,
        introduced,
    })
}

/// Lie derivative of a covector along `q`: `γ′[Q] + (Q′)†(γ)`.
pub fn lie_covector(
    gamma: &[DiffExpr],
    q: &[DiffExpr],
    fields: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<Vec<DiffExpr>>, OpError> {
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let (gq, fresh) = directional_vec(gamma, q, fields, &universe, mode)?;
    extend_universe(&mut universe, &mut introduced, fresh);
    let qop = frechet(q, Space::Vector, fields)?;
    let applied = qop.adjoint().apply(gamma, &universe, mode)?;
    extend_universe(&mut universe, &mut introduced, applied.introduced);
    let value = gq
        .iter()
        .zip(&applied.components)
        .map(|(a, b)| a.add(b))
        .collect();
    Ok(Derived {
        value,
        introduced,
    })
}

/// Lie derivative of an operator along `q`, dispatched on the variance tag.
pub fn lie_operator(
    a: &PDOperator,
    q: &[DiffExpr],
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<PDOperator>, OpError> {
    let da = operator_directional(a, q, symbols, mode)?;
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    extend_universe(&mut universe, &mut introduced, da.introduced);
    let qop = frechet(q, Space::Vector, a.fields())?;
    let qadj = qop.adjoint();
    let v = a.variance();
    let value = match (v.input, v.output) {
        (Space::Vector, Space::Vector) => da
            .value
            .sub(&qop.compose_with_symbols(a, &universe)?)?
            .add(&a.compose_with_symbols(&qop, &universe)?)?,
        (Space::Covector, Space::Covector) => da
            .value
            .add(&qadj.compose_with_symbols(a, &universe)?)?
            .sub(&a.compose_with_symbols(&qadj, &universe)?)?,
        (Space::Covector, Space::Vector) => da
            .value
            .sub(&qop.compose_with_symbols(a, &universe)?)?
            .sub(&a.compose_with_symbols(&qadj, &universe)?)?,
        (Space::Vector, Space::Covector) => da
            .value
            .add(&qadj.compose_with_symbols(a, &universe)?)?
            .add(&a.compose_with_symbols(&qop, &universe)?)?,
    };
    Ok(Derived {
        value: value.normal_form()?,
        introduced,
    })
}

/// The class of `∫ γ·Q dx`.
pub fn pairing(gamma: &[DiffExpr], q: &[DiffExpr], fields: usize) -> FunctionalClass {
    let mut density = DiffExpr::zero();
    for (g, v) in gamma.iter().zip(q) {
        density = density.add(&g.mul(v));
    }
    FunctionalClass::new(density, fields)
}

/// Poisson bracket `{F,G} = ∫ δF·P(δG) dx` for a Hamiltonian-variance operator.
pub fn poisson_bracket(
    p: &PDOperator,
    f: &FunctionalClass,
    g: &FunctionalClass,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<FunctionalClass>, OpError> {
    let fields = p.fields();
    let df = euler(f.density(), fields)?;
    let dg = euler(g.density(), fields)?;
    let applied = p.apply(&dg, symbols, mode)?;
    Ok(Derived {
        value: pairing(&df, &applied.components, fields),
        introduced: applied.introduced,
    })
}

/// Schouten expression of two skew operators on a covector triple.
pub fn schouten_eval(
    h: &PDOperator,
    k: &PDOperator,
    chis: [&[DiffExpr]; 3],
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<FunctionalClass>, OpError> {
    let fields = h.fields();
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let mut total = FunctionalClass::new(DiffExpr::zero(), fields);
    for rot in 0..3 {
        let c1 = chis[rot];
        let c2 = chis[(rot + 1) % 3];
        let c3 = chis[(rot + 2) % 3];
        for (outer, inner) in [(h, k), (k, h)] {
            let flow = inner.apply(c1, &universe, mode)?;
            extend_universe(&mut universe, &mut introduced, flow.introduced);
            let lc = lie_covector(c2, &flow.components, fields, &universe, mode)?;
            extend_universe(&mut universe, &mut introduced, lc.introduced);
            let moved = outer.apply(&lc.value, &universe, mode)?;
            extend_universe(&mut universe, &mut introduced, moved.introduced);
            total = total.add(&pairing(c3, &moved.components, fields));
        }
    }
    Ok(Derived {
        value: total,
        introduced,
    })
}

/// Symplecticity form `⟨J′[X₁]X₂, X₃⟩ + cyclic` on a vector triple.
pub fn symplectic_trilinear(
    j: &PDOperator,
    xs: [&[DiffExpr]; 3],
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<Derived<FunctionalClass>, OpError> {
    let fields = j.fields();
    let mut universe = symbols.to_vec();
    let mut introduced = Vec::new();
    let mut total = FunctionalClass::new(DiffExpr::zero(), fields);
    for rot in 0..3 {
        let x1 = xs[rot];
        let x2 = xs[(rot + 1) % 3];
        let x3 = xs[(rot + 2) % 3];
        let dj = operator_directional(j, x1, &universe, mode)?;
        extend_universe(&mut universe, &mut introduced, dj.introduced);
        let applied = dj.value.apply(x2, &universe, mode)?;
        extend_universe(&mut universe, &mut introduced, applied.introduced);
        total = total.add(&pairing(&applied.components, x3, fields));
    }
    Ok(Derived {
        value: total,
        introduced,
    })
}

/// Outcome of testing the conditional identity `L_Q(γ) = δ(Q·γ)/δu`.
#[derive(Debug, Clone)]
pub struct LievarReport {
    /// Whether `(γ′)†(Q) − γ′[Q] = 0`, the hypothesis of the identity.
    pub condition_holds: bool,
    /// `L_Q(γ)`, computed when the condition holds.
    pub lhs: Option<Vec<DiffExpr>>,
    /// `δ(Q·γ)/δu`, computed when the condition holds.
    pub rhs: Option<Vec<DiffExpr>>,
    /// Whether the two sides agree exactly.
    pub agree: Option<bool>,
}

/// Tests the hypothesis `(γ′)†(Q) = γ′[Q]` and, when it holds, verifies
/// `L_Q(γ) = δ(Q·γ)/δu`.
pub fn lievar_identity_check(
    q: &[DiffExpr],
    gamma: &[DiffExpr],
    fields: usize,
    symbols: &[NonlocalSymbol],
    mode: ResolutionMode,
) -> Result<LievarReport, OpError> {
    let gop = frechet(gamma, Space::Covector, fields)?;
    let adj_side = gop.adjoint().apply(q, symbols, mode)?;
    let (dir_side, _) = directional_vec(gamma, q, fields, symbols, mode)?;
    let condition_holds = adj_side
        .components
        .iter()
        .zip(&dir_side)
        .all(|(a, b)| a.sub(b).is_zero());
    if !condition_holds {
        return Ok(LievarReport {
            condition_holds,
            lhs: None,
            rhs: None,
            agree: None,
        });
    }
    let lhs = lie_covector(gamma, q, fields, symbols, mode)?.value;
    let mut density = DiffExpr::zero();
    for (qi, gi) in q.iter().zip(gamma) {
        density = density.add(&qi.mul(gi));
    }
    let rhs = euler(&density, fields)?;
    let agree = lhs.iter().zip(&rhs).all(|(a, b)| a.sub(b).is_zero());
    Ok(LievarReport {
        condition_holds,
        lhs: Some(lhs),
        rhs: Some(rhs),
        agree: Some(agree),
    })
}
