//! Weakly nonlocal matrix pseudodifferential operators.
//!
//! An operator is a differential part Σ_p h_p·D^p with matrix
//! coefficients plus finitely many rank-one nonlocal tails f⊗D⁻¹∘g,
//! acting on a vector h by v ↦ D⁻¹(g·v)·f. The generalized Leibniz rule
//!
//!   a·D^i ∘ b·D^j = a·Σ_q C(i,q)·D^q(b)·D^{i+j−q}   (valid for i < 0)
//!
//! drives composition and truncated expansion. Composition stays in the
//! class exactly when every tail–tail middle product g·h is a total
//! derivative; otherwise it is rejected.

mod series;

pub use series::{expand_truncated, invert_truncated, TruncatedSeries};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::linalg::{matrix_det, SpanOutcome, SpanReduce};
use crate::ring::{DiffExpr, KNum, NonlocalSymbol, RingError};
use crate::varcalc::{resolve_dinv, ResolutionMode, VarError};

/// The space a slot of an operator lives in: vectors (flows) or
/// covectors (gradients).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Vector,
    Covector,
}

impl Space {
    pub fn dual(self) -> Space {
        match self {
            Space::Vector => Space::Covector,
            Space::Covector => Space::Vector,
        }
    }
}

/// Input and output spaces of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variance {
    pub input: Space,
    pub output: Space,
}

impl Variance {
    /// Covectors to vectors, the Hamiltonian-operator shape.
    pub fn hamiltonian() -> Self {
        Variance { input: Space::Covector, output: Space::Vector }
    }

    /// Vectors to covectors, the symplectic-operator shape.
    pub fn symplectic() -> Self {
        Variance { input: Space::Vector, output: Space::Covector }
    }

    /// Vectors to vectors, the recursion-operator shape.
    pub fn recursion() -> Self {
        Variance { input: Space::Vector, output: Space::Vector }
    }

    /// Covectors to covectors, adjoint to a recursion operator.
    pub fn corecursion() -> Self {
        Variance { input: Space::Covector, output: Space::Covector }
    }

    /// The variance of the formal adjoint.
    pub fn dual(self) -> Self {
        Variance { input: self.output.dual(), output: self.input.dual() }
    }
}

/// A rank-one nonlocal term f⊗D⁻¹∘g.
#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub left: Vec<DiffExpr>,
    pub right: Vec<DiffExpr>,
}

impl Tail {
    pub fn new(left: Vec<DiffExpr>, right: Vec<DiffExpr>) -> Self {
        Tail { left, right }
    }

    pub fn is_zero(&self) -> bool {
        self.left.iter().all(|e| e.is_zero()) || self.right.iter().all(|e| e.is_zero())
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum OpError {
    #[error("operator shapes are incompatible: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
    #[error("operator variances are incompatible")]
    VarianceMismatch,
    #[error("composition leaves the weakly nonlocal class: middle density is not exact")]
    NotWeaklyNonlocal { middle: DiffExpr },
    #[error("leading coefficient matrix is singular")]
    NotInvertible,
    #[error(transparent)]
    Var(#[from] VarError),
    #[error("ring error: {0}")]
    Ring(#[from] RingError),
}

/// The result of applying an operator to a vector.
#[derive(Clone, Debug)]
pub struct Applied {
    pub components: Vec<DiffExpr>,
    pub introduced: Vec<NonlocalSymbol>,
}

/// Structural summary of an operator in normal form.
#[derive(Clone, Debug)]
pub struct SeriesProfile {
    pub degree: Option<i64>,
    pub leading: Vec<Vec<DiffExpr>>,
    pub nondegenerate: bool,
    pub formally_skew: bool,
}

/// A weakly nonlocal matrix pseudodifferential operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PDOperator {
    fields: usize,
    rows: usize,
    cols: usize,
    variance: Variance,
    diff: Vec<Vec<BTreeMap<u32, DiffExpr>>>,
    tails: Vec<Tail>,
}

impl PDOperator {
    pub fn new(fields: usize, rows: usize, cols: usize, variance: Variance) -> Self {
        PDOperator {
            fields,
            rows,
            cols,
            variance,
            diff: vec![vec![BTreeMap::new(); cols]; rows],
            tails: Vec::new(),
        }
    }

    /// The n×n identity (D⁰ with unit matrix coefficient).
    pub fn identity(fields: usize, n: usize, variance: Variance) -> Self {
        let mut op = PDOperator::new(fields, n, n, variance);
        for i in 0..n {
            op.add_coeff(i, i, 0, &DiffExpr::one());
        }
        op
    }

    /// The scalar multiple c·D^p of the identity.
    pub fn diagonal_d(fields: usize, n: usize, power: u32, variance: Variance) -> Self {
        let mut op = PDOperator::new(fields, n, n, variance);
        for i in 0..n {
            op.add_coeff(i, i, power, &DiffExpr::one());
        }
        op
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn with_variance(&self, variance: Variance) -> PDOperator {
        let mut op = self.clone();
        op.variance = variance;
        op
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    pub fn diff_entry(&self, i: usize, j: usize) -> &BTreeMap<u32, DiffExpr> {
        &self.diff[i][j]
    }

    pub fn coeff(&self, i: usize, j: usize, power: u32) -> DiffExpr {
        self.diff[i][j].get(&power).cloned().unwrap_or_else(DiffExpr::zero)
    }

    pub fn add_coeff(&mut self, i: usize, j: usize, power: u32, e: &DiffExpr) {
        let entry = self.diff[i][j].entry(power).or_insert_with(DiffExpr::zero);
        *entry = entry.add(e);
        if entry.is_zero() {
            self.diff[i][j].remove(&power);
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, power: u32, e: DiffExpr) {
        if e.is_zero() {
            self.diff[i][j].remove(&power);
        } else {
            self.diff[i][j].insert(power, e);
        }
    }

    pub fn add_tail(&mut self, tail: Tail) {
        assert_eq!(tail.left.len(), self.rows, "tail left length");
        assert_eq!(tail.right.len(), self.cols, "tail right length");
        if !tail.is_zero() {
            self.tails.push(tail);
        }
    }

    /// Highest power of D in the differential part.
    pub fn max_order(&self) -> Option<u32> {
        self.diff
            .iter()
            .flatten()
            .flat_map(|e| e.keys().copied())
            .max()
    }

    pub fn is_diff_only(&self) -> bool {
        self.tails.is_empty()
    }

    /// Every nonlocal symbol appearing in any coefficient.
    pub fn omega_universe(&self) -> BTreeSet<NonlocalSymbol> {
        let mut out = BTreeSet::new();
        for e in self.exprs() {
            out.extend(e.omega_symbols());
        }
        out
    }

    fn exprs(&self) -> impl Iterator<Item = &DiffExpr> {
        self.diff
            .iter()
            .flatten()
            .flat_map(|e| e.values())
            .chain(self.tails.iter().flat_map(|t| t.left.iter().chain(t.right.iter())))
    }

    /// Applies `f` to every coefficient, including tail components.
    pub fn try_map_exprs<E>(
        &self,
        mut f: impl FnMut(&DiffExpr) -> Result<DiffExpr, E>,
    ) -> Result<PDOperator, E> {
        let mut out = PDOperator::new(self.fields, self.rows, self.cols, self.variance);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (p, e) in &self.diff[i][j] {
                    out.add_coeff(i, j, *p, &f(e)?);
                }
            }
        }
        for t in &self.tails {
            let left = t.left.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
            let right = t.right.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
            let tail = Tail::new(left, right);
            if !tail.is_zero() {
                out.tails.push(tail);
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &PDOperator) -> Result<(), OpError> {
        if self.rows != other.rows || self.cols != other.cols || self.fields != other.fields {
            return Err(OpError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        if self.variance != other.variance {
            return Err(OpError::VarianceMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &PDOperator) -> Result<PDOperator, OpError> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (p, e) in &other.diff[i][j] {
                    out.add_coeff(i, j, *p, e);
                }
            }
        }
        out.tails.extend(other.tails.iter().cloned());
        Ok(out)
    }

    pub fn neg(&self) -> PDOperator {
        let mut out = self.clone();
        for row in &mut out.diff {
            for entry in row {
                for e in entry.values_mut() {
                    *e = e.neg();
                }
            }
        }
        for t in &mut out.tails {
            for e in &mut t.left {
                *e = e.neg();
            }
        }
        out
    }

    pub fn sub(&self, other: &PDOperator) -> Result<PDOperator, OpError> {
        self.add(&other.neg())
    }

    pub fn scale_knum(&self, k: &KNum) -> PDOperator {
        if k.is_zero() {
            return PDOperator::new(self.fields, self.rows, self.cols, self.variance);
        }
        let mut out = self.clone();
        for row in &mut out.diff {
            for entry in row {
                for e in entry.values_mut() {
                    *e = e.scale_knum(k);
                }
            }
        }
        for t in &mut out.tails {
            for e in &mut t.left {
                *e = e.scale_knum(k);
            }
        }
        out
    }

    /// Left multiplication by a function: (c·A)(v) = c·A(v).
    pub fn scale_expr(&self, c: &DiffExpr) -> PDOperator {
        if c.is_zero() {
            return PDOperator::new(self.fields, self.rows, self.cols, self.variance);
        }
        let mut out = self.clone();
        for row in &mut out.diff {
            for entry in row {
                for e in entry.values_mut() {
                    *e = e.mul(c);
                }
            }
        }
        for t in &mut out.tails {
            for e in &mut t.left {
                *e = e.mul(c);
            }
        }
        out
    }

    /// Σ kᵢ·Aᵢ over operators of identical shape and variance.
    pub fn linear_combine(terms: &[(KNum, &PDOperator)]) -> Result<PDOperator, OpError> {
        let (k0, a0) = terms.first().expect("at least one term");
        let mut out = a0.scale_knum(k0);
        for (k, a) in &terms[1..] {
            out = out.add(&a.scale_knum(k))?;
        }
        Ok(out)
    }

    /// Applies the differential part alone to a vector.
    fn apply_diff(&self, v: &[DiffExpr]) -> Vec<DiffExpr> {
        assert_eq!(v.len(), self.cols, "vector length");
        let mut out = vec![DiffExpr::zero(); self.rows];
        for i in 0..self.rows {
            for (j, vj) in v.iter().enumerate() {
                for (p, a) in &self.diff[i][j] {
                    out[i] = out[i].add(&a.mul(&vj.total_derivative_n(*p)));
                }
            }
        }
        out
    }

    /// Applies the operator to a vector, resolving tail integrals.
    pub fn apply(
        &self,
        v: &[DiffExpr],
        symbols: &[NonlocalSymbol],
        mode: ResolutionMode,
    ) -> Result<Applied, OpError> {
        let mut components = self.apply_diff(v);
        let mut introduced = Vec::new();
        let mut universe: Vec<NonlocalSymbol> = self.omega_universe().into_iter().collect();
        for s in symbols {
            if !universe.contains(s) {
                universe.push(s.clone());
            }
        }
        for e in v {
            for s in e.omega_symbols() {
                if !universe.contains(&s) {
                    universe.push(s);
                }
            }
        }
        for t in &self.tails {
            let mut s = DiffExpr::zero();
            for (g, vj) in t.right.iter().zip(v) {
                s = s.add(&g.mul(vj));
            }
            if s.is_zero() {
                continue;
            }
            let r = resolve_dinv(&s, self.fields, &universe, mode)?;
            if let Some(sym) = &r.introduced {
                universe.push(sym.clone());
                introduced.push(sym.clone());
            }
            for (i, f) in t.left.iter().enumerate() {
                components[i] = components[i].add(&f.mul(&r.value));
            }
        }
        Ok(Applied { components, introduced })
    }

    /// The formal adjoint: (a·D^p)† = (−1)^p·D^p∘a and
    /// (f⊗D⁻¹∘g)† = −g⊗D⁻¹∘f.
    pub fn adjoint(&self) -> PDOperator {
        let mut out = PDOperator::new(self.fields, self.cols, self.rows, self.variance.dual());
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (p, a) in &self.diff[i][j] {
                    for t in 0..=*p {
                        let mut c = a.total_derivative_n(t).scale_rational(&crate::varcalc::binom(*p, t));
                        if p % 2 == 1 {
                            c = c.neg();
                        }
                        out.add_coeff(j, i, p - t, &c);
                    }
                }
            }
        }
        for t in &self.tails {
            out.add_tail(Tail::new(
                t.right.iter().map(|e| e.neg()).collect(),
                t.left.clone(),
            ));
        }
        out
    }

    /// Composition self∘other (apply `other` first). Tail–tail products
    /// require the middle density to be exact.
    pub fn compose(&self, other: &PDOperator) -> Result<PDOperator, OpError> {
        self.compose_with_symbols(other, &[])
    }

    pub fn compose_with_symbols(
        &self,
        other: &PDOperator,
        extra: &[NonlocalSymbol],
    ) -> Result<PDOperator, OpError> {
        if self.cols != other.rows || self.fields != other.fields {
            return Err(OpError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        if self.variance.input != other.variance.output {
            return Err(OpError::VarianceMismatch);
        }
        let variance = Variance { input: other.variance.input, output: self.variance.output };
        let mut out = PDOperator::new(self.fields, self.rows, other.cols, variance);
        let mut universe: Vec<NonlocalSymbol> = {
            let mut set = self.omega_universe();
            set.extend(other.omega_universe());
            set.extend(extra.iter().cloned());
            set.into_iter().collect()
        };
        universe.dedup();

        // Differential ∘ differential.
        for i in 0..self.rows {
            for k in 0..self.cols {
                for (p, a) in &self.diff[i][k] {
                    for j in 0..other.cols {
                        for (q, b) in &other.diff[k][j] {
                            for t in 0..=*p {
                                let c = a
                                    .mul(&b.total_derivative_n(t))
                                    .scale_rational(&crate::varcalc::binom(*p, t));
                                out.add_coeff(i, j, p + q - t, &c);
                            }
                        }
                    }
                }
            }
        }

        // Differential ∘ tail: all derivatives on the tail's left vector
        // produce a new tail; the terms where D⁻¹ is consumed are local.
        for tail in &other.tails {
            for i in 0..self.rows {
                for (k, f) in tail.left.iter().enumerate() {
                    for (p, a) in &self.diff[i][k] {
                        for t in 0..*p {
                            let base = a
                                .mul(&f.total_derivative_n(t))
                                .scale_rational(&crate::varcalc::binom(*p, t));
                            let rem = p - 1 - t;
                            for (j, g) in tail.right.iter().enumerate() {
                                for s in 0..=rem {
                                    let c = base
                                        .mul(&g.total_derivative_n(s))
                                        .scale_rational(&crate::varcalc::binom(rem, s));
                                    out.add_coeff(i, j, rem - s, &c);
                                }
                            }
                        }
                    }
                }
            }
            out.tails.push(Tail::new(self.apply_diff(&tail.left), tail.right.clone()));
        }

        // Tail ∘ differential: D⁻¹∘c∘D^q = c·D^{q−1} − D⁻¹∘D(c)∘D^{q−1}.
        for tail in &self.tails {
            let mut residual = vec![DiffExpr::zero(); other.cols];
            for j in 0..other.cols {
                let mut row: BTreeMap<u32, DiffExpr> = BTreeMap::new();
                for (k, g) in tail.right.iter().enumerate() {
                    if g.is_zero() {
                        continue;
                    }
                    for (q, b) in &other.diff[k][j] {
                        let entry = row.entry(*q).or_insert_with(DiffExpr::zero);
                        *entry = entry.add(&g.mul(b));
                    }
                }
                for (q, c) in row {
                    let (locals, res) = dinv_compose(&c, q);
                    residual[j] = residual[j].add(&res);
                    for (power, loc) in locals {
                        for (i, f) in tail.left.iter().enumerate() {
                            out.add_coeff(i, j, power, &f.mul(&loc));
                        }
                    }
                }
            }
            out.tails.push(Tail::new(tail.left.clone(), residual));
        }

        // Tail ∘ tail: with g·h = D(σ),
        // (f⊗D⁻¹∘g)∘(h⊗D⁻¹∘k) = (σ·f)⊗D⁻¹∘k − f⊗D⁻¹∘(σ·k).
        for s_tail in &self.tails {
            for t_tail in &other.tails {
                let mut middle = DiffExpr::zero();
                for (g, h) in s_tail.right.iter().zip(&t_tail.left) {
                    middle = middle.add(&g.mul(h));
                }
                if middle.is_zero() {
                    continue;
                }
                let sigma = match resolve_dinv(
                    &middle,
                    self.fields,
                    &universe,
                    ResolutionMode::Strict,
                ) {
                    Ok(r) => r.value,
                    Err(VarError::Irreducible { .. }) => {
                        return Err(OpError::NotWeaklyNonlocal { middle })
                    }
                    Err(e) => return Err(e.into()),
                };
                out.tails.push(Tail::new(
                    s_tail.left.iter().map(|f| f.mul(&sigma)).collect(),
                    t_tail.right.clone(),
                ));
                out.tails.push(Tail::new(
                    s_tail.left.clone(),
                    t_tail.right.iter().map(|k| k.mul(&sigma).neg()).collect(),
                ));
            }
        }
        out.normal_form()
    }

    /// Canonical form: zero coefficients pruned, tail rights reduced to a
    /// linearly independent set over constants, proportional lefts merged.
    pub fn normal_form(&self) -> Result<PDOperator, OpError> {
        let mut out = self.clone();
        for row in &mut out.diff {
            for entry in row {
                entry.retain(|_, e| !e.is_zero());
            }
        }
        let tails = std::mem::take(&mut out.tails);
        let mut span = SpanReduce::new(self.cols);
        let mut kept: Vec<Tail> = Vec::new();
        for t in tails {
            if t.is_zero() {
                continue;
            }
            match span.insert(&t.right).map_err(OpError::Ring)? {
                SpanOutcome::Independent => kept.push(t),
                SpanOutcome::Dependent(c) => {
                    for (idx, ci) in c.iter().enumerate() {
                        if ci.is_zero() {
                            continue;
                        }
                        for (li, l) in t.left.iter().enumerate() {
                            kept[idx].left[li] = kept[idx].left[li].add(&l.scale_knum(ci));
                        }
                    }
                }
            }
        }
        let mut reps: Vec<Tail> = Vec::new();
        for t in kept {
            if t.is_zero() {
                continue;
            }
            let mut merged = false;
            for r in reps.iter_mut() {
                let mut single = SpanReduce::new(self.rows);
                single.insert(&r.left).map_err(OpError::Ring)?;
                if let Some(c) = single.try_express(&t.left).map_err(OpError::Ring)? {
                    for (ri, g) in t.right.iter().enumerate() {
                        r.right[ri] = r.right[ri].add(&g.scale_knum(&c[0]));
                    }
                    merged = true;
                    break;
                }
            }
            if !merged {
                reps.push(t);
            }
        }
        reps.retain(|t| !t.is_zero());
        out.tails = reps;
        Ok(out)
    }

    /// Whether the operator is zero (sound for normal forms: tails with
    /// independent rights and nonzero lefts cannot cancel).
    pub fn is_zero(&self) -> Result<bool, OpError> {
        let nf = self.normal_form()?;
        Ok(nf.diff.iter().flatten().all(|e| e.is_empty()) && nf.tails.is_empty())
    }

    /// Exact equality as operators (same shape and variance required).
    pub fn equals(&self, other: &PDOperator) -> Result<bool, OpError> {
        if self.check_same_shape(other).is_err() {
            return Ok(false);
        }
        self.sub(other)?.is_zero()
    }

    /// Degree, leading coefficient, nondegeneracy, and formal skewness.
    pub fn series_profile(&self) -> Result<SeriesProfile, OpError> {
        let nf = self.normal_form()?;
        let order = nf.max_order();
        let (degree, leading) = match order {
            Some(p) => {
                let m: Vec<Vec<DiffExpr>> = (0..nf.rows)
                    .map(|i| (0..nf.cols).map(|j| nf.coeff(i, j, p)).collect())
                    .collect();
                (Some(p as i64), m)
            }
            None if !nf.tails.is_empty() => {
                let mut m = vec![vec![DiffExpr::zero(); nf.cols]; nf.rows];
                for t in &nf.tails {
                    for (i, f) in t.left.iter().enumerate() {
                        for (j, g) in t.right.iter().enumerate() {
                            m[i][j] = m[i][j].add(&f.mul(g));
                        }
                    }
                }
                (Some(-1), m)
            }
            None => (None, vec![vec![DiffExpr::zero(); nf.cols]; nf.rows]),
        };
        let nondegenerate = if nf.rows == nf.cols && degree.is_some() {
            !matrix_det(&leading).map_err(OpError::Ring)?.is_zero()
        } else {
            false
        };
        let formally_skew = if nf.rows == nf.cols {
            let flipped = nf.adjoint().with_variance(nf.variance);
            nf.add(&flipped)?.is_zero()?
        } else {
            false
        };
        Ok(SeriesProfile { degree, leading, nondegenerate, formally_skew })
    }
}

/// D⁻¹∘c∘D^q split into local terms and a residual right coefficient:
/// the expansion terminates because each step lowers q.
pub(crate) fn dinv_compose(c: &DiffExpr, q: u32) -> (Vec<(u32, DiffExpr)>, DiffExpr) {
    if q == 0 {
        return (Vec::new(), c.clone());
    }
    let mut locals = vec![(q - 1, c.clone())];
    let (rest, res) = dinv_compose(&c.total_derivative().neg(), q - 1);
    locals.extend(rest);
    (locals, res)
}
