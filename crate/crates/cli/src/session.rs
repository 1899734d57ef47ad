//! In-memory model of a session file.
//!
//! A session fixes the field list, the algebraic constants of the
//! coefficient field, the declared nonlocal variables, and a dictionary of
//! named expressions and operators.  Declarations are kept in source order
//! so the canonical printer can reproduce the file.

use wnhcalc_core::opalg::PDOperator;
use wnhcalc_core::ring::{AlgebraicConstant, DiffExpr, FieldSet, NonlocalSymbol};

/// A named expression: a scalar or a componentwise tuple.
#[derive(Clone, Debug)]
pub enum Value {
    Scalar(DiffExpr),
    Tuple(Vec<DiffExpr>),
}

impl Value {
    /// The components, viewing a scalar as a one-component tuple.
    pub fn components(&self) -> Vec<DiffExpr> {
        match self {
            Value::Scalar(e) => vec![e.clone()],
            Value::Tuple(v) => v.clone(),
        }
    }
}

/// One declaration, in source order, pointing into the per-kind tables.
#[derive(Clone, Copy, Debug)]
pub enum Decl {
    Fields,
    Const(usize),
    Nonlocal(usize),
    Expr(usize),
    Op(usize),
}

/// A parsed session: fields, constants, nonlocal variables, and named
/// expressions and operators.
#[derive(Clone, Debug)]
pub struct Session {
    pub fields: FieldSet,
    pub constants: Vec<(String, AlgebraicConstant)>,
    pub nonlocals: Vec<(String, NonlocalSymbol)>,
    pub exprs: Vec<(String, Value)>,
    pub ops: Vec<(String, PDOperator)>,
    pub decls: Vec<Decl>,
}

impl Session {
    /// Number of fields.
    pub fn n(&self) -> usize {
        self.fields.len()
    }

    /// The declared nonlocal symbols, in declaration order.
    pub fn symbols(&self) -> Vec<NonlocalSymbol> {
        self.nonlocals.iter().map(|(_, s)| s.clone()).collect()
    }

    /// The declared algebraic constants, in declaration order.
    pub fn algebraic_constants(&self) -> Vec<AlgebraicConstant> {
        self.constants.iter().map(|(_, c)| c.clone()).collect()
    }

    pub fn constant(&self, name: &str) -> Option<&AlgebraicConstant> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn nonlocal(&self, name: &str) -> Option<&NonlocalSymbol> {
        self.nonlocals.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn expr(&self, name: &str) -> Option<&Value> {
        self.exprs.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn op(&self, name: &str) -> Option<&PDOperator> {
        self.ops.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }

    /// Whether `name` is taken by any declaration, field names included.
    pub fn name_taken(&self, name: &str) -> bool {
        self.fields.index(name).is_some()
            || self.constant(name).is_some()
            || self.nonlocal(name).is_some()
            || self.expr(name).is_some()
            || self.op(name).is_some()
    }
}
