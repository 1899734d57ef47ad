//! Exact symbolic calculus for weakly nonlocal Hamiltonian and
//! symplectic operators in one space dimension.
//!
//! The crate is layered bottom-up:
//!
//! - [`ring`]: rational-coefficient differential algebra on jet space
//!   with declared algebraic constants and nonlocal symbols,
//! - [`varcalc`]: variational calculus (Euler operators, homotopy
//!   antiderivatives, Fréchet derivatives, exactness decisions),
//! - [`opalg`]: weakly nonlocal pseudodifferential operators and their
//!   composition, adjoint, and normal form,
//! - [`geom`]: vectors, covectors, Lie derivatives, and the Schouten
//!   and symplectic trilinear forms,
//! - [`certify`]: certificate-producing checks for symplectic,
//!   Hamiltonian, and hydrodynamic-type structures.

pub mod certify;
pub mod geom;
pub mod linalg;
pub mod opalg;
pub mod ring;
pub mod varcalc;
