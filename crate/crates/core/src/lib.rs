//! Finite De Morgan, involutive Stone and perfect paradefinite algebras,
//! the logical matrices built on them, and analytic symmetrical calculi.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`]: signatures, formulas, the ASCII grammar, substitutions.
//! * [`algebra`]: finite algebras, the built-in catalog, equations, expansions.
//! * [`matrix`]: logical matrices, consequence, filters, Leibniz reduction.
//! * [`calculus`]: rules, proof search, derivation trees, lifting.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod matrix;
pub mod syntax;

pub use algebra::{AxiomClass, Equation, FiniteAlgebra};
pub use calculus::{Calculus, DerivationTree, ProofResult, Rule};
pub use error::{Error, Result};
pub use matrix::{Matrix, Verdict};
pub use syntax::{Connective, Formula, Signature, Substitution};
