//! Regular tree grammars for the quantified equational theories of finite
//! many-sorted algebras.
//!
//! Given finite algebras and a tuple of variables, the crate builds a
//! grammar of every valid formula `Q : t₁ = t₂` over that tuple, turns the
//! universal part into a ground rewrite system with chosen normal forms,
//! extracts finite axiom sets, enumerates terms consistent with
//! input/output examples, and answers entailment queries against a class
//! of prototype algebras.

pub mod algebra;
pub mod barzdin;
pub mod error;
pub mod grammar;
pub mod prototype;
pub mod syntax;
pub mod theory;

pub use algebra::{
    check_admitted, eval, falsify, sat, sat_class, Assignment, Elem, FiniteAlgebra, Formula,
    Name, Prefix, Quantifier, Signature, Sort, Structure, SymbolDecl, Term, Var, VariableTuple,
};
pub use error::{Error, ParseError, Result};
