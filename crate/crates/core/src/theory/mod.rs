//! Theorem grammars, externing into ground rewrite systems, and axiom
//! extraction.

mod axioms;
mod behavior;
mod externing;

pub use axioms::{
    build_axioms, build_axioms_capped, derive, reduce, subsumes, variety_sequence, AxiomSet,
    Derivation, Outcome, Provenance, VarietyStep,
};
pub use behavior::{
    admitted_pairs, build_behavior, build_behavior_capped, build_theorem_grammar, contains,
    into_fragment, BehaviorGrammar, Point, TheoremGrammar,
};
pub use externing::{extern_grammar, ExternResult, RewriteRule, RewriteStep};

#[cfg(test)]
mod tests;
