//! Deciding entailment from a theory by testing a finite class of
//! prototype algebras, with the axiom obligations that justify it exported
//! for an external prover.

use std::fmt;

use crate::algebra::{check_admitted, falsify, sat, FiniteAlgebra, Formula, Var, VariableTuple};
use crate::error::{Error, Result};
use crate::theory::{build_axioms_capped, into_fragment, AxiomSet};

/// Trust state of the premise that the theory implies the obligations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObligationStatus {
    Unverified,
    Assumed,
    ExternallyVerified,
}

impl fmt::Display for ObligationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObligationStatus::Unverified => "unverified",
            ObligationStatus::Assumed => "assumed",
            ObligationStatus::ExternallyVerified => "externally-verified",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PrototypeSetup {
    algebras: Vec<FiniteAlgebra>,
    theory: Vec<Formula>,
    tuple: VariableTuple,
    obligations: AxiomSet,
    status: ObligationStatus,
}

/// A falsifying algebra (by position) and assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub algebra: usize,
    pub assignment: Vec<(Var, String)>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.assignment.is_empty() {
            return f.write_str("(no assignment)");
        }
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|(v, e)| format!("{} ↦ {e}", v.name))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

fn witness(algs: &[FiniteAlgebra], phi: &Formula) -> Result<Option<Witness>> {
    for (i, a) in algs.iter().enumerate() {
        if let Some(choice) = falsify(a, phi)? {
            return Ok(Some(Witness {
                algebra: i,
                assignment: choice
                    .into_iter()
                    .map(|(v, e)| {
                        let name = a.element_name(&v.sort, e).to_string();
                        (v, name)
                    })
                    .collect(),
            }));
        }
    }
    Ok(None)
}

pub fn setup_prototype(
    algs: &[FiniteAlgebra],
    theory: &[Formula],
    tuple: &VariableTuple,
) -> Result<PrototypeSetup> {
    setup_prototype_capped(algs, theory, tuple, None)
}

/// Checks that every algebra is admitted and satisfies the theory, then
/// attaches the axiom obligations for `tuple`.
pub fn setup_prototype_capped(
    algs: &[FiniteAlgebra],
    theory: &[Formula],
    tuple: &VariableTuple,
    cap: Option<usize>,
) -> Result<PrototypeSetup> {
    let first = algs
        .first()
        .ok_or_else(|| Error::Invalid("at least one algebra is required".into()))?;
    for (i, a) in algs.iter().enumerate() {
        if a.signature() != first.signature() {
            return Err(Error::SignatureMismatch);
        }
        if !check_admitted(a) {
            return Err(Error::NotAdmitted(format!("algebra {i} differs on the fixed fragment")));
        }
    }
    for phi in theory {
        if let Some(w) = witness(algs, phi)? {
            return Err(Error::TheoryFails {
                formula: phi.to_string(),
                algebra: w.algebra,
                witness: w.to_string(),
            });
        }
    }
    let obligations = build_axioms_capped(algs, tuple, cap)?;
    Ok(PrototypeSetup {
        algebras: algs.to_vec(),
        theory: theory.to_vec(),
        tuple: tuple.clone(),
        obligations,
        status: ObligationStatus::Unverified,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub formula: Formula,
    pub entailed: bool,
    pub witness: Option<Witness>,
    pub status: ObligationStatus,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entailed {
            write!(f, "entailed: {}", self.formula)?;
        } else {
            write!(f, "not entailed: {}", self.formula)?;
        }
        if let Some(w) = &self.witness {
            write!(f, "\n  witness: algebra {}: {w}", w.algebra)?;
        }
        if self.status == ObligationStatus::Unverified {
            write!(
                f,
                "\n  note: obligations are unverified; the verdict holds once the theory is shown to imply them"
            )?;
        }
        Ok(())
    }
}

impl PrototypeSetup {
    pub fn algebras(&self) -> &[FiniteAlgebra] {
        &self.algebras
    }

    pub fn theory(&self) -> &[Formula] {
        &self.theory
    }

    pub fn tuple(&self) -> &VariableTuple {
        &self.tuple
    }

    pub fn obligations(&self) -> &AxiomSet {
        &self.obligations
    }

    pub fn status(&self) -> ObligationStatus {
        self.status
    }

    pub fn set_status(&mut self, status: ObligationStatus) {
        self.status = status;
    }

    /// Entailed iff every prototype satisfies `phi`.
    pub fn decide(&self, phi: &Formula) -> Result<Decision> {
        let sig = self.algebras[0].signature();
        let phi = into_fragment(sig, &self.tuple, phi)?;
        let mut entailed = true;
        for a in &self.algebras {
            if !sat(a, &phi)? {
                entailed = false;
                break;
            }
        }
        let witness = if entailed {
            None
        } else {
            witness(&self.algebras, &phi)?
        };
        Ok(Decision {
            formula: phi,
            entailed,
            witness,
            status: self.status,
        })
    }

    /// The reduced obligations, universal block first. `assume` records that
    /// the caller takes them as given.
    pub fn export_obligations(&mut self, assume: bool) -> Vec<Formula> {
        if assume && self.status == ObligationStatus::Unverified {
            self.status = ObligationStatus::Assumed;
        }
        self.obligations.reduce().formulas().cloned().collect()
    }
}

pub fn decide(ps: &PrototypeSetup, phi: &Formula) -> Result<Decision> {
    ps.decide(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::tests::{A2, NAT_MOD2};
    use crate::syntax::{parse_algebra, parse_formula, parse_theory, parse_tuple};

    const GROUP: &str = "\
forall x forall y forall z : (x + y) + z = x + (y + z)
forall x forall y : x + y = y + x
forall x : x + 0 = x
forall x : x + x = 0
";

    #[test]
    fn setup_and_decide() {
        let alg = parse_algebra(A2).unwrap();
        let sig = alg.signature();
        let theory = parse_theory(sig, None, GROUP).unwrap();
        let t = parse_tuple(sig, "x:Nat,y:Nat").unwrap();
        let mut ps = setup_prototype(&[alg.clone()], &theory, &t).unwrap();
        assert_eq!(ps.status(), ObligationStatus::Unverified);

        let f = |s: &str| parse_formula(sig, Some(&t), s).unwrap();
        let d = ps.decide(&f("forall x forall y : x = (x + y) + y")).unwrap();
        assert!(d.entailed);
        assert!(d.to_string().contains("unverified"));
        let d = ps.decide(&f("forall x forall y : x + y = 0")).unwrap();
        assert!(!d.entailed);
        assert_eq!(d.witness.unwrap().to_string(), "x ↦ 0, y ↦ 1");
        assert!(ps.decide(&f("forall x forall y : x = x")).unwrap().entailed);

        let exported: Vec<String> = ps.export_obligations(true).iter().map(|f| f.to_string()).collect();
        assert!(exported.contains(&"forall x : 0 = x + x".to_string()));
        assert_eq!(ps.status(), ObligationStatus::Assumed);
        for phi in ps.export_obligations(false) {
            assert!(sat(&alg, &phi).unwrap());
        }
    }

    #[test]
    fn theory_failure_reports_witness() {
        let alg = parse_algebra(A2).unwrap();
        let sig = alg.signature();
        let t = parse_tuple(sig, "x:Nat,y:Nat").unwrap();
        let bad = parse_theory(sig, None, "forall x forall y : x = y").unwrap();
        match setup_prototype(&[alg.clone()], &bad, &t) {
            Err(Error::TheoryFails { witness, algebra: 0, .. }) => assert_eq!(witness, "x ↦ 0, y ↦ 1"),
            other => panic!("{other:?}"),
        }
        let ps = setup_prototype(&[alg.clone()], &[], &t).unwrap();
        assert!(!ps.obligations().is_empty());
        let xyz = parse_tuple(sig, "x:Nat,y:Nat,z:Nat").unwrap();
        let assoc = parse_formula(sig, Some(&xyz), "forall x forall y forall z : (x + y) + z = x + (y + z)").unwrap();
        assert!(matches!(ps.decide(&assoc), Err(Error::OutOfFragment(_))));
    }

    #[test]
    fn exports_of_small_algebras() {
        let one = parse_algebra(
            "sort Nat\nelems Nat: 0\nop 0 : -> Nat\nop + : Nat, Nat -> Nat\ntable 0 = 0\ntable + (0,0) = 0\n",
        )
        .unwrap();
        let t = parse_tuple(one.signature(), "x:Nat,y:Nat").unwrap();
        let mut ps = setup_prototype(&[one], &[], &t).unwrap();
        let shown: Vec<String> = ps.export_obligations(false).iter().map(|f| f.to_string()).collect();
        // collapse axioms only
        assert_eq!(shown, ["forall x : x = 0", "forall x in Nat forall y in Nat : x = y"]);

        let nm = parse_algebra(NAT_MOD2).unwrap();
        let t = parse_tuple(nm.signature(), "x:Nat,y:Nat").unwrap();
        let mut ps = setup_prototype(&[nm], &[], &t).unwrap();
        let shown: Vec<String> = ps.export_obligations(false).iter().map(|f| f.to_string()).collect();
        assert!(shown.contains(&"forall x forall y : (x + y) < x = (0 < x) ∧ (0 < y)".to_string()));
    }
}
