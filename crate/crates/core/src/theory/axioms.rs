use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{FiniteAlgebra, Formula, Prefix, Quantifier, Sort, Term, Var, VariableTuple};
use crate::error::{Error, Result};

use super::{
    build_behavior_capped, extern_grammar, into_fragment, ExternResult, RewriteStep,
    TheoremGrammar,
};

/// Everything an axiom set was extracted from; derivations only consult
/// this, so reducing the presented axioms never changes what derives.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub theorems: TheoremGrammar,
    pub externed: ExternResult,
    /// Full `E′_Q` per non-universal prefix, before any reduction.
    pub pairs: BTreeMap<Prefix, Vec<Formula>>,
}

#[derive(Clone, Debug)]
pub struct AxiomSet {
    tuple: VariableTuple,
    universal: Vec<Formula>,
    existential: BTreeMap<Prefix, Vec<Formula>>,
    reduced: bool,
    provenance: Arc<Provenance>,
}

pub fn build_axioms(algs: &[FiniteAlgebra], tuple: &VariableTuple) -> Result<AxiomSet> {
    build_axioms_capped(algs, tuple, None)
}

pub fn build_axioms_capped(
    algs: &[FiniteAlgebra],
    tuple: &VariableTuple,
    cap: Option<usize>,
) -> Result<AxiomSet> {
    AxiomSet::from_theorems(TheoremGrammar::new(build_behavior_capped(algs, tuple, cap)?)?)
}

impl AxiomSet {
    /// `E′_∀…∀` from the extern equations, `E′_Q` from admitted pairs of
    /// distinct normal forms.
    pub fn from_theorems(theorems: TheoremGrammar) -> Result<AxiomSet> {
        let bg = theorems.behavior();
        let tuple = bg.tuple().clone();
        let externed = extern_grammar(bg)?;
        let all = Prefix::universal(tuple.len());
        let universal = externed
            .equations()
            .map(|(class, nf, alt)| {
                Formula::with_prefix(&all, &tuple, nf.clone(), alt.clone(), externed.sort(class).clone())
            })
            .collect();
        let mut pairs = BTreeMap::new();
        for q in Prefix::all(tuple.len()) {
            if q.is_universal() {
                continue;
            }
            let block: Vec<Formula> = theorems
                .admitted(&q)
                .iter()
                .filter(|(a, b)| a < b)
                .map(|&(a, b)| {
                    Formula::with_prefix(
                        &q,
                        &tuple,
                        externed.normal_form(a).clone(),
                        externed.normal_form(b).clone(),
                        externed.sort(a).clone(),
                    )
                })
                .collect();
            pairs.insert(q, block);
        }
        Ok(AxiomSet {
            tuple,
            universal,
            existential: pairs.clone(),
            reduced: false,
            provenance: Arc::new(Provenance {
                theorems,
                externed,
                pairs,
            }),
        })
    }

    pub fn tuple(&self) -> &VariableTuple {
        &self.tuple
    }

    pub fn universal(&self) -> &[Formula] {
        &self.universal
    }

    pub fn existential(&self) -> &BTreeMap<Prefix, Vec<Formula>> {
        &self.existential
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Universal block first, then the existential blocks by prefix.
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.universal
            .iter()
            .chain(self.existential.values().flatten())
    }

    pub fn len(&self) -> usize {
        self.formulas().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops reflexive formulas and formulas subsumed by a shorter kept one,
    /// then removes vacuous quantifiers for presentation. A formula that
    /// an earlier block already shows (up to symmetry) after that removal
    /// is shown once.
    pub fn reduce(&self) -> AxiomSet {
        let mut seen = BTreeSet::new();
        AxiomSet {
            tuple: self.tuple.clone(),
            universal: reduce_block(&self.universal, &mut seen),
            existential: self
                .existential
                .iter()
                .map(|(q, b)| (q.clone(), reduce_block(b, &mut seen)))
                .collect(),
            reduced: true,
            provenance: self.provenance.clone(),
        }
    }

    /// Existential block with chains of equal formulas displayed as
    /// `t₁ = t₂ = …` per group of pairwise-equal normal forms.
    pub fn chained(&self, prefix: &Prefix) -> Vec<String> {
        let Some(block) = self.existential.get(prefix) else {
            return Vec::new();
        };
        let mut groups: Vec<Vec<&Term>> = Vec::new();
        for phi in block {
            match groups.iter_mut().find(|g| g.contains(&&phi.lhs)) {
                Some(g) if !g.contains(&&phi.rhs) => g.push(&phi.rhs),
                Some(_) => {}
                None => groups.push(vec![&phi.lhs, &phi.rhs]),
            }
        }
        groups
            .into_iter()
            .map(|g| g.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" = "))
            .collect()
    }
}

pub fn reduce(ax: &AxiomSet) -> AxiomSet {
    ax.reduce()
}

fn reduce_block(block: &[Formula], seen: &mut BTreeSet<Formula>) -> Vec<Formula> {
    let mut sorted: Vec<&Formula> = block.iter().collect();
    sorted.sort_by_cached_key(|phi| (phi.size(), phi.to_string()));
    let mut kept: Vec<&Formula> = Vec::new();
    for phi in sorted {
        if phi.is_reflexive() || kept.iter().any(|psi| subsumes(psi, phi)) {
            continue;
        }
        kept.push(phi);
    }
    kept.into_iter()
        .map(Formula::drop_vacuous)
        .filter(|phi| {
            let fresh = !seen.contains(phi) && !seen.contains(&phi.flipped());
            seen.insert(phi.clone());
            fresh
        })
        .collect()
}

/// Whether `specific` is an instance of `general` or of its flip, under
/// the same prefix. Only universal variables are instantiated, and only by
/// terms over variables bound before the next `∃`.
pub fn subsumes(general: &Formula, specific: &Formula) -> bool {
    if general.prefix != specific.prefix || general.sort != specific.sort {
        return false;
    }
    let scope = scopes(&general.prefix);
    let try_match = |l: &Term, r: &Term| {
        let mut theta = BTreeMap::new();
        matches(l, &specific.lhs, &scope, &mut theta) && matches(r, &specific.rhs, &scope, &mut theta)
    };
    try_match(&general.lhs, &general.rhs) || try_match(&general.rhs, &general.lhs)
}

/// Per variable: `None` for existential ones, else the variables its image
/// may mention.
fn scopes(prefix: &[(Quantifier, Var)]) -> BTreeMap<&Var, Option<BTreeSet<&Var>>> {
    let mut out = BTreeMap::new();
    for (i, (q, v)) in prefix.iter().enumerate() {
        let scope = match q {
            Quantifier::Exists => None,
            Quantifier::Forall => {
                let end = prefix[i..]
                    .iter()
                    .position(|(q, _)| *q == Quantifier::Exists)
                    .map_or(prefix.len(), |p| i + p);
                Some(prefix[..end].iter().map(|(_, w)| w).collect())
            }
        };
        out.insert(v, scope);
    }
    out
}

fn matches<'a>(
    pattern: &Term,
    target: &'a Term,
    scope: &BTreeMap<&Var, Option<BTreeSet<&Var>>>,
    theta: &mut BTreeMap<Var, &'a Term>,
) -> bool {
    match pattern {
        Term::Var(u) => match scope.get(u) {
            Some(None) | None => target == pattern,
            Some(Some(allowed)) => {
                if let Some(bound) = theta.get(u) {
                    return *bound == target;
                }
                if !target.vars().iter().all(|w| allowed.contains(w)) {
                    return false;
                }
                theta.insert(u.clone(), target);
                true
            }
        },
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g && args.len() == targs.len() => args
                .iter()
                .zip(targs)
                .all(|(p, t)| matches(p, t, scope, theta)),
            _ => false,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Both sides share a normal form.
    Reflexive,
    /// The normal-form pair is an axiom of `E′_Q`.
    Axiom(Formula),
    Underivable,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub formula: Formula,
    pub lhs_steps: Vec<RewriteStep>,
    pub rhs_steps: Vec<RewriteStep>,
    pub lhs_normal: Term,
    pub rhs_normal: Term,
    pub outcome: Outcome,
}

impl Derivation {
    pub fn succeeded(&self) -> bool {
        self.outcome != Outcome::Underivable
    }
}

fn chain(f: &mut fmt::Formatter<'_>, label: &str, start: &Term, steps: &[RewriteStep]) -> fmt::Result {
    write!(f, "{label}: {start}")?;
    for s in steps {
        write!(f, "\n  -> {}    [{}]", s.after, s.rule)?;
    }
    writeln!(f)
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.formula)?;
        chain(f, "lhs", &self.formula.lhs, &self.lhs_steps)?;
        chain(f, "rhs", &self.formula.rhs, &self.rhs_steps)?;
        match &self.outcome {
            Outcome::Reflexive => write!(f, "derived: equal normal forms {}", self.lhs_normal),
            Outcome::Axiom(a) => write!(f, "derived: axiom {a}"),
            Outcome::Underivable => write!(
                f,
                "not derivable: {} = {} is not admitted under {}",
                self.lhs_normal,
                self.rhs_normal,
                self.formula.quantifiers()
            ),
        }
    }
}

/// Normalizes both sides and closes with reflexivity or an `E′_Q` axiom.
pub fn derive(ax: &AxiomSet, phi: &Formula) -> Result<Derivation> {
    let prov = ax.provenance();
    let sig = prov.theorems.behavior().signature();
    let phi = into_fragment(sig, &ax.tuple, phi)?;
    let (lhs_normal, lhs_steps) = prov.externed.normalize_with_trace(&phi.lhs)?;
    let (rhs_normal, rhs_steps) = prov.externed.normalize_with_trace(&phi.rhs)?;
    let q = phi.quantifiers();
    let outcome = if lhs_normal == rhs_normal {
        Outcome::Reflexive
    } else {
        prov.pairs
            .get(&q)
            .and_then(|block| {
                block.iter().find(|a| {
                    (a.lhs == lhs_normal && a.rhs == rhs_normal)
                        || (a.lhs == rhs_normal && a.rhs == lhs_normal)
                })
            })
            .map_or(Outcome::Underivable, |a| Outcome::Axiom(a.clone()))
    };
    Ok(Derivation {
        formula: phi,
        lhs_steps,
        rhs_steps,
        lhs_normal,
        rhs_normal,
        outcome,
    })
}

/// One step of the growing-tuple sequence of universal fragments.
#[derive(Clone, Debug)]
pub struct VarietyStep {
    pub tuple: VariableTuple,
    pub axioms: Vec<Formula>,
    /// Previous step's axioms that a different new axiom subsumes.
    pub subsumed: Vec<(Formula, Formula)>,
}

/// Universal axioms for `x1`, `x1,x2`, …, with `xᵢ` of sort `sorts[i-1]`.
pub fn variety_sequence(
    algs: &[FiniteAlgebra],
    sorts: &[Sort],
    cap: Option<usize>,
) -> Result<Vec<VarietyStep>> {
    if sorts.is_empty() {
        return Err(Error::Invalid("the sequence needs at least one variable".into()));
    }
    let mut out: Vec<VarietyStep> = Vec::new();
    for n in 1..=sorts.len() {
        let tuple = VariableTuple::new(
            sorts[..n]
                .iter()
                .enumerate()
                .map(|(i, s)| Var::new(format!("x{}", i + 1), s))
                .collect(),
        )?;
        let axioms = build_axioms_capped(algs, &tuple, cap)?.reduce().universal;
        let mut subsumed = Vec::new();
        if let Some(prev) = out.last() {
            for old in &prev.axioms {
                let Some(old_ext) = old.extend_to(&tuple) else {
                    continue;
                };
                let by = axioms.iter().find(|new| {
                    new.extend_to(&tuple).is_some_and(|new_ext| {
                        new_ext != old_ext && subsumes(&new_ext, &old_ext)
                    })
                });
                if let Some(by) = by {
                    subsumed.push((old.clone(), by.clone()));
                }
            }
        }
        out.push(VarietyStep {
            tuple,
            axioms,
            subsumed,
        });
    }
    Ok(out)
}
