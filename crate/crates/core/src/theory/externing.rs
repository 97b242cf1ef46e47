use std::collections::HashMap;
use std::fmt;

use crate::algebra::{Sort, Term};
use crate::error::{Error, Result};
use crate::grammar::{
    enumerate, heights_liquid, is_deterministic, Alternative, NtId, Symbol, TreeGrammar, Weights,
};

use super::BehaviorGrammar;

/// A ground rewrite rule: an alternative instantiated with normal forms,
/// pointing at its class's normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// One innermost rewrite, as whole terms before and after.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub before: Term,
    pub after: Term,
    pub path: Vec<usize>,
    pub rule: RewriteRule,
}

/// The behavior grammar read as a ground rewrite system: one normal form
/// per class and one equation per alternative.
#[derive(Clone, Debug)]
pub struct ExternResult {
    normal_forms: Vec<Term>,
    sorts: Vec<Sort>,
    /// `(head, NF(head) = alternative over normal forms)` for every
    /// alternative, trivial ones included.
    rules: Vec<(NtId, RewriteRule)>,
    lookup: HashMap<(Symbol, Vec<NtId>), NtId>,
}

/// Externs a deterministic behavior grammar. Normal forms are the first
/// members of each class in enumeration order: lowest height, then size,
/// then lexicographic.
pub fn extern_grammar(bg: &BehaviorGrammar) -> Result<ExternResult> {
    extern_deterministic(bg.grammar())
}

pub(crate) fn extern_deterministic(g: &TreeGrammar) -> Result<ExternResult> {
    if !is_deterministic(g) {
        let shared = g
            .expanded_heads()
            .into_iter()
            .find(|(_, heads)| heads.len() > 1)
            .map(|((sym, _), heads)| {
                let names: Vec<&str> = heads.iter().map(|h| g.name(*h)).collect();
                format!("`{sym}` alternative shared by {}", names.join(", "))
            })
            .unwrap_or_default();
        return Err(Error::NondeterministicGrammar(shared));
    }
    let hm = heights_liquid(g, &Weights::default());
    let mut normal_forms = Vec::with_capacity(g.nonterminals().len());
    for n in g.ids() {
        let h = hm.get(n).finite().ok_or_else(|| {
            Error::Invalid(format!("class {} is empty", g.name(n)))
        })?;
        let first = enumerate(g, n, &hm, h, 1)?;
        let t = first
            .first()
            .and_then(|t| t.to_term())
            .ok_or_else(|| Error::Invalid(format!("class {} has no term", g.name(n))))?;
        normal_forms.push(t);
    }
    let mut rules = Vec::new();
    let mut lookup = HashMap::new();
    for head in g.ids() {
        for alt in g.rule(head) {
            let Alternative::Func(sym, args) = alt else {
                return Err(Error::Invalid("chain alternative in a behavior grammar".into()));
            };
            let args_nf: Vec<Term> = args.iter().map(|a| normal_forms[a.0].clone()).collect();
            let lhs = match sym {
                Symbol::Op(f) => Term::App(f.clone(), args_nf),
                Symbol::Var(v) => Term::Var(v.clone()),
                other => {
                    return Err(Error::Invalid(format!("symbol {other} outside the term fragment")))
                }
            };
            rules.push((
                head,
                RewriteRule {
                    lhs,
                    rhs: normal_forms[head.0].clone(),
                },
            ));
            lookup.insert((sym.clone(), args.clone()), head);
        }
    }
    Ok(ExternResult {
        normal_forms,
        sorts: g.nonterminals().iter().map(|n| n.sort.clone()).collect(),
        rules,
        lookup,
    })
}

impl ExternResult {
    pub fn normal_form(&self, class: NtId) -> &Term {
        &self.normal_forms[class.0]
    }

    pub fn normal_forms(&self) -> &[Term] {
        &self.normal_forms
    }

    pub fn sort(&self, class: NtId) -> &Sort {
        &self.sorts[class.0]
    }

    pub fn rules(&self) -> &[(NtId, RewriteRule)] {
        &self.rules
    }

    /// Nontrivial ground equations `NF(head) = alternative`, with their
    /// class.
    pub fn equations(&self) -> impl Iterator<Item = (NtId, &Term, &Term)> {
        self.rules
            .iter()
            .filter(|(_, r)| r.lhs != r.rhs)
            .map(|(h, r)| (*h, &r.rhs, &r.lhs))
    }

    /// Class of `t` by bottom-up lookup.
    pub fn class_of(&self, t: &Term) -> Result<NtId> {
        let (sym, args) = match t {
            Term::Var(v) => (Symbol::Var(v.clone()), Vec::new()),
            Term::App(f, args) => (
                Symbol::Op(f.clone()),
                args.iter().map(|a| self.class_of(a)).collect::<Result<Vec<_>>>()?,
            ),
        };
        self.lookup
            .get(&(sym, args))
            .copied()
            .ok_or_else(|| Error::OutOfFragment(format!("{t} is not a term over the tuple")))
    }

    pub fn normalize(&self, t: &Term) -> Result<Term> {
        Ok(self.normal_form(self.class_of(t)?).clone())
    }

    /// Innermost, left-to-right rewriting to the normal form, recording
    /// every step.
    pub fn normalize_with_trace(&self, t: &Term) -> Result<(Term, Vec<RewriteStep>)> {
        let mut whole = t.clone();
        let mut steps = Vec::new();
        self.walk(t, &mut Vec::new(), &mut whole, &mut steps)?;
        Ok((whole, steps))
    }

    fn walk(
        &self,
        t: &Term,
        path: &mut Vec<usize>,
        whole: &mut Term,
        steps: &mut Vec<RewriteStep>,
    ) -> Result<NtId> {
        let (sym, classes) = match t {
            Term::Var(v) => (Symbol::Var(v.clone()), Vec::new()),
            Term::App(f, args) => {
                let mut classes = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    classes.push(self.walk(a, path, whole, steps)?);
                    path.pop();
                }
                (Symbol::Op(f.clone()), classes)
            }
        };
        let class = self
            .lookup
            .get(&(sym, classes))
            .copied()
            .ok_or_else(|| Error::OutOfFragment(format!("{t} is not a term over the tuple")))?;
        let nf = &self.normal_forms[class.0];
        let slot = whole.at_mut(path).expect("path into the rewritten term");
        if slot != nf {
            let lhs = slot.clone();
            let before = whole.clone();
            *whole.at_mut(path).unwrap() = nf.clone();
            steps.push(RewriteStep {
                before,
                after: whole.clone(),
                path: path.clone(),
                rule: RewriteRule {
                    lhs,
                    rhs: nf.clone(),
                },
            });
        }
        Ok(class)
    }
}
