//! Terms consistent with input/output examples over a possibly partial
//! sample of operation facts, enumerated by increasing height.

use crate::algebra::{Assignment, Elem, Sort, Structure, Term, VariableTuple};
use crate::error::{Error, ParseError, Result};
use crate::grammar::{
    enumerate, heights_liquid, incorporate, intersect_capped, lift, product_name, restrict,
    universal_grammar, NtId, TreeGrammar, Weights,
};

/// Ground facts `f(a₁,…,aₙ) = a`; tables may be partial.
pub type BarzdinSample = Structure;

/// `σ ↦ b`: the wanted term must evaluate to `b` under `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleConstraint {
    pub assignment: Assignment,
    pub target: Elem,
}

/// Reads lines `given x=0, y=1 expect 1` against the sample's domains.
pub fn parse_constraints(
    sample: &BarzdinSample,
    vars: &VariableTuple,
    target: &Sort,
    text: &str,
) -> Result<Vec<ExampleConstraint>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let col_of = |s: &str| {
            let offset = (s.as_ptr() as usize).saturating_sub(raw.as_ptr() as usize).min(raw.len());
            raw[..offset].chars().count() + 1
        };
        let err = |s: &str, msg: String| Error::Parse(ParseError::new(line_no, col_of(s), msg));
        let body = line.trim_start();
        let Some(rest) = body.strip_prefix("given") else {
            return Err(err(body, "expected `given`".into()));
        };
        let Some(at) = rest.find("expect") else {
            return Err(err(rest, "expected `expect`".into()));
        };
        let (bindings, expect) = rest.split_at(at);
        let result = expect["expect".len()..].trim();
        if result.is_empty() {
            return Err(err(&expect["expect".len()..], "missing expected element".into()));
        }
        let mut sigma = Assignment::new();
        for b in bindings.split(',') {
            if b.trim().is_empty() {
                if bindings.trim().is_empty() {
                    break;
                }
                return Err(err(b, "empty binding".into()));
            }
            let Some((name, value)) = b.split_once('=') else {
                return Err(err(b, format!("expected `var=element`, found `{}`", b.trim())));
            };
            let var = vars
                .get(name.trim())
                .ok_or_else(|| err(name.trim_start(), format!("`{}` is not a tuple variable", name.trim())))?;
            if sigma.get(var).is_some() {
                return Err(err(name.trim_start(), format!("`{}` bound twice", name.trim())));
            }
            let index = sample
                .element_index(&var.sort, value.trim())
                .map_err(|e| err(value.trim_start(), e.to_string()))?;
            sigma.bind(
                var,
                Elem {
                    sort: var.sort.clone(),
                    index,
                },
            )?;
        }
        for v in vars.vars() {
            if sigma.get(v).is_none() {
                return Err(err(body, format!("`{}` is not bound", v.name)));
            }
        }
        let index = sample
            .element_index(target, result)
            .map_err(|e| err(result, e.to_string()))?;
        out.push(ExampleConstraint {
            assignment: sigma,
            target: Elem {
                sort: target.clone(),
                index,
            },
        });
    }
    Ok(out)
}

/// The grammar of `{t ∈ T(Σ, S₀, V) | σᵢ t = bᵢ for all i}` and its target
/// nonterminal, which has no alternatives when no term qualifies.
pub fn consistent_terms(
    sample: &BarzdinSample,
    constraints: &[ExampleConstraint],
    target: &Sort,
    vars: &VariableTuple,
) -> Result<(TreeGrammar, NtId)> {
    consistent_terms_capped(sample, constraints, target, vars, None)
}

pub fn consistent_terms_capped(
    sample: &BarzdinSample,
    constraints: &[ExampleConstraint],
    target: &Sort,
    vars: &VariableTuple,
    cap: Option<usize>,
) -> Result<(TreeGrammar, NtId)> {
    let sig = sample.signature();
    if !sig.has_sort(target) {
        return Err(Error::UnknownSort(target.to_string()));
    }
    for c in constraints {
        if &c.target.sort != target {
            return Err(Error::SortMismatch {
                context: "constraint target".into(),
                expected: target.to_string(),
                found: c.target.sort.to_string(),
            });
        }
        if sample.domain(target).len() <= c.target.index {
            return Err(Error::UnknownElement {
                sort: target.to_string(),
                element: c.target.index.to_string(),
            });
        }
        for v in vars.vars() {
            if c.assignment.get(v).is_none() {
                return Err(Error::UnboundVariable(v.name.to_string()));
            }
        }
    }
    if constraints.is_empty() {
        let (g, ids) = universal_grammar(sig, vars);
        return Ok((g, ids[target]));
    }
    let inc = incorporate(sample);
    let mut gs = Vec::with_capacity(constraints.len());
    for c in constraints {
        gs.push(restrict(&lift(&inc, &c.assignment)?.grammar, sig, vars));
    }
    let refs: Vec<&TreeGrammar> = gs.iter().collect();
    let product = intersect_capped(&refs, cap)?;
    let wanted: Vec<NtId> = constraints
        .iter()
        .map(|c| inc.class_of(&c.target).expect("target is a domain element"))
        .collect();
    let found = product.components.iter().position(|c| *c == wanted);
    let mut g = product.grammar;
    let n = match found {
        Some(i) => NtId(i),
        None => {
            let names: Vec<&str> = wanted.iter().map(|w| inc.grammar.name(*w)).collect();
            g.add_nonterminal(product_name(&names), target.clone())
        }
    };
    Ok((g, n))
}

/// Consistent terms by nondecreasing height (variables weigh 0, symbols 1).
pub fn enumerate_hypotheses(
    sample: &BarzdinSample,
    constraints: &[ExampleConstraint],
    target: &Sort,
    vars: &VariableTuple,
    max_height: u64,
    max_count: usize,
) -> Result<Vec<Term>> {
    enumerate_hypotheses_capped(sample, constraints, target, vars, max_height, max_count, None)
}

pub fn enumerate_hypotheses_capped(
    sample: &BarzdinSample,
    constraints: &[ExampleConstraint],
    target: &Sort,
    vars: &VariableTuple,
    max_height: u64,
    max_count: usize,
    cap: Option<usize>,
) -> Result<Vec<Term>> {
    let (g, n) = consistent_terms_capped(sample, constraints, target, vars, cap)?;
    let hm = heights_liquid(&g, &Weights::default());
    Ok(enumerate(&g, n, &hm, max_height, max_count)?
        .iter()
        .filter_map(|t| t.to_term())
        .collect())
}
