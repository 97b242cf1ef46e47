use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use crate::algebra::{
    tuples, Assignment, Elem, FiniteAlgebra, Formula, Prefix, Quantifier, Signature, Sort, Term,
    VariableTuple,
};
use crate::error::{Error, Result};
use crate::grammar::{
    incorporate, intersect_capped, lift, restrict, Alternative, NtId, Profile, Recognizer, Symbol,
    Tree, TreeGrammar, EQUATION_SORT, FORMULA_SORT,
};

/// One point of the behavior product: an algebra and an assignment of the
/// tuple variables (element indices in tuple order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub algebra: usize,
    pub values: Vec<usize>,
}

/// The product of all lifted algebra grammars: one class per behavior
/// vector, i.e. per function from points to values.
#[derive(Clone, Debug)]
pub struct BehaviorGrammar {
    algebras: Vec<FiniteAlgebra>,
    tuple: VariableTuple,
    points: Vec<Point>,
    segments: Vec<Range<usize>>,
    grammar: TreeGrammar,
    vectors: Vec<Vec<usize>>,
    index: HashMap<(Sort, Vec<usize>), NtId>,
}

pub fn build_behavior(algs: &[FiniteAlgebra], tuple: &VariableTuple) -> Result<BehaviorGrammar> {
    build_behavior_capped(algs, tuple, None)
}

/// As [`build_behavior`], failing with `ResourceLimit` once the product
/// would exceed `cap` classes.
pub fn build_behavior_capped(
    algs: &[FiniteAlgebra],
    tuple: &VariableTuple,
    cap: Option<usize>,
) -> Result<BehaviorGrammar> {
    let sig = shared_signature(algs)?;
    for v in tuple.vars() {
        if !sig.has_sort(&v.sort) {
            return Err(Error::UnknownSort(v.sort.to_string()));
        }
    }
    let mut points = Vec::new();
    let mut segments = Vec::new();
    let mut grammars = Vec::new();
    // Per algebra: grammar nonterminal → element index.
    let mut values_of: Vec<Vec<usize>> = Vec::new();
    for (ai, alg) in algs.iter().enumerate() {
        let inc = incorporate(alg);
        let mut back = vec![0; inc.grammar.nonterminals().len()];
        for (e, n) in &inc.classes {
            back[n.0] = e.index;
        }
        values_of.push(back);
        let dims: Vec<usize> = tuple.vars().iter().map(|v| alg.domain(&v.sort).len()).collect();
        let start = points.len();
        for values in tuples(&dims) {
            let mut sigma = Assignment::new();
            for (v, &i) in tuple.vars().iter().zip(&values) {
                sigma.bind(
                    v,
                    Elem {
                        sort: v.sort.clone(),
                        index: i,
                    },
                )?;
            }
            grammars.push(restrict(&lift(&inc, &sigma)?.grammar, sig, tuple));
            points.push(Point { algebra: ai, values });
        }
        segments.push(start..points.len());
    }
    let refs: Vec<&TreeGrammar> = grammars.iter().collect();
    let product = intersect_capped(&refs, cap)?;

    let vector_of = |comps: &[NtId]| -> Vec<usize> {
        comps
            .iter()
            .zip(&points)
            .map(|(c, p)| values_of[p.algebra][c.0])
            .collect()
    };
    let mut order: Vec<NtId> = product.grammar.ids().collect();
    order.sort_by_key(|n| {
        let sort = &product.grammar.nonterminal(*n).sort;
        (sig.sort_index(sort), vector_of(&product.components[n.0]))
    });
    let (mut grammar, _) = product.grammar.retain(&order);
    let vectors: Vec<Vec<usize>> = order
        .iter()
        .map(|n| vector_of(&product.components[n.0]))
        .collect();
    for id in grammar.ids().collect::<Vec<_>>() {
        grammar.rule_mut(id).sort_by(alternative_order);
    }
    let index = grammar
        .ids()
        .map(|n| ((grammar.nonterminal(n).sort.clone(), vectors[n.0].clone()), n))
        .collect();
    Ok(BehaviorGrammar {
        algebras: algs.to_vec(),
        tuple: tuple.clone(),
        points,
        segments,
        grammar,
        vectors,
        index,
    })
}

fn shared_signature(algs: &[FiniteAlgebra]) -> Result<&Signature> {
    let first = algs
        .first()
        .ok_or_else(|| Error::Invalid("at least one algebra is required".into()))?;
    if algs.iter().any(|a| a.signature() != first.signature()) {
        return Err(Error::SignatureMismatch);
    }
    Ok(first.signature())
}

/// Constants first, then by symbol name and argument classes.
fn alternative_order(a: &Alternative, b: &Alternative) -> std::cmp::Ordering {
    let key = |alt: &Alternative| match alt {
        Alternative::Func(s, args) => (1, args.len(), s.name(), args.clone()),
        Alternative::Chain(m) => (0, 0, String::new(), vec![*m]),
    };
    key(a).cmp(&key(b))
}

impl BehaviorGrammar {
    pub fn grammar(&self) -> &TreeGrammar {
        &self.grammar
    }

    pub fn algebras(&self) -> &[FiniteAlgebra] {
        &self.algebras
    }

    pub fn signature(&self) -> &Signature {
        self.algebras[0].signature()
    }

    pub fn tuple(&self) -> &VariableTuple {
        &self.tuple
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Points of each algebra, as a range into [`Self::points`].
    pub fn segments(&self) -> &[Range<usize>] {
        &self.segments
    }

    pub fn classes(&self) -> impl Iterator<Item = NtId> {
        self.grammar.ids()
    }

    pub fn class_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, class: NtId) -> &[usize] {
        &self.vectors[class.0]
    }

    pub fn sort(&self, class: NtId) -> &Sort {
        &self.grammar.nonterminal(class).sort
    }

    /// Behavior vector rendered with element names, e.g. `0110`.
    pub fn vector_label(&self, class: NtId) -> String {
        let sort = self.sort(class);
        let names: Vec<&str> = self
            .vector(class)
            .iter()
            .zip(&self.points)
            .map(|(&v, p)| self.algebras[p.algebra].element_name(sort, v))
            .collect();
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(",")
        }
    }

    pub fn class_of_vector(&self, sort: &Sort, vector: &[usize]) -> Option<NtId> {
        self.index.get(&(sort.clone(), vector.to_vec())).copied()
    }

    /// The values of `t` at every point, by direct evaluation.
    pub fn evaluate(&self, t: &Term) -> Result<Vec<usize>> {
        self.signature().sort_of(t)?;
        self.points
            .iter()
            .map(|p| {
                let vars = self.tuple.vars();
                let lookup = |v: &crate::algebra::Var| {
                    vars.iter().position(|w| w == v).map(|i| p.values[i])
                };
                self.algebras[p.algebra].eval_index(t, &lookup)
            })
            .collect()
    }

    /// The class of `t`, found by evaluation rather than by the grammar.
    pub fn class_of_term(&self, t: &Term) -> Result<NtId> {
        let sort = self.signature().sort_of(t)?;
        let v = self.evaluate(t)?;
        self.class_of_vector(&sort, &v)
            .ok_or_else(|| Error::Invalid(format!("no behavior class for {t}")))
    }

    /// Whether `[v₁ = v₂]` survives folding `prefix` over every algebra's
    /// assignment grid.
    pub fn admits(&self, prefix: &Prefix, a: NtId, b: NtId) -> bool {
        if self.sort(a) != self.sort(b) {
            return false;
        }
        let (va, vb) = (self.vector(a), self.vector(b));
        self.segments.iter().enumerate().all(|(ai, seg)| {
            let bits: Vec<bool> = seg.clone().map(|i| va[i] == vb[i]).collect();
            let dims: Vec<usize> = self
                .tuple
                .vars()
                .iter()
                .map(|v| self.algebras[ai].domain(&v.sort).len())
                .collect();
            fold(&prefix.0, &dims, &bits)
        })
    }
}

/// `Q₁ … Qₖ` over a row-major boolean grid, first dimension outermost.
pub(crate) fn fold(qs: &[Quantifier], dims: &[usize], bits: &[bool]) -> bool {
    let Some((q, rest)) = qs.split_first() else {
        return bits[0];
    };
    let stride = bits.len() / dims[0];
    let mut parts = bits.chunks(stride).map(|c| fold(rest, &dims[1..], c));
    match q {
        Quantifier::Forall => parts.all(|b| b),
        Quantifier::Exists => parts.any(|b| b),
    }
}

/// Pairs of same-sort classes `(v₁, v₂)` admitted under `prefix`, both
/// orientations, diagonal included.
pub fn admitted_pairs(bg: &BehaviorGrammar, prefix: &Prefix) -> Result<Vec<(NtId, NtId)>> {
    if prefix.len() != bg.tuple.len() {
        return Err(Error::Invalid(format!(
            "prefix {prefix} does not fit a tuple of {} variables",
            bg.tuple.len()
        )));
    }
    let mut out = Vec::new();
    for a in bg.classes() {
        for b in bg.classes() {
            if bg.admits(prefix, a, b) {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}

/// The grammar of every valid formula over the tuple: the behavior classes,
/// one equation nonterminal per prefix, and a start rule over all prefixes.
#[derive(Clone, Debug)]
pub struct TheoremGrammar {
    behavior: BehaviorGrammar,
    admitted: BTreeMap<Prefix, Vec<(NtId, NtId)>>,
    grammar: TreeGrammar,
    equations: BTreeMap<Prefix, NtId>,
    start: NtId,
    recognizer: Recognizer,
}

pub fn build_theorem_grammar(algs: &[FiniteAlgebra], tuple: &VariableTuple) -> Result<TheoremGrammar> {
    TheoremGrammar::new(build_behavior(algs, tuple)?)
}

impl TheoremGrammar {
    pub fn new(behavior: BehaviorGrammar) -> Result<Self> {
        let k = behavior.tuple.len();
        let mut grammar = behavior.grammar.clone();
        let eq_sort = Sort::new(EQUATION_SORT);
        let formula_sort = Sort::new(FORMULA_SORT);
        for s in behavior.signature().sorts() {
            let sym = Symbol::Eq(s.clone());
            let p = sym.builtin_profile().unwrap();
            grammar.alphabet_mut().insert(sym, p);
        }
        let mut admitted = BTreeMap::new();
        let mut equations = BTreeMap::new();
        let mut heads = Vec::new();
        for q in Prefix::all(k) {
            let pairs = admitted_pairs(&behavior, &q)?;
            let n = grammar.add_nonterminal(format!("N_{q}"), eq_sort.clone());
            for &(a, b) in &pairs {
                let sym = Symbol::Eq(behavior.sort(a).clone());
                grammar.add_alternative(n, Alternative::Func(sym, vec![a, b]))?;
            }
            admitted.insert(q.clone(), pairs);
            equations.insert(q.clone(), n);
            heads.push((q, n));
        }
        let start = grammar.add_nonterminal("N", formula_sort.clone());
        for (q, n) in heads {
            let qv: Vec<(Quantifier, crate::algebra::Var)> = q
                .0
                .iter()
                .copied()
                .zip(behavior.tuple.vars().iter().cloned())
                .collect();
            let sym = Symbol::Prefix(qv);
            grammar
                .alphabet_mut()
                .insert(sym.clone(), Profile::new(vec![eq_sort.clone()], formula_sort.clone()));
            grammar.add_alternative(start, Alternative::Func(sym, vec![n]))?;
        }
        grammar.set_start(Some(start));
        let recognizer = grammar.recognizer();
        Ok(TheoremGrammar {
            behavior,
            admitted,
            grammar,
            equations,
            start,
            recognizer,
        })
    }

    pub fn behavior(&self) -> &BehaviorGrammar {
        &self.behavior
    }

    pub fn grammar(&self) -> &TreeGrammar {
        &self.grammar
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn admitted(&self, prefix: &Prefix) -> &[(NtId, NtId)] {
        self.admitted.get(prefix).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn equation_nonterminal(&self, prefix: &Prefix) -> Option<NtId> {
        self.equations.get(prefix).copied()
    }

    /// Membership of `phi` (extended to the tuple) in the start language.
    pub fn contains(&self, phi: &Formula) -> Result<bool> {
        let phi = into_fragment(self.behavior.signature(), &self.behavior.tuple, phi)?;
        Ok(self.recognizer.member(self.start, &Tree::from_formula(&phi)))
    }
}

pub fn contains(tg: &TheoremGrammar, phi: &Formula) -> Result<bool> {
    tg.contains(phi)
}

/// Checks that `phi` is over the signature and the tuple, and re-quantifies
/// it over the whole tuple.
pub fn into_fragment(sig: &Signature, tuple: &VariableTuple, phi: &Formula) -> Result<Formula> {
    let out = |e: Error| Error::OutOfFragment(format!("{phi}: {e}"));
    let ls = sig.sort_of(&phi.lhs).map_err(out)?;
    let rs = sig.sort_of(&phi.rhs).map_err(out)?;
    if ls != rs || ls != phi.sort {
        return Err(Error::OutOfFragment(format!("{phi}: sides of different sorts")));
    }
    for v in phi.lhs.vars().into_iter().chain(phi.rhs.vars()) {
        if !tuple.vars().contains(&v) {
            return Err(Error::OutOfFragment(format!(
                "{phi}: variable {} is not in the tuple",
                v.name
            )));
        }
    }
    phi.extend_to(tuple).ok_or_else(|| {
        Error::OutOfFragment(format!("{phi}: prefix does not follow the tuple order"))
    })
}
