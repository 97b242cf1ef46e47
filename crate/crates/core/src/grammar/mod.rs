//! Regular tree grammars over sorted alphabets.
//!
//! A grammar is a list of sorted nonterminals, each with a rule made of
//! alternatives `f(N₁,…,Nₙ)` or chains `M`. Tuple variables and domain
//! elements enter the alphabet as constants.

mod enumerate;
mod heights;
mod ops;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::algebra::{Formula, Name, Quantifier, Sort, Term, Var};
use crate::error::{Error, Result};
use crate::syntax::is_operator;

pub use enumerate::enumerate;
pub use heights::{heights_liquid, heights_naive, Height, HeightMap, Weights};
pub use ops::{
    incorporate, incorporate_full, intersect, intersect_capped, lift, product_name, restrict, tag,
    unite, universal_grammar, Incorporated, Product,
};

/// Result sort of `(=_S)` applications.
pub const EQUATION_SORT: &str = "$Equation";
/// Result sort of `(Q:)` applications.
pub const FORMULA_SORT: &str = "$Formula";

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Symbol {
    /// A symbol of the signature.
    Op(Name),
    /// A domain element used as a constant.
    Elem(Sort, Name),
    /// A tuple variable used as a constant.
    Var(Var),
    /// `(=_S)`.
    Eq(Sort),
    /// `(Q:)` over a concrete tuple.
    Prefix(Vec<(Quantifier, Var)>),
}

impl Symbol {
    pub fn op(name: &str) -> Symbol {
        Symbol::Op(name.into())
    }

    /// Profiles of the symbols that exist independently of any signature.
    pub fn builtin_profile(&self) -> Option<Profile> {
        match self {
            Symbol::Var(v) => Some(Profile::new(vec![], v.sort.clone())),
            Symbol::Eq(s) => Some(Profile::new(vec![s.clone(), s.clone()], Sort::new(EQUATION_SORT))),
            Symbol::Prefix(_) => Some(Profile::new(vec![Sort::new(EQUATION_SORT)], Sort::new(FORMULA_SORT))),
            _ => None,
        }
    }

    /// Text used for printing and for lexicographic tie-breaking.
    pub fn name(&self) -> String {
        self.to_string()
    }

    fn infix(&self) -> bool {
        match self {
            Symbol::Op(n) => is_operator(n),
            Symbol::Eq(_) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Op(n) => f.write_str(n),
            Symbol::Elem(_, n) => write!(f, "[{n}]"),
            Symbol::Var(v) => f.write_str(&v.name),
            Symbol::Eq(_) => f.write_str("="),
            Symbol::Prefix(p) => {
                for (i, (q, v)) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{} {}", q.keyword(), v.name)?;
                }
                f.write_str(" :")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Profile {
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl Profile {
    pub fn new(args: Vec<Sort>, result: Sort) -> Self {
        Profile { args, result }
    }
}

pub type Alphabet = BTreeMap<Symbol, Profile>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NtId(pub usize);

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Nonterminal {
    pub name: String,
    pub sort: Sort,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Alternative {
    Func(Symbol, Vec<NtId>),
    Chain(NtId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGrammar {
    alphabet: Alphabet,
    nonterminals: Vec<Nonterminal>,
    rules: Vec<Vec<Alternative>>,
    start: Option<NtId>,
}

impl TreeGrammar {
    pub fn new(alphabet: Alphabet) -> Self {
        TreeGrammar {
            alphabet,
            nonterminals: Vec::new(),
            rules: Vec::new(),
            start: None,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub(crate) fn alphabet_mut(&mut self) -> &mut Alphabet {
        &mut self.alphabet
    }

    pub fn add_nonterminal(&mut self, name: impl Into<String>, sort: Sort) -> NtId {
        self.nonterminals.push(Nonterminal {
            name: name.into(),
            sort,
        });
        self.rules.push(Vec::new());
        NtId(self.nonterminals.len() - 1)
    }

    /// Adds an alternative after checking it against the alphabet and the
    /// head's sort.
    pub fn add_alternative(&mut self, head: NtId, alt: Alternative) -> Result<()> {
        let head_sort = &self.nonterminal(head).sort;
        match &alt {
            Alternative::Chain(m) => {
                let ms = &self.nonterminal(*m).sort;
                if ms != head_sort {
                    return Err(Error::SortMismatch {
                        context: format!("chain {} ::= {}", self.name(head), self.name(*m)),
                        expected: head_sort.to_string(),
                        found: ms.to_string(),
                    });
                }
            }
            Alternative::Func(sym, args) => {
                let profile = self
                    .alphabet
                    .get(sym)
                    .ok_or_else(|| Error::UnknownSymbol(sym.to_string()))?;
                if profile.args.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: sym.to_string(),
                        expected: profile.args.len(),
                        found: args.len(),
                    });
                }
                if &profile.result != head_sort {
                    return Err(Error::SortMismatch {
                        context: format!("alternative {sym} of {}", self.name(head)),
                        expected: head_sort.to_string(),
                        found: profile.result.to_string(),
                    });
                }
                for (a, s) in args.iter().zip(&profile.args) {
                    let found = &self.nonterminal(*a).sort;
                    if found != s {
                        return Err(Error::SortMismatch {
                            context: format!("argument of {sym}"),
                            expected: s.to_string(),
                            found: found.to_string(),
                        });
                    }
                }
            }
        }
        self.rules[head.0].push(alt);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, head: NtId, alt: Alternative) {
        self.rules[head.0].push(alt);
    }

    pub fn set_start(&mut self, start: Option<NtId>) {
        self.start = start;
    }

    pub fn start(&self) -> Option<NtId> {
        self.start
    }

    pub fn nonterminals(&self) -> &[Nonterminal] {
        &self.nonterminals
    }

    pub fn nonterminal(&self, id: NtId) -> &Nonterminal {
        &self.nonterminals[id.0]
    }

    pub fn name(&self, id: NtId) -> &str {
        &self.nonterminals[id.0].name
    }

    pub fn ids(&self) -> impl Iterator<Item = NtId> {
        (0..self.nonterminals.len()).map(NtId)
    }

    pub fn rule(&self, id: NtId) -> &[Alternative] {
        &self.rules[id.0]
    }

    pub(crate) fn rule_mut(&mut self, id: NtId) -> &mut Vec<Alternative> {
        &mut self.rules[id.0]
    }

    pub fn find(&self, name: &str) -> Option<NtId> {
        self.nonterminals.iter().position(|n| n.name == name).map(NtId)
    }

    /// Total number of alternatives.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    /// For every nonterminal, the nonterminals reachable through chains,
    /// itself included.
    pub fn chain_closure(&self) -> Vec<Vec<NtId>> {
        self.ids()
            .map(|n| {
                let mut seen = vec![false; self.nonterminals.len()];
                let mut stack = vec![n];
                seen[n.0] = true;
                let mut out = Vec::new();
                while let Some(m) = stack.pop() {
                    out.push(m);
                    for alt in self.rule(m) {
                        if let Alternative::Chain(c) = alt {
                            if !seen[c.0] {
                                seen[c.0] = true;
                                stack.push(*c);
                            }
                        }
                    }
                }
                out.sort();
                out
            })
            .collect()
    }

    /// Function alternatives after chain expansion, keyed by the
    /// alternative, with every head that derives it.
    pub fn expanded_heads(&self) -> HashMap<(Symbol, Vec<NtId>), Vec<NtId>> {
        let closure = self.chain_closure();
        let mut reverse: Vec<Vec<NtId>> = vec![Vec::new(); self.nonterminals.len()];
        for (h, reach) in closure.iter().enumerate() {
            for m in reach {
                reverse[m.0].push(NtId(h));
            }
        }
        let mut out: HashMap<(Symbol, Vec<NtId>), Vec<NtId>> = HashMap::new();
        for m in self.ids() {
            for alt in self.rule(m) {
                if let Alternative::Func(sym, args) = alt {
                    let heads = out.entry((sym.clone(), args.clone())).or_default();
                    for h in &reverse[m.0] {
                        if !heads.contains(h) {
                            heads.push(*h);
                        }
                    }
                }
            }
        }
        out
    }

    /// Keeps the nonterminals in `keep` (in the given order), renumbering
    /// references; alternatives mentioning dropped nonterminals go away.
    pub fn retain(&self, keep: &[NtId]) -> (TreeGrammar, Vec<Option<NtId>>) {
        let mut map = vec![None; self.nonterminals.len()];
        let mut g = TreeGrammar::new(self.alphabet.clone());
        for &k in keep {
            let n = self.nonterminal(k);
            map[k.0] = Some(g.add_nonterminal(n.name.clone(), n.sort.clone()));
        }
        for &k in keep {
            let head = map[k.0].unwrap();
            for alt in self.rule(k) {
                let mapped = match alt {
                    Alternative::Chain(m) => map[m.0].map(Alternative::Chain),
                    Alternative::Func(s, args) => args
                        .iter()
                        .map(|a| map[a.0])
                        .collect::<Option<Vec<_>>>()
                        .map(|args| Alternative::Func(s.clone(), args)),
                };
                if let Some(alt) = mapped {
                    g.push_unchecked(head, alt);
                }
            }
        }
        g.start = self.start.and_then(|s| map[s.0]);
        (g, map)
    }

    /// Nonterminals reachable from `roots` through alternatives.
    pub fn reachable_from(&self, roots: &[NtId]) -> Vec<bool> {
        let mut seen = vec![false; self.nonterminals.len()];
        let mut stack: Vec<NtId> = roots.to_vec();
        for r in roots {
            seen[r.0] = true;
        }
        while let Some(n) = stack.pop() {
            for alt in self.rule(n) {
                let next: &[NtId] = match alt {
                    Alternative::Chain(m) => std::slice::from_ref(m),
                    Alternative::Func(_, args) => args,
                };
                for m in next {
                    if !seen[m.0] {
                        seen[m.0] = true;
                        stack.push(*m);
                    }
                }
            }
        }
        seen
    }

    /// A reusable bottom-up recognizer for membership queries.
    pub fn recognizer(&self) -> Recognizer {
        Recognizer::new(self)
    }

    /// One alternative as it appears in the dump.
    pub fn show_alternative(&self, alt: &Alternative) -> String {
        struct Show<'a>(&'a TreeGrammar, &'a Alternative);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_alt(self.1, f)
            }
        }
        Show(self, alt).to_string()
    }

    fn fmt_alt(&self, alt: &Alternative, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match alt {
            Alternative::Chain(m) => f.write_str(self.name(*m)),
            Alternative::Func(sym, args) if args.is_empty() => write!(f, "{sym}"),
            Alternative::Func(sym, args) if args.len() == 2 && sym.infix() => {
                write!(f, "{} {sym} {}", self.name(args[0]), self.name(args[1]))
            }
            Alternative::Func(sym @ Symbol::Prefix(_), args) => {
                write!(f, "{sym} {}", self.name(args[0]))
            }
            Alternative::Func(sym, args) => {
                let names: Vec<&str> = args.iter().map(|a| self.name(*a)).collect();
                write!(f, "{sym}({})", names.join(","))
            }
        }
    }
}

/// Grammar dump: `sort N : S` headers, an optional `start N`, then one
/// `N ::= alt | …` line per nonterminal.
impl fmt::Display for TreeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nonterminals {
            writeln!(f, "sort {} : {}", n.name, n.sort)?;
        }
        if let Some(s) = self.start {
            writeln!(f, "start {}", self.name(s))?;
        }
        for id in self.ids() {
            write!(f, "{} ::=", self.name(id))?;
            for (i, alt) in self.rule(id).iter().enumerate() {
                f.write_str(if i == 0 { " " } else { " | " })?;
                self.fmt_alt(alt, f)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Ground tree over a grammar alphabet.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tree {
    pub symbol: Symbol,
    pub args: Vec<Tree>,
}

impl Tree {
    pub fn leaf(symbol: Symbol) -> Tree {
        Tree {
            symbol,
            args: Vec::new(),
        }
    }

    pub fn from_term(t: &Term) -> Tree {
        match t {
            Term::Var(v) => Tree::leaf(Symbol::Var(v.clone())),
            Term::App(f, args) => Tree {
                symbol: Symbol::Op(f.clone()),
                args: args.iter().map(Tree::from_term).collect(),
            },
        }
    }

    /// `(Q:)((=_S)(lhs, rhs))`.
    pub fn from_formula(phi: &Formula) -> Tree {
        Tree {
            symbol: Symbol::Prefix(phi.prefix.clone()),
            args: vec![Tree {
                symbol: Symbol::Eq(phi.sort.clone()),
                args: vec![Tree::from_term(&phi.lhs), Tree::from_term(&phi.rhs)],
            }],
        }
    }

    /// Back to a term; `None` for trees with element, equation or prefix
    /// symbols.
    pub fn to_term(&self) -> Option<Term> {
        match &self.symbol {
            Symbol::Var(v) if self.args.is_empty() => Some(Term::Var(v.clone())),
            Symbol::Op(f) => Some(Term::App(
                f.clone(),
                self.args.iter().map(Tree::to_term).collect::<Option<Vec<_>>>()?,
            )),
            _ => None,
        }
    }

    /// Back to a formula, for trees built like [`Tree::from_formula`].
    pub fn to_formula(&self) -> Option<Formula> {
        let Symbol::Prefix(prefix) = &self.symbol else {
            return None;
        };
        let eq = self.args.first()?;
        let Symbol::Eq(sort) = &eq.symbol else {
            return None;
        };
        Some(Formula {
            prefix: prefix.clone(),
            lhs: eq.args.first()?.to_term()?,
            rhs: eq.args.get(1)?.to_term()?,
            sort: sort.clone(),
        })
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Tree::size).sum::<usize>()
    }

    /// Generalized height under `weights`.
    pub fn height(&self, weights: &Weights) -> u64 {
        self.args.iter().map(|a| a.height(weights)).max().unwrap_or(0) + weights.get(&self.symbol)
    }

    /// Symbol names first, then arguments left to right.
    pub fn lex_cmp(&self, other: &Tree) -> Ordering {
        if self.symbol != other.symbol {
            let by_name = self.symbol.name().cmp(&other.symbol.name());
            if by_name != Ordering::Equal {
                return by_name;
            }
            let by_sym = self.symbol.cmp(&other.symbol);
            if by_sym != Ordering::Equal {
                return by_sym;
            }
        }
        for (a, b) in self.args.iter().zip(&other.args) {
            let c = a.lex_cmp(b);
            if c != Ordering::Equal {
                return c;
            }
        }
        self.args.len().cmp(&other.args.len())
    }

    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match (&self.symbol, self.args.len()) {
            (sym, 0) => write!(f, "{sym}"),
            (sym @ Symbol::Prefix(_), 1) => {
                write!(f, "{sym} ")?;
                self.args[0].fmt_nested(f, false)
            }
            (sym, 2) if sym.infix() => {
                if nested {
                    f.write_str("(")?;
                }
                self.args[0].fmt_nested(f, true)?;
                write!(f, " {sym} ")?;
                self.args[1].fmt_nested(f, true)?;
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
            (sym, _) => {
                write!(f, "{sym}(")?;
                for (i, a) in self.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_nested(f, false)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_nested(f, false)
    }
}

/// Bottom-up membership: the set of nonterminals deriving each subtree.
#[derive(Clone, Debug)]
pub struct Recognizer {
    by_symbol: HashMap<Symbol, Vec<(NtId, Vec<NtId>)>>,
    /// For each nonterminal, the heads that reach it through chains.
    upward: Vec<Vec<NtId>>,
}

impl Recognizer {
    pub fn new(g: &TreeGrammar) -> Self {
        let mut by_symbol: HashMap<Symbol, Vec<(NtId, Vec<NtId>)>> = HashMap::new();
        for h in g.ids() {
            for alt in g.rule(h) {
                if let Alternative::Func(s, args) = alt {
                    by_symbol.entry(s.clone()).or_default().push((h, args.clone()));
                }
            }
        }
        let mut upward = vec![Vec::new(); g.nonterminals.len()];
        for (h, reach) in g.chain_closure().into_iter().enumerate() {
            for m in reach {
                upward[m.0].push(NtId(h));
            }
        }
        Recognizer { by_symbol, upward }
    }

    /// Sorted nonterminals whose language contains `t`.
    pub fn states(&self, t: &Tree) -> Vec<NtId> {
        let children: Vec<Vec<NtId>> = t.args.iter().map(|a| self.states(a)).collect();
        if children.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some(alts) = self.by_symbol.get(&t.symbol) {
            for (h, args) in alts {
                if args.len() == children.len()
                    && args
                        .iter()
                        .zip(&children)
                        .all(|(a, set)| set.binary_search(a).is_ok())
                {
                    out.extend(self.upward[h.0].iter().copied());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn member(&self, n: NtId, t: &Tree) -> bool {
        self.states(t).binary_search(&n).is_ok()
    }
}

/// Whether `t ∈ L(n)`.
pub fn member(g: &TreeGrammar, n: NtId, t: &Tree) -> bool {
    g.recognizer().member(n, t)
}

/// True iff, after chain expansion, no two distinct heads share an
/// alternative.
pub fn is_deterministic(g: &TreeGrammar) -> bool {
    g.expanded_heads().values().all(|heads| heads.len() <= 1)
}

#[cfg(test)]
pub(crate) mod tests;
