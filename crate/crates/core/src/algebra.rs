//! Sorts, signatures, terms, formulas and finite algebras given by tables,
//! together with the brute-force satisfaction check everything else is
//! measured against.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared identifier text.
pub type Name = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(Name);

impl Sort {
    pub fn new(name: impl AsRef<str>) -> Self {
        Sort(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolDecl {
    pub name: Name,
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl SymbolDecl {
    pub fn new(name: impl AsRef<str>, args: Vec<Sort>, result: Sort) -> Self {
        SymbolDecl {
            name: Arc::from(name.as_ref()),
            args,
            result,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

/// A many-sorted signature, optionally with a fixed fragment that every
/// admitted algebra has to reproduce.
#[derive(Clone, Debug)]
pub struct Signature {
    sorts: Vec<Sort>,
    symbols: Vec<SymbolDecl>,
    index: HashMap<Name, usize>,
    fixed_sorts: Vec<Sort>,
    fixed: Option<Arc<FiniteAlgebra>>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        let sorts = |s: &Signature| s.sorts.iter().cloned().collect::<BTreeSet<_>>();
        let fixed = |s: &Signature| s.fixed_sorts.iter().cloned().collect::<BTreeSet<_>>();
        sorts(self) == sorts(other)
            && fixed(self) == fixed(other)
            && self.symbols.len() == other.symbols.len()
            && self
                .symbols
                .iter()
                .all(|d| other.symbol(&d.name) == Some(d))
    }
}

impl Eq for Signature {}

impl Signature {
    pub fn new(sorts: Vec<Sort>, symbols: Vec<SymbolDecl>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &sorts {
            if !seen.insert(s.clone()) {
                return Err(Error::Duplicate(s.to_string()));
            }
        }
        let mut index = HashMap::new();
        for (i, d) in symbols.iter().enumerate() {
            for s in d.args.iter().chain(std::iter::once(&d.result)) {
                if !seen.contains(s) {
                    return Err(Error::UnknownSort(s.to_string()));
                }
            }
            if index.insert(d.name.clone(), i).is_some() {
                return Err(Error::Duplicate(d.name.to_string()));
            }
        }
        Ok(Signature {
            sorts,
            symbols,
            index,
            fixed_sorts: Vec::new(),
            fixed: None,
        })
    }

    /// Attaches a fixed fragment over `fixed_sorts`. The fragment must
    /// interpret exactly the symbols whose sorts all lie in `fixed_sorts`.
    pub fn with_fixed(mut self, fixed_sorts: Vec<Sort>, fragment: FiniteAlgebra) -> Result<Self> {
        for s in &fixed_sorts {
            if !self.has_sort(s) {
                return Err(Error::UnknownSort(s.to_string()));
            }
            if !fragment.signature().has_sort(s) {
                return Err(Error::Invalid(format!(
                    "fixed fragment does not declare sort {s}"
                )));
            }
        }
        let fixed_set: BTreeSet<_> = fixed_sorts.iter().cloned().collect();
        let fixed_symbols: Vec<&SymbolDecl> = self
            .symbols
            .iter()
            .filter(|d| d.args.iter().chain([&d.result]).all(|s| fixed_set.contains(s)))
            .collect();
        let frag = fragment.signature();
        if frag.symbols.len() != fixed_symbols.len()
            || fixed_symbols.iter().any(|d| frag.symbol(&d.name) != Some(*d))
        {
            return Err(Error::Invalid(
                "fixed fragment must interpret exactly the symbols over the fixed sorts".into(),
            ));
        }
        self.fixed_sorts = fixed_sorts;
        self.fixed = Some(Arc::new(fragment));
        Ok(self)
    }

    /// Fixes `sort` to the two-element Boolean algebra. Symbols over `sort`
    /// only must be among `¬ ∧ ∨ → ↔ true false` with their usual profiles.
    pub fn with_bool(self, sort: &Sort) -> Result<Self> {
        if !self.has_sort(sort) {
            return Err(Error::UnknownSort(sort.to_string()));
        }
        let standard = boolean_symbols(sort);
        let mut used = Vec::new();
        for d in &self.symbols {
            if d.args.iter().chain([&d.result]).all(|s| s == sort) {
                match standard.iter().find(|s| s.name == d.name) {
                    Some(s) if s == d => used.push(s.clone()),
                    Some(_) => {
                        return Err(Error::NotAdmitted(format!(
                            "`{}` does not have the Boolean profile",
                            d.name
                        )))
                    }
                    None => {
                        return Err(Error::NotAdmitted(format!(
                            "`{}` is not a Boolean connective",
                            d.name
                        )))
                    }
                }
            }
        }
        let fragment = boolean_algebra(sort, used)?;
        self.with_fixed(vec![sort.clone()], fragment)
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn has_sort(&self, sort: &Sort) -> bool {
        self.sorts.contains(sort)
    }

    pub fn sort_index(&self, sort: &Sort) -> Option<usize> {
        self.sorts.iter().position(|s| s == sort)
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolDecl> {
        self.index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn fixed_sorts(&self) -> &[Sort] {
        &self.fixed_sorts
    }

    pub fn fixed_fragment(&self) -> Option<&FiniteAlgebra> {
        self.fixed.as_deref()
    }

    /// Well-sortedness check; returns the sort of `term`.
    pub fn sort_of(&self, term: &Term) -> Result<Sort> {
        match term {
            Term::Var(v) => {
                if !self.has_sort(&v.sort) {
                    return Err(Error::UnknownSort(v.sort.to_string()));
                }
                Ok(v.sort.clone())
            }
            Term::App(f, args) => {
                let decl = self
                    .symbol(f)
                    .ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
                if decl.args.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: f.to_string(),
                        expected: decl.args.len(),
                        found: args.len(),
                    });
                }
                for (a, expected) in args.iter().zip(&decl.args) {
                    let found = self.sort_of(a)?;
                    if &found != expected {
                        return Err(Error::SortMismatch {
                            context: format!("argument of `{f}`"),
                            expected: expected.to_string(),
                            found: found.to_string(),
                        });
                    }
                }
                Ok(decl.result.clone())
            }
        }
    }
}

/// Names of the Boolean elements, in domain order.
pub const FALSE: &str = "false";
pub const TRUE: &str = "true";

fn boolean_symbols(sort: &Sort) -> Vec<SymbolDecl> {
    let b = || sort.clone();
    vec![
        SymbolDecl::new(TRUE, vec![], b()),
        SymbolDecl::new(FALSE, vec![], b()),
        SymbolDecl::new("¬", vec![b()], b()),
        SymbolDecl::new("∧", vec![b(), b()], b()),
        SymbolDecl::new("∨", vec![b(), b()], b()),
        SymbolDecl::new("→", vec![b(), b()], b()),
        SymbolDecl::new("↔", vec![b(), b()], b()),
    ]
}

fn boolean_algebra(sort: &Sort, symbols: Vec<SymbolDecl>) -> Result<FiniteAlgebra> {
    let sig = Signature::new(vec![sort.clone()], symbols)?;
    let mut st = Structure::new(sig, vec![(sort.clone(), vec![FALSE.into(), TRUE.into()])])?;
    let decls = st.signature().symbols().to_vec();
    for d in decls {
        let op: fn(&[bool]) -> bool = match &*d.name {
            TRUE => |_| true,
            FALSE => |_| false,
            "¬" => |a| !a[0],
            "∧" => |a| a[0] && a[1],
            "∨" => |a| a[0] || a[1],
            "→" => |a| !a[0] || a[1],
            "↔" => |a| a[0] == a[1],
            _ => unreachable!("only standard connectives reach here"),
        };
        for args in tuples(&vec![2; d.arity()]) {
            let bits: Vec<bool> = args.iter().map(|&i| i == 1).collect();
            st.set(&d.name, &args, usize::from(op(&bits)))?;
        }
    }
    FiniteAlgebra::new(st)
}

/// All index tuples below `dims`, first position varying slowest.
pub fn tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0; dims.len()];
    if dims.contains(&0) {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = dims.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < dims[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Name,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl AsRef<str>, sort: &Sort) -> Self {
        Var {
            name: Arc::from(name.as_ref()),
            sort: sort.clone(),
        }
    }
}

/// Ordered tuple of pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VariableTuple {
    vars: Vec<Var>,
}

impl VariableTuple {
    pub fn new(vars: Vec<Var>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.clone()) {
                return Err(Error::Duplicate(v.name.to_string()));
            }
        }
        Ok(VariableTuple { vars })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| &*v.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Var> {
        self.vars.iter().find(|v| &*v.name == name)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    App(Name, Vec<Term>),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn app(f: impl AsRef<str>, args: Vec<Term>) -> Term {
        Term::App(Arc::from(f.as_ref()), args)
    }

    pub fn constant(c: impl AsRef<str>) -> Term {
        Term::app(c, Vec::new())
    }

    /// Number of symbol occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Nodes on the longest root-to-leaf path; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions(&self, var: &Var) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }

    pub fn substitute(&self, subst: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(subst)).collect())
            }
        }
    }

    /// Subterm at a child-index path.
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get(i)?.at(rest),
                Term::Var(_) => None,
            },
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get_mut(i)?.at_mut(rest),
                Term::Var(_) => None,
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// The quantifier pattern of a formula, one entry per tuple position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Prefix(pub Vec<Quantifier>);

impl Prefix {
    pub fn universal(k: usize) -> Self {
        Prefix(vec![Quantifier::Forall; k])
    }

    /// Every prefix of length `k`, ∀ before ∃ position by position.
    pub fn all(k: usize) -> Vec<Prefix> {
        tuples(&vec![2; k])
            .into_iter()
            .map(|bits| {
                Prefix(
                    bits.into_iter()
                        .map(|b| if b == 0 { Quantifier::Forall } else { Quantifier::Exists })
                        .collect(),
                )
            })
            .collect()
    }

    pub fn is_universal(&self) -> bool {
        self.0.iter().all(|&q| q == Quantifier::Forall)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.0 {
            f.write_str(match q {
                Quantifier::Forall => "∀",
                Quantifier::Exists => "∃",
            })?;
        }
        Ok(())
    }
}

/// `q₁x₁ … qₖxₖ : lhs =_S rhs` with the prefix in tuple order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Formula {
    pub prefix: Vec<(Quantifier, Var)>,
    pub lhs: Term,
    pub rhs: Term,
    pub sort: Sort,
}

impl Formula {
    /// Builds and checks a formula over `sig`.
    pub fn new(
        sig: &Signature,
        prefix: Vec<(Quantifier, Var)>,
        lhs: Term,
        rhs: Term,
    ) -> Result<Formula> {
        VariableTuple::new(prefix.iter().map(|(_, v)| v.clone()).collect())?;
        let ls = sig.sort_of(&lhs)?;
        let rs = sig.sort_of(&rhs)?;
        if ls != rs {
            return Err(Error::SortMismatch {
                context: "equation".into(),
                expected: ls.to_string(),
                found: rs.to_string(),
            });
        }
        for v in lhs.vars().into_iter().chain(rhs.vars()) {
            match prefix.iter().find(|(_, p)| p.name == v.name) {
                Some((_, p)) if p.sort == v.sort => {}
                Some((_, p)) => {
                    return Err(Error::SortMismatch {
                        context: format!("variable {}", v.name),
                        expected: p.sort.to_string(),
                        found: v.sort.to_string(),
                    })
                }
                None => return Err(Error::UnboundVariable(v.name.to_string())),
            }
        }
        Ok(Formula {
            prefix,
            lhs,
            rhs,
            sort: ls,
        })
    }

    /// Same quantifier over every tuple variable.
    pub fn with_prefix(prefix: &Prefix, tuple: &VariableTuple, lhs: Term, rhs: Term, sort: Sort) -> Formula {
        Formula {
            prefix: prefix.0.iter().copied().zip(tuple.vars().iter().cloned()).collect(),
            lhs,
            rhs,
            sort,
        }
    }

    pub fn tuple(&self) -> VariableTuple {
        VariableTuple {
            vars: self.prefix.iter().map(|(_, v)| v.clone()).collect(),
        }
    }

    pub fn quantifiers(&self) -> Prefix {
        Prefix(self.prefix.iter().map(|(q, _)| *q).collect())
    }

    pub fn size(&self) -> usize {
        self.lhs.size() + self.rhs.size()
    }

    pub fn is_reflexive(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn flipped(&self) -> Formula {
        Formula {
            prefix: self.prefix.clone(),
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            sort: self.sort.clone(),
        }
    }

    /// Removes quantifiers whose variable occurs in neither side. Sound
    /// because every domain is nonempty.
    pub fn drop_vacuous(&self) -> Formula {
        Formula {
            prefix: self
                .prefix
                .iter()
                .filter(|(_, v)| self.lhs.mentions(v) || self.rhs.mentions(v))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    /// Re-quantifies over `tuple`, adding vacuous `∀` for tuple variables
    /// the formula lacks. Fails unless the formula's variables occur in
    /// `tuple` in the same order and with the same sorts.
    pub fn extend_to(&self, tuple: &VariableTuple) -> Option<Formula> {
        let mut prefix = Vec::with_capacity(tuple.len());
        let mut own = self.prefix.iter().peekable();
        for v in tuple.vars() {
            match own.peek() {
                Some((q, w)) if w.name == v.name => {
                    if w.sort != v.sort {
                        return None;
                    }
                    prefix.push((*q, v.clone()));
                    own.next();
                }
                _ => prefix.push((Quantifier::Forall, v.clone())),
            }
        }
        if own.next().is_some() {
            return None;
        }
        Some(Formula {
            prefix,
            ..self.clone()
        })
    }
}

/// A domain element, identified by its position in the sort's domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Elem {
    pub sort: Sort,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Table {
    dims: Vec<usize>,
    entries: Vec<Option<usize>>,
}

impl Table {
    fn offset(&self, args: &[usize]) -> Option<usize> {
        if args.len() != self.dims.len() {
            return None;
        }
        let mut off = 0;
        for (&a, &d) in args.iter().zip(&self.dims) {
            if a >= d {
                return None;
            }
            off = off * d + a;
        }
        Some(off)
    }
}

/// Domains plus possibly partial operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    domains: Vec<Vec<Name>>,
    tables: Vec<Table>,
}

impl Structure {
    /// `domains` must name every sort of the signature exactly once.
    pub fn new(signature: Signature, domains: Vec<(Sort, Vec<Name>)>) -> Result<Self> {
        let mut slots: Vec<Option<Vec<Name>>> = vec![None; signature.sorts().len()];
        for (sort, elems) in domains {
            let i = signature
                .sort_index(&sort)
                .ok_or_else(|| Error::UnknownSort(sort.to_string()))?;
            if slots[i].is_some() {
                return Err(Error::Duplicate(format!("domain of {sort}")));
            }
            if elems.is_empty() {
                return Err(Error::EmptyDomain(sort.to_string()));
            }
            let mut seen = BTreeSet::new();
            for e in &elems {
                if !seen.insert(e.clone()) {
                    return Err(Error::Duplicate(format!("element {e} of {sort}")));
                }
            }
            slots[i] = Some(elems);
        }
        let domains = slots
            .into_iter()
            .zip(signature.sorts())
            .map(|(d, s)| d.ok_or_else(|| Error::EmptyDomain(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let tables = signature
            .symbols()
            .iter()
            .map(|d| {
                let dims: Vec<usize> = d
                    .args
                    .iter()
                    .map(|s| domains[signature.sort_index(s).unwrap()].len())
                    .collect();
                let n = dims.iter().product();
                Table {
                    dims,
                    entries: vec![None; n],
                }
            })
            .collect();
        Ok(Structure {
            signature,
            domains,
            tables,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self, sort: &Sort) -> &[Name] {
        match self.signature.sort_index(sort) {
            Some(i) => &self.domains[i],
            None => &[],
        }
    }

    pub fn element_index(&self, sort: &Sort, name: &str) -> Result<usize> {
        self.domain(sort)
            .iter()
            .position(|e| &**e == name)
            .ok_or_else(|| Error::UnknownElement {
                sort: sort.to_string(),
                element: name.to_string(),
            })
    }

    pub fn element_name(&self, sort: &Sort, index: usize) -> &str {
        &self.domain(sort)[index]
    }

    /// Records `symbol(args) = result`; re-setting an entry is an error.
    pub fn set(&mut self, symbol: &str, args: &[usize], result: usize) -> Result<()> {
        let i = self
            .signature
            .symbol_index(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
        let decl = &self.signature.symbols()[i];
        if decl.arity() != args.len() {
            return Err(Error::ArityMismatch {
                symbol: symbol.to_string(),
                expected: decl.arity(),
                found: args.len(),
            });
        }
        let result_len = self.domain(&decl.result).len();
        if result >= result_len {
            return Err(Error::Invalid(format!("result index {result} out of range")));
        }
        let table = &mut self.tables[i];
        let off = table
            .offset(args)
            .ok_or_else(|| Error::Invalid(format!("argument tuple of `{symbol}` out of range")))?;
        if table.entries[off].is_some() {
            return Err(Error::Duplicate(format!(
                "table entry {}",
                self.render_entry(i, args)
            )));
        }
        table.entries[off] = Some(result);
        Ok(())
    }

    pub fn get(&self, symbol: usize, args: &[usize]) -> Option<usize> {
        let t = self.tables.get(symbol)?;
        t.entries[t.offset(args)?]
    }

    /// Defined entries of one symbol as `(args, result)`.
    pub fn entries(&self, symbol: usize) -> impl Iterator<Item = (Vec<usize>, usize)> + '_ {
        let t = &self.tables[symbol];
        tuples(&t.dims)
            .into_iter()
            .zip(t.entries.iter())
            .filter_map(|(args, r)| r.map(|r| (args, r)))
    }

    pub fn entry_count(&self) -> usize {
        self.tables
            .iter()
            .map(|t| t.entries.iter().filter(|e| e.is_some()).count())
            .sum()
    }

    fn render_entry(&self, symbol: usize, args: &[usize]) -> String {
        let decl = &self.signature.symbols()[symbol];
        let names: Vec<&str> = args
            .iter()
            .zip(&decl.args)
            .map(|(&a, s)| self.element_name(s, a))
            .collect();
        format!("{} ({})", decl.name, names.join(","))
    }

    /// Value of `term` with variables looked up through `lookup`; `None`
    /// when a table entry on the way is undefined.
    pub(crate) fn eval_with(
        &self,
        term: &Term,
        lookup: &dyn Fn(&Var) -> Option<usize>,
    ) -> Result<Option<usize>> {
        match term {
            Term::Var(v) => lookup(v)
                .map(Some)
                .ok_or_else(|| Error::UnboundVariable(v.name.to_string())),
            Term::App(f, args) => {
                let i = self
                    .signature
                    .symbol_index(f)
                    .ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
                let arity = self.signature.symbols()[i].arity();
                if arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: f.to_string(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    match self.eval_with(a, lookup)? {
                        Some(v) => vals.push(v),
                        None => return Ok(None),
                    }
                }
                Ok(self.get(i, &vals))
            }
        }
    }

    /// Evaluation in a possibly partial structure.
    pub fn eval_partial(&self, asg: &Assignment, term: &Term) -> Result<Option<Elem>> {
        let sort = self.signature.sort_of(term)?;
        let v = self.eval_with(term, &|v| asg.get(v))?;
        Ok(v.map(|index| Elem { sort, index }))
    }
}

/// A finite algebra: a structure whose tables are total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    structure: Structure,
}

impl FiniteAlgebra {
    /// Checks totality and that constants sharing a name with an element of
    /// their sort denote that element.
    pub fn new(structure: Structure) -> Result<Self> {
        let sig = &structure.signature;
        for (i, decl) in sig.symbols().iter().enumerate() {
            let t = &structure.tables[i];
            for (args, e) in tuples(&t.dims).iter().zip(&t.entries) {
                if e.is_none() {
                    let names: Vec<&str> = args
                        .iter()
                        .zip(&decl.args)
                        .map(|(&a, s)| structure.element_name(s, a))
                        .collect();
                    return Err(Error::Totality {
                        symbol: decl.name.to_string(),
                        args: names.join(","),
                    });
                }
            }
            if decl.arity() == 0 {
                if let Ok(named) = structure.element_index(&decl.result, &decl.name) {
                    if structure.get(i, &[]) != Some(named) {
                        return Err(Error::Invalid(format!(
                            "constant `{}` shares its name with an element but denotes another",
                            decl.name
                        )));
                    }
                }
            }
        }
        Ok(FiniteAlgebra { structure })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn signature(&self) -> &Signature {
        &self.structure.signature
    }

    pub fn domain(&self, sort: &Sort) -> &[Name] {
        self.structure.domain(sort)
    }

    pub fn element_index(&self, sort: &Sort, name: &str) -> Result<usize> {
        self.structure.element_index(sort, name)
    }

    pub fn element_name(&self, sort: &Sort, index: usize) -> &str {
        self.structure.element_name(sort, index)
    }

    /// `|E_A|`, counting constant entries.
    pub fn equation_count(&self) -> usize {
        self.structure.entry_count()
    }

    pub fn apply(&self, symbol: &str, args: &[usize]) -> Option<usize> {
        self.structure.get(self.signature().symbol_index(symbol)?, args)
    }

    pub(crate) fn eval_index(
        &self,
        term: &Term,
        lookup: &dyn Fn(&Var) -> Option<usize>,
    ) -> Result<usize> {
        Ok(self
            .structure
            .eval_with(term, lookup)?
            .expect("tables of a finite algebra are total"))
    }
}

impl AsRef<Structure> for FiniteAlgebra {
    fn as_ref(&self) -> &Structure {
        &self.structure
    }
}

impl AsRef<Structure> for Structure {
    fn as_ref(&self) -> &Structure {
        self
    }
}

/// Ground substitution of domain elements for variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: BTreeMap<Var, Elem>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn bind(&mut self, var: &Var, elem: Elem) -> Result<()> {
        if var.sort != elem.sort {
            return Err(Error::SortMismatch {
                context: format!("binding of {}", var.name),
                expected: var.sort.to_string(),
                found: elem.sort.to_string(),
            });
        }
        self.values.insert(var.clone(), elem);
        Ok(())
    }

    /// Binds by element name, checked against `structure`.
    pub fn bind_name(&mut self, structure: &Structure, var: &Var, element: &str) -> Result<()> {
        let index = structure.element_index(&var.sort, element)?;
        self.bind(
            var,
            Elem {
                sort: var.sort.clone(),
                index,
            },
        )
    }

    pub fn get(&self, var: &Var) -> Option<usize> {
        self.values.get(var).map(|e| e.index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Elem)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn eval(alg: &FiniteAlgebra, asg: &Assignment, term: &Term) -> Result<Elem> {
    let sort = alg.signature().sort_of(term)?;
    let index = alg.eval_index(term, &|v| asg.get(v))?;
    Ok(Elem { sort, index })
}

fn lookup_in<'a>(vars: &'a [Var], vals: &'a [usize]) -> impl Fn(&Var) -> Option<usize> + 'a {
    move |v| vars.iter().position(|w| w == v).map(|i| vals[i])
}

/// Validity of `phi` in `alg`, by recursion over the prefix.
pub fn sat(alg: &FiniteAlgebra, phi: &Formula) -> Result<bool> {
    alg.signature().sort_of(&phi.lhs)?;
    alg.signature().sort_of(&phi.rhs)?;
    let vars: Vec<Var> = phi.prefix.iter().map(|(_, v)| v.clone()).collect();
    let mut vals = vec![0; vars.len()];
    sat_rec(alg, phi, &vars, &mut vals, 0)
}

fn sat_rec(
    alg: &FiniteAlgebra,
    phi: &Formula,
    vars: &[Var],
    vals: &mut Vec<usize>,
    pos: usize,
) -> Result<bool> {
    if pos == vars.len() {
        let lookup = lookup_in(vars, vals);
        return Ok(alg.eval_index(&phi.lhs, &lookup)? == alg.eval_index(&phi.rhs, &lookup)?);
    }
    let n = alg.domain(&vars[pos].sort).len();
    let universal = phi.prefix[pos].0 == Quantifier::Forall;
    for e in 0..n {
        vals[pos] = e;
        let r = sat_rec(alg, phi, vars, vals, pos + 1)?;
        if universal && !r {
            return Ok(false);
        }
        if !universal && r {
            return Ok(true);
        }
    }
    Ok(universal)
}

/// A falsifying choice for `phi`: the universally quantified variables up
/// to the first existential position at which no element works, or `None`
/// when `phi` holds.
pub fn falsify(alg: &FiniteAlgebra, phi: &Formula) -> Result<Option<Vec<(Var, usize)>>> {
    if sat(alg, phi)? {
        return Ok(None);
    }
    let vars: Vec<Var> = phi.prefix.iter().map(|(_, v)| v.clone()).collect();
    let mut vals = vec![0; vars.len()];
    let mut witness = Vec::new();
    for pos in 0..vars.len() {
        if phi.prefix[pos].0 == Quantifier::Exists {
            break;
        }
        // the formula restricted to the chosen values is false; pick a value keeping it false
        let n = alg.domain(&vars[pos].sort).len();
        let mut found = false;
        for e in 0..n {
            vals[pos] = e;
            if !sat_rec(alg, phi, &vars, &mut vals.clone(), pos + 1)? {
                found = true;
                break;
            }
        }
        debug_assert!(found);
        witness.push((vars[pos].clone(), vals[pos]));
    }
    Ok(Some(witness))
}

pub fn sat_class(algs: &[FiniteAlgebra], theory: &[Formula]) -> Result<bool> {
    if let Some(first) = algs.first() {
        if algs.iter().any(|a| a.signature() != first.signature()) {
            return Err(Error::SignatureMismatch);
        }
    }
    for a in algs {
        for phi in theory {
            if !sat(a, phi)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `alg` reproduces its signature's fixed fragment: equal domains on
/// the fixed sorts and identical tables for the fixed symbols.
pub fn check_admitted(alg: &FiniteAlgebra) -> bool {
    let sig = alg.signature();
    let Some(frag) = sig.fixed_fragment() else {
        return true;
    };
    for s in sig.fixed_sorts() {
        let mine: BTreeSet<&Name> = alg.domain(s).iter().collect();
        let theirs: BTreeSet<&Name> = frag.domain(s).iter().collect();
        if mine != theirs || alg.domain(s).len() != frag.domain(s).len() {
            return false;
        }
    }
    for (fi, decl) in frag.signature().symbols().iter().enumerate() {
        let Some(ai) = sig.symbol_index(&decl.name) else {
            return false;
        };
        for (args, r) in frag.structure().entries(fi) {
            let mapped: Option<Vec<usize>> = args
                .iter()
                .zip(&decl.args)
                .map(|(&a, s)| alg.element_index(s, frag.element_name(s, a)).ok())
                .collect();
            let Some(mapped) = mapped else {
                return false;
            };
            let Some(got) = alg.structure().get(ai, &mapped) else {
                return false;
            };
            if alg.element_name(&decl.result, got) != frag.element_name(&decl.result, r) {
                return false;
            }
        }
    }
    true
}
