use std::collections::{BTreeMap, HashMap};

use crate::algebra::{Assignment, Elem, Signature, Sort, Structure, VariableTuple};
use crate::error::{Error, Result};

use super::{Alphabet, Alternative, NtId, Profile, Symbol, TreeGrammar};

/// A grammar built from tables, with the class of every element.
#[derive(Clone, Debug)]
pub struct Incorporated {
    pub grammar: TreeGrammar,
    pub classes: BTreeMap<Elem, NtId>,
}

impl Incorporated {
    pub fn class_of(&self, elem: &Elem) -> Option<NtId> {
        self.classes.get(elem).copied()
    }
}

fn signature_alphabet(sig: &Signature) -> Alphabet {
    sig.symbols()
        .iter()
        .map(|d| {
            (
                Symbol::Op(d.name.clone()),
                Profile::new(d.args.clone(), d.result.clone()),
            )
        })
        .collect()
}

fn element_classes(st: &Structure, g: &mut TreeGrammar) -> BTreeMap<Elem, NtId> {
    let sig = st.signature();
    let mut count: HashMap<&str, usize> = HashMap::new();
    for s in sig.sorts() {
        for e in st.domain(s) {
            *count.entry(e).or_default() += 1;
        }
    }
    let mut classes = BTreeMap::new();
    for s in sig.sorts() {
        for (index, e) in st.domain(s).iter().enumerate() {
            let name = if count[&**e] > 1 {
                format!("N{s}.{e}")
            } else {
                format!("N{e}")
            };
            let id = g.add_nonterminal(name, s.clone());
            classes.insert(
                Elem {
                    sort: s.clone(),
                    index,
                },
                id,
            );
        }
    }
    classes
}

/// One nonterminal per element and one alternative per table entry, so
/// `L(N_a)` is the set of ground terms denoting `a`. Partial tables give
/// the terms derivable from the recorded entries.
pub fn incorporate<S: AsRef<Structure>>(input: &S) -> Incorporated {
    let st = input.as_ref();
    let sig = st.signature();
    let mut g = TreeGrammar::new(signature_alphabet(sig));
    let classes = element_classes(st, &mut g);
    for (i, d) in sig.symbols().iter().enumerate() {
        for (args, r) in st.entries(i) {
            let head = classes[&Elem {
                sort: d.result.clone(),
                index: r,
            }];
            let args = args
                .iter()
                .zip(&d.args)
                .map(|(&a, s)| {
                    classes[&Elem {
                        sort: s.clone(),
                        index: a,
                    }]
                })
                .collect();
            g.push_unchecked(head, Alternative::Func(Symbol::Op(d.name.clone()), args));
        }
    }
    Incorporated { grammar: g, classes }
}

/// [`incorporate`] over the extended alphabet `Σ_A`: every element not
/// already named by a constant of its sort also becomes a constant of its
/// own class.
pub fn incorporate_full<S: AsRef<Structure>>(input: &S) -> Incorporated {
    let st = input.as_ref();
    let mut inc = incorporate(input);
    let sig = st.signature();
    for (elem, &nt) in &inc.classes {
        let name = st.element_name(&elem.sort, elem.index);
        let shadowed = sig
            .symbol(name)
            .is_some_and(|d| d.arity() == 0 && d.result == elem.sort);
        if shadowed {
            continue;
        }
        let sym = Symbol::Elem(elem.sort.clone(), name.into());
        inc.grammar
            .alphabet_mut()
            .insert(sym.clone(), Profile::new(vec![], elem.sort.clone()));
        inc.grammar.push_unchecked(nt, Alternative::Func(sym, vec![]));
    }
    inc
}

/// Adds each variable of `σ` as a constant alternative of its value's class.
pub fn lift(inc: &Incorporated, sigma: &Assignment) -> Result<Incorporated> {
    let mut out = inc.clone();
    for (var, elem) in sigma.iter() {
        if var.sort != elem.sort {
            return Err(Error::SortMismatch {
                context: format!("binding of {}", var.name),
                expected: var.sort.to_string(),
                found: elem.sort.to_string(),
            });
        }
        let nt = inc.class_of(elem).ok_or_else(|| Error::UnknownElement {
            sort: elem.sort.to_string(),
            element: elem.index.to_string(),
        })?;
        let sym = Symbol::Var(var.clone());
        out.grammar
            .alphabet_mut()
            .insert(sym.clone(), Profile::new(vec![], var.sort.clone()));
        out.grammar.push_unchecked(nt, Alternative::Func(sym, vec![]));
    }
    Ok(out)
}

/// Keeps only alternatives over symbols of `sig` (with matching profile) and
/// variables of `vars`.
pub fn restrict(g: &TreeGrammar, sig: &Signature, vars: &VariableTuple) -> TreeGrammar {
    let keep = |sym: &Symbol, p: &Profile| match sym {
        Symbol::Op(f) => sig
            .symbol(f)
            .is_some_and(|d| d.args == p.args && d.result == p.result),
        Symbol::Var(v) => vars.vars().contains(v),
        _ => false,
    };
    let mut out = g.clone();
    out.alphabet_mut().retain(|s, p| keep(s, p));
    for id in g.ids() {
        let alphabet = out.alphabet().clone();
        out.rule_mut(id).retain(|alt| match alt {
            Alternative::Chain(_) => true,
            Alternative::Func(s, _) => alphabet.contains_key(s),
        });
    }
    out
}

/// A nonterminal per input grammar and a combined one, for the product.
#[derive(Clone, Debug)]
pub struct Product {
    pub grammar: TreeGrammar,
    /// For each product nonterminal, its component in every input grammar.
    pub components: Vec<Vec<NtId>>,
}

/// Joins component names: `N0`,`N0`,`N1`,`N1` gives `N0011`; longer
/// labels give `N<a,b>`.
pub fn product_name(names: &[&str]) -> String {
    let labels: Vec<&str> = names
        .iter()
        .map(|n| n.strip_prefix('N').unwrap_or(n))
        .collect();
    if labels.iter().all(|l| l.chars().count() == 1) {
        format!("N{}", labels.concat())
    } else {
        format!("N<{}>", labels.join(","))
    }
}

pub fn intersect(gs: &[&TreeGrammar]) -> Result<Product> {
    intersect_capped(gs, None)
}

/// Product construction, bottom-up from the constants so that only
/// nonempty product states are ever created; when every input has a start,
/// states unreachable from the product start are pruned.
pub fn intersect_capped(gs: &[&TreeGrammar], cap: Option<usize>) -> Result<Product> {
    let first = gs
        .first()
        .ok_or_else(|| Error::Invalid("intersect of no grammars".into()))?;
    if gs.iter().any(|g| g.alphabet() != first.alphabet()) {
        return Err(Error::AlphabetMismatch);
    }
    let alphabet = first.alphabet().clone();
    let symbols: Vec<(&Symbol, &Profile)> = alphabet.iter().collect();
    let sym_index: HashMap<&Symbol, usize> =
        symbols.iter().enumerate().map(|(i, (s, _))| (*s, i)).collect();

    // Per grammar: symbol → argument tuple → heads, chains expanded.
    let tables: Vec<Vec<HashMap<Vec<NtId>, Vec<NtId>>>> = gs
        .iter()
        .map(|g| {
            let mut t = vec![HashMap::new(); symbols.len()];
            for ((sym, args), heads) in g.expanded_heads() {
                t[sym_index[&sym]].insert(args, heads);
            }
            t
        })
        .collect();

    let mut b = ProductBuilder {
        gs,
        cap,
        grammar: TreeGrammar::new(alphabet.clone()),
        components: Vec::new(),
        ids: HashMap::new(),
    };

    for (si, (sym, p)) in symbols.iter().enumerate() {
        if p.args.is_empty() {
            b.combine(&tables, si, sym, &[])?;
        }
    }

    let mut by_sort: HashMap<Sort, Vec<NtId>> = HashMap::new();
    let mut cur = 0;
    while cur < b.components.len() {
        let cur_id = NtId(cur);
        let sort = b.grammar.nonterminal(cur_id).sort.clone();
        by_sort.entry(sort.clone()).or_default().push(cur_id);
        for (si, (sym, p)) in symbols.iter().enumerate() {
            for pos in 0..p.args.len() {
                if p.args[pos] != sort {
                    continue;
                }
                // Tuples whose first occurrence of the newest state is `pos`.
                let mut choices: Vec<Vec<NtId>> = Vec::with_capacity(p.args.len());
                let mut empty = false;
                for (j, s) in p.args.iter().enumerate() {
                    let pool = by_sort.get(s).map(Vec::as_slice).unwrap_or(&[]);
                    let c: Vec<NtId> = match j.cmp(&pos) {
                        std::cmp::Ordering::Less => {
                            pool.iter().copied().filter(|&n| n < cur_id).collect()
                        }
                        std::cmp::Ordering::Equal => vec![cur_id],
                        std::cmp::Ordering::Greater => pool.to_vec(),
                    };
                    empty |= c.is_empty();
                    choices.push(c);
                }
                if empty {
                    continue;
                }
                for args in cartesian(&choices) {
                    b.combine(&tables, si, sym, &args)?;
                }
            }
        }
        cur += 1;
    }

    let ProductBuilder {
        mut grammar,
        mut components,
        ids,
        ..
    } = b;

    let starts: Option<Vec<NtId>> = gs.iter().map(|g| g.start()).collect();
    if let Some(starts) = starts {
        match ids.get(&starts) {
            Some(&s) => {
                grammar.set_start(Some(s));
                let reach = grammar.reachable_from(&[s]);
                let keep: Vec<NtId> = grammar.ids().filter(|n| reach[n.0]).collect();
                components = keep.iter().map(|k| components[k.0].clone()).collect();
                grammar = grammar.retain(&keep).0;
            }
            None => {
                // Empty start language: nothing survives but the start.
                let names: Vec<&str> = gs.iter().zip(&starts).map(|(g, s)| g.name(*s)).collect();
                let mut g = TreeGrammar::new(alphabet);
                let s = g.add_nonterminal(
                    product_name(&names),
                    gs[0].nonterminal(starts[0]).sort.clone(),
                );
                g.set_start(Some(s));
                grammar = g;
                components = vec![starts];
            }
        }
    }
    Ok(Product {
        grammar,
        components,
    })
}

struct ProductBuilder<'a> {
    gs: &'a [&'a TreeGrammar],
    cap: Option<usize>,
    grammar: TreeGrammar,
    components: Vec<Vec<NtId>>,
    ids: HashMap<Vec<NtId>, NtId>,
}

impl ProductBuilder<'_> {
    fn state(&mut self, tuple: Vec<NtId>) -> Result<NtId> {
        if let Some(&id) = self.ids.get(&tuple) {
            return Ok(id);
        }
        if let Some(cap) = self.cap {
            if self.components.len() >= cap {
                return Err(Error::ResourceLimit {
                    what: "product nonterminals".into(),
                    cap,
                });
            }
        }
        let names: Vec<&str> = self
            .gs
            .iter()
            .zip(&tuple)
            .map(|(g, n)| g.name(*n))
            .collect();
        let sort = self.gs[0].nonterminal(tuple[0]).sort.clone();
        let id = self.grammar.add_nonterminal(product_name(&names), sort);
        self.ids.insert(tuple.clone(), id);
        self.components.push(tuple);
        Ok(id)
    }

    fn combine(
        &mut self,
        tables: &[Vec<HashMap<Vec<NtId>, Vec<NtId>>>],
        si: usize,
        sym: &Symbol,
        args: &[NtId],
    ) -> Result<()> {
        let mut heads: Vec<Vec<NtId>> = Vec::with_capacity(tables.len());
        for (gi, t) in tables.iter().enumerate() {
            let key: Vec<NtId> = args.iter().map(|a| self.components[a.0][gi]).collect();
            match t[si].get(&key) {
                Some(h) => heads.push(h.clone()),
                None => return Ok(()),
            }
        }
        for tuple in cartesian(&heads) {
            let head = self.state(tuple)?;
            self.grammar
                .push_unchecked(head, Alternative::Func(sym.clone(), args.to_vec()));
        }
        Ok(())
    }
}

fn cartesian<T: Copy>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for &x in c {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Disjoint union with a fresh start `N` chaining to each input's start.
pub fn unite(gs: &[&TreeGrammar]) -> Result<TreeGrammar> {
    let first = gs
        .first()
        .ok_or_else(|| Error::Invalid("unite of no grammars".into()))?;
    let mut starts = Vec::new();
    for g in gs {
        if g.alphabet() != first.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        starts.push(g.start().ok_or(Error::MissingStart)?);
    }
    let sort = first.nonterminal(starts[0]).sort.clone();
    for (g, s) in gs.iter().zip(&starts) {
        let found = &g.nonterminal(*s).sort;
        if *found != sort {
            return Err(Error::SortMismatch {
                context: "start symbols of unite".into(),
                expected: sort.to_string(),
                found: found.to_string(),
            });
        }
    }
    let mut out = TreeGrammar::new(first.alphabet().clone());
    let mut new_starts = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        let offset = out.nonterminals().len();
        for n in g.nonterminals() {
            let name = if gs.len() == 1 {
                n.name.clone()
            } else {
                format!("{}@{}", n.name, i + 1)
            };
            out.add_nonterminal(name, n.sort.clone());
        }
        let shift = |n: NtId| NtId(n.0 + offset);
        for id in g.ids() {
            for alt in g.rule(id) {
                let alt = match alt {
                    Alternative::Chain(m) => Alternative::Chain(shift(*m)),
                    Alternative::Func(s, args) => {
                        Alternative::Func(s.clone(), args.iter().map(|a| shift(*a)).collect())
                    }
                };
                out.push_unchecked(shift(id), alt);
            }
        }
        new_starts.push(shift(starts[i]));
    }
    let mut name = String::from("N");
    while out.find(&name).is_some() {
        name.push('\'');
    }
    let start = out.add_nonterminal(name, sort);
    for s in new_starts {
        out.push_unchecked(start, Alternative::Chain(s));
    }
    out.set_start(Some(start));
    Ok(out)
}

/// Adds a fresh nonterminal whose only alternative is `symbol(args)`.
/// Equation and prefix symbols join the alphabet on first use.
pub fn tag(g: &TreeGrammar, symbol: Symbol, args: &[NtId]) -> Result<(TreeGrammar, NtId)> {
    let profile = g
        .alphabet()
        .get(&symbol)
        .cloned()
        .or_else(|| symbol.builtin_profile())
        .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
    if profile.args.len() != args.len() {
        return Err(Error::ArityMismatch {
            symbol: symbol.to_string(),
            expected: profile.args.len(),
            found: args.len(),
        });
    }
    let mut out = g.clone();
    out.alphabet_mut().insert(symbol.clone(), profile.clone());
    let names: Vec<&str> = args.iter().map(|a| g.name(*a)).collect();
    let id = out.add_nonterminal(format!("{symbol}({})", names.join(",")), profile.result);
    out.add_alternative(id, Alternative::Func(symbol, args.to_vec()))?;
    Ok((out, id))
}

/// One nonterminal `T_S` per sort generating every term of `T(Σ, S, vars)`.
pub fn universal_grammar(sig: &Signature, vars: &VariableTuple) -> (TreeGrammar, BTreeMap<Sort, NtId>) {
    let mut alphabet = signature_alphabet(sig);
    for v in vars.vars() {
        alphabet.insert(Symbol::Var(v.clone()), Profile::new(vec![], v.sort.clone()));
    }
    let mut g = TreeGrammar::new(alphabet);
    let ids: BTreeMap<Sort, NtId> = sig
        .sorts()
        .iter()
        .map(|s| (s.clone(), g.add_nonterminal(format!("T_{s}"), s.clone())))
        .collect();
    for v in vars.vars() {
        g.push_unchecked(ids[&v.sort], Alternative::Func(Symbol::Var(v.clone()), vec![]));
    }
    for d in sig.symbols() {
        let args = d.args.iter().map(|s| ids[s]).collect();
        g.push_unchecked(ids[&d.result], Alternative::Func(Symbol::Op(d.name.clone()), args));
    }
    (g, ids)
}
