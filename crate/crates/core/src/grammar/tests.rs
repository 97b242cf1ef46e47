use super::*;
use crate::algebra::{Assignment, Elem, FiniteAlgebra, Signature, Structure, SymbolDecl, VariableTuple};
use crate::syntax::tests::A2;
use crate::syntax::{parse_algebra, parse_tuple};

pub(crate) fn a2() -> FiniteAlgebra {
    parse_algebra(A2).unwrap()
}

fn nat() -> Sort {
    Sort::new("Nat")
}

fn elem(i: usize) -> Elem {
    Elem {
        sort: nat(),
        index: i,
    }
}

fn xy() -> VariableTuple {
    parse_tuple(a2().signature(), "x:Nat,y:Nat").unwrap()
}

/// The four lifted copies of the A₂ grammar, one per assignment of x, y.
pub(crate) fn lifted_a2() -> Vec<TreeGrammar> {
    let alg = a2();
    let inc = incorporate(&alg);
    let t = xy();
    let mut out = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            let mut s = Assignment::new();
            s.bind(&t.vars()[0], elem(a)).unwrap();
            s.bind(&t.vars()[1], elem(b)).unwrap();
            out.push(lift(&inc, &s).unwrap().grammar);
        }
    }
    out
}

pub(crate) fn a2_product() -> TreeGrammar {
    let gs = lifted_a2();
    let refs: Vec<&TreeGrammar> = gs.iter().collect();
    intersect(&refs).unwrap().grammar
}

fn tree(text: &str) -> Tree {
    let t = crate::syntax::parse_term(a2().signature(), &xy(), text).unwrap();
    Tree::from_term(&t)
}

#[test]
fn incorporate_a2() {
    let inc = incorporate(&a2());
    let g = &inc.grammar;
    assert_eq!(g.size(), 5);
    let dump = g.to_string();
    assert!(dump.contains("N0 ::= 0 | N0 + N0 | N1 + N1\n"), "{dump}");
    assert!(dump.contains("N1 ::= N0 + N1 | N1 + N0\n"), "{dump}");
    assert!(dump.starts_with("sort N0 : Nat\nsort N1 : Nat\n"));
    assert!(is_deterministic(g));
}

#[test]
fn incorporate_single_class() {
    let s = Sort::new("S");
    let sig = Signature::new(
        vec![s.clone()],
        vec![
            SymbolDecl::new("c", vec![], s.clone()),
            SymbolDecl::new("g", vec![s.clone()], s.clone()),
        ],
    )
    .unwrap();
    let mut st = Structure::new(sig, vec![(s, vec!["a".into()])]).unwrap();
    st.set("c", &[], 0).unwrap();
    st.set("g", &[0], 0).unwrap();
    let inc = incorporate(&FiniteAlgebra::new(st).unwrap());
    assert_eq!(inc.grammar.to_string(), "sort Na : S\nNa ::= c | g(Na)\n");
}

#[test]
fn lift_adds_variable_constants() {
    let inc = incorporate(&a2());
    let t = xy();
    let mut s = Assignment::new();
    s.bind(&t.vars()[0], elem(0)).unwrap();
    s.bind(&t.vars()[1], elem(0)).unwrap();
    let lifted = lift(&inc, &s).unwrap();
    assert_eq!(lifted.grammar.size(), 7);
    assert!(lifted.grammar.to_string().contains("N0 ::= 0 | N0 + N0 | N1 + N1 | x | y\n"));

    let same = lift(&inc, &Assignment::new()).unwrap();
    assert_eq!(same.grammar, inc.grammar);

    let mut one = Assignment::new();
    one.bind(&t.vars()[0], elem(1)).unwrap();
    let g = lift(&inc, &one).unwrap().grammar;
    let n1 = g.find("N1").unwrap();
    assert!(member(&g, n1, &tree("x")));
    assert!(member(&g, n1, &tree("x + 0")));
    assert!(!member(&g, g.find("N0").unwrap(), &tree("x")));
}

#[test]
fn product_has_four_classes() {
    let g = a2_product();
    let mut names: Vec<&str> = g.nonterminals().iter().map(|n| n.name.as_str()).collect();
    names.sort();
    assert_eq!(names, ["N0000", "N0011", "N0101", "N0110"]);
    assert!(is_deterministic(&g));
    let n = |s: &str| g.find(s).unwrap();
    assert!(member(&g, n("N0110"), &tree("x + y")));
    assert!(member(&g, n("N0110"), &tree("y + x")));
    assert!(!member(&g, n("N0000"), &tree("x")));
    assert!(member(&g, n("N0000"), &tree("x + x")));
    assert!(member(&g, n("N0011"), &tree("x + 0")));
    let unknown = Tree::leaf(Symbol::op("*"));
    assert!(!member(&g, n("N0000"), &unknown));
}

#[test]
fn intersect_trivial_cases() {
    let g = lifted_a2().remove(1);
    let p = intersect(&[&g]).unwrap();
    assert_eq!(p.grammar.size(), g.size());
    assert_eq!(p.grammar.find("N1").map(|n| p.components[n.0][0]), g.find("N1"));
    // Without variables every ground term denotes 0, so N1 is empty.
    let ground = incorporate(&a2()).grammar;
    let p = intersect(&[&ground]).unwrap();
    assert_eq!(p.grammar.to_string(), "sort N0 : Nat\nN0 ::= 0 | N0 + N0\n");

    let mut empty = TreeGrammar::new(g.alphabet().clone());
    empty.add_nonterminal("E0", nat());
    empty.add_nonterminal("E1", nat());
    let p = intersect(&[&g, &empty]).unwrap();
    assert_eq!(p.grammar.nonterminals().len(), 0);

    assert_eq!(intersect(&[&g, &ground]).unwrap_err(), Error::AlphabetMismatch);
}

#[test]
fn intersect_with_starts_prunes() {
    let mut gs = lifted_a2();
    for g in &mut gs {
        let s = g.find("N0");
        g.set_start(s);
    }
    let refs: Vec<&TreeGrammar> = gs.iter().collect();
    let p = intersect(&refs).unwrap();
    let start = p.grammar.start().unwrap();
    assert_eq!(p.grammar.name(start), "N0000");
    // N0000 ::= 0 | N0000 + N0000 | N0011 + N0011 | … reaches everything.
    assert_eq!(p.grammar.nonterminals().len(), 4);

    let empty_start = {
        let mut g = gs[0].clone();
        let s = g.add_nonterminal("Nz", nat());
        g.set_start(Some(s));
        g
    };
    let mut refs: Vec<&TreeGrammar> = gs.iter().collect();
    refs[0] = &empty_start;
    let p = intersect(&refs).unwrap();
    assert_eq!(p.grammar.nonterminals().len(), 1);
    assert_eq!(p.grammar.size(), 0);
}

#[test]
fn intersect_cap() {
    let gs = lifted_a2();
    let refs: Vec<&TreeGrammar> = gs.iter().collect();
    assert!(matches!(
        intersect_capped(&refs, Some(3)),
        Err(Error::ResourceLimit { cap: 3, .. })
    ));
    assert!(intersect_capped(&refs, Some(4)).is_ok());
}

#[test]
fn restrict_drops_bare_elements() {
    let full = incorporate_full(&a2());
    let g = &full.grammar;
    assert!(g.to_string().contains("N1 ::= N0 + N1 | N1 + N0 | [1]\n"));
    // 0 is a constant of the signature, so it never appears as an element.
    assert!(!g.alphabet().contains_key(&Symbol::Elem(nat(), "0".into())));
    let r = restrict(g, a2().signature(), &VariableTuple::default());
    assert_eq!(r, incorporate(&a2()).grammar);
    assert_eq!(restrict(&r, a2().signature(), &VariableTuple::default()), r);

    let none = Signature::new(vec![nat()], vec![]).unwrap();
    let r = restrict(g, &none, &VariableTuple::default());
    assert_eq!(r.size(), 0);
}

#[test]
fn unite_and_tag() {
    let mut g = incorporate(&a2()).grammar;
    let n0 = g.find("N0").unwrap();
    g.set_start(Some(n0));
    let u = unite(&[&g]).unwrap();
    let s = u.start().unwrap();
    assert!(member(&u, s, &Tree::from_term(&crate::algebra::Term::constant("0"))));
    assert!(!is_deterministic(&unite(&[&g, &g]).unwrap()));

    let mut empty = TreeGrammar::new(g.alphabet().clone());
    let e = empty.add_nonterminal("E", nat());
    empty.set_start(Some(e));
    let u = unite(&[&empty, &g]).unwrap();
    let zero_plus = tree("0 + 0");
    assert!(member(&u, u.start().unwrap(), &zero_plus));

    let mut bad = g.clone();
    let b = bad.add_nonterminal("B", Sort::new("Other"));
    bad.set_start(Some(b));
    assert!(matches!(unite(&[&g, &bad]), Err(Error::SortMismatch { .. })));

    let (t, c) = tag(&g, Symbol::op("0"), &[]).unwrap();
    assert_eq!(t.size(), g.size() + 1);
    let hm = heights_naive(&t, &Weights::default());
    assert_eq!(enumerate(&t, c, &hm, 10, 10).unwrap().len(), 1);
    assert!(matches!(
        tag(&g, Symbol::op("+"), &[n0]),
        Err(Error::ArityMismatch { .. })
    ));
}

#[test]
fn tag_equation_and_prefix() {
    let g = a2_product();
    let n = g.find("N0110").unwrap();
    let (g2, eq) = tag(&g, Symbol::Eq(nat()), &[n, n]).unwrap();
    assert_eq!(g2.nonterminal(eq).sort, Sort::new(EQUATION_SORT));
    let t = xy();
    let prefix: Vec<_> = t.vars().iter().map(|v| (crate::algebra::Quantifier::Forall, v.clone())).collect();
    let (g3, top) = tag(&g2, Symbol::Prefix(prefix), &[eq]).unwrap();
    let phi = crate::syntax::parse_formula(a2().signature(), Some(&t), "forall x forall y : x + y = y + x").unwrap();
    assert!(member(&g3, top, &Tree::from_formula(&phi)));
    let psi = crate::syntax::parse_formula(a2().signature(), Some(&t), "forall x forall y : x + y = x").unwrap();
    assert!(!member(&g3, top, &Tree::from_formula(&psi)));
    assert_eq!(Tree::from_formula(&phi).to_formula(), Some(phi));
}

#[test]
fn heights_of_product() {
    let g = a2_product();
    let w = Weights::default();
    let naive = heights_naive(&g, &w);
    let liquid = heights_liquid(&g, &w);
    assert_eq!(naive, liquid);
    assert_eq!(naive.get(g.find("N0011").unwrap()), Height::Finite(0));
    assert_eq!(naive.get(g.find("N0101").unwrap()), Height::Finite(0));
    assert_eq!(naive.get(g.find("N0000").unwrap()), Height::Finite(1));
    assert_eq!(naive.get(g.find("N0110").unwrap()), Height::Finite(1));
}

#[test]
fn heights_edge_cases() {
    let mut g = TreeGrammar::new(Alphabet::new());
    g.alphabet_mut().insert(Symbol::op("c"), Profile::new(vec![], nat()));
    let n = g.add_nonterminal("N", nat());
    let m = g.add_nonterminal("M", nat());
    let e = g.add_nonterminal("E", nat());
    g.add_alternative(n, Alternative::Chain(m)).unwrap();
    g.add_alternative(m, Alternative::Chain(n)).unwrap();
    for hm in [heights_naive(&g, &Weights::default()), heights_liquid(&g, &Weights::default())] {
        assert_eq!(hm.get(n), Height::Infinite);
        assert_eq!(hm.get(m), Height::Infinite);
        assert_eq!(hm.get(e), Height::Infinite);
        assert!(enumerate(&g, n, &hm, 5, 5).unwrap().is_empty());
    }
    let c = g.add_nonterminal("C", nat());
    g.add_alternative(c, Alternative::Func(Symbol::op("c"), vec![])).unwrap();
    assert_eq!(heights_liquid(&g, &Weights::default()).get(c), Height::Finite(1));
}

#[test]
fn enumerate_product_classes() {
    let g = a2_product();
    let hm = heights_liquid(&g, &Weights::default());
    let n0110 = g.find("N0110").unwrap();
    let first: Vec<String> = enumerate(&g, n0110, &hm, 6, 2)
        .unwrap()
        .iter()
        .map(|t| t.to_string())
        .collect();
    assert_eq!(first, ["x + y", "y + x"]);

    let n0011 = g.find("N0011").unwrap();
    let only: Vec<String> = enumerate(&g, n0011, &hm, 0, 100)
        .unwrap()
        .iter()
        .map(|t| t.to_string())
        .collect();
    assert_eq!(only, ["x"]);

    let all = enumerate(&g, g.find("N0000").unwrap(), &hm, 2, 10_000).unwrap();
    let w = hm.weights();
    for pair in all.windows(2) {
        let key = |t: &Tree| (t.height(w), t.size());
        assert!(key(&pair[0]) <= key(&pair[1]));
        assert_ne!(pair[0], pair[1]);
    }
    assert_eq!(all[0].to_string(), "0");
}

#[test]
fn enumerate_detects_unbounded_layer() {
    let mut g = TreeGrammar::new(Alphabet::new());
    g.alphabet_mut().insert(Symbol::op("c"), Profile::new(vec![], nat()));
    g.alphabet_mut().insert(Symbol::op("s"), Profile::new(vec![nat()], nat()));
    let n = g.add_nonterminal("N", nat());
    g.add_alternative(n, Alternative::Func(Symbol::op("c"), vec![])).unwrap();
    g.add_alternative(n, Alternative::Func(Symbol::op("s"), vec![n])).unwrap();
    let w = Weights::default().with(Symbol::op("s"), 0);
    let hm = heights_liquid(&g, &w);
    assert_eq!(hm, heights_naive(&g, &w));
    assert!(matches!(
        enumerate(&g, n, &hm, 3, 10),
        Err(Error::UnboundedLayer { height: 1, .. })
    ));
}
