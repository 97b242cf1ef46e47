use super::*;
use crate::algebra::{sat, FiniteAlgebra, Formula, Prefix, Sort, VariableTuple};
use crate::error::Error;
use crate::syntax::tests::A2;
use crate::syntax::{parse_algebra, parse_formula, parse_term, parse_tuple};

const ONE: &str = "\
sort S
elems S: a
op c : -> S
op g : S -> S
table c = a
table g (a) = a
";

fn a2() -> FiniteAlgebra {
    parse_algebra(A2).unwrap()
}

fn tuple(alg: &FiniteAlgebra, vars: &str) -> VariableTuple {
    parse_tuple(alg.signature(), vars).unwrap()
}

fn formula(alg: &FiniteAlgebra, t: &VariableTuple, text: &str) -> Formula {
    parse_formula(alg.signature(), Some(t), text).unwrap()
}

fn labels(bg: &BehaviorGrammar) -> Vec<String> {
    bg.classes().map(|c| bg.vector_label(c)).collect()
}

#[test]
fn behavior_classes_of_a2() {
    let alg = a2();
    let bg = build_behavior(&[alg.clone()], &tuple(&alg, "x:Nat,y:Nat")).unwrap();
    assert_eq!(labels(&bg), ["0000", "0011", "0101", "0110"]);
    let names: Vec<&str> = bg.grammar().nonterminals().iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, ["N0000", "N0011", "N0101", "N0110"]);
    assert!(crate::grammar::is_deterministic(bg.grammar()));

    let bg = build_behavior(&[alg.clone()], &tuple(&alg, "x:Nat")).unwrap();
    assert_eq!(labels(&bg), ["00", "01"]);
    let t = tuple(&alg, "x:Nat");
    let x_plus_x = parse_term(alg.signature(), &t, "x + x").unwrap();
    assert_eq!(bg.vector_label(bg.class_of_term(&x_plus_x).unwrap()), "00");
}

#[test]
fn one_element_algebra_has_one_class() {
    let alg = parse_algebra(ONE).unwrap();
    let bg = build_behavior(&[alg.clone()], &tuple(&alg, "x:S")).unwrap();
    assert_eq!(bg.class_count(), 1);
    let ax = build_axioms(&[alg.clone()], &tuple(&alg, "x:S")).unwrap().reduce();
    let shown: Vec<String> = ax.universal().iter().map(|f| f.to_string()).collect();
    assert_eq!(shown, ["forall x : x = c", "forall x : x = g(x)"]);
}

#[test]
fn admitted_pairs_of_a2() {
    let alg = a2();
    let bg = build_behavior(&[alg.clone()], &tuple(&alg, "x:Nat,y:Nat")).unwrap();
    let q = |s: &str| {
        Prefix(
            s.chars()
                .map(|c| if c == 'A' { crate::Quantifier::Forall } else { crate::Quantifier::Exists })
                .collect(),
        )
    };
    let named = |pairs: Vec<(crate::grammar::NtId, crate::grammar::NtId)>| -> Vec<(String, String)> {
        pairs
            .into_iter()
            .map(|(a, b)| (bg.vector_label(a), bg.vector_label(b)))
            .collect()
    };
    let aa = named(admitted_pairs(&bg, &q("AA")).unwrap());
    assert_eq!(aa.len(), 4);
    assert!(aa.iter().all(|(a, b)| a == b));
    let ae = named(admitted_pairs(&bg, &q("AE")).unwrap());
    assert!(ae.contains(&("0110".into(), "0000".into())));
    assert!(!ae.contains(&("0101".into(), "0110".into())));
    let ee = named(admitted_pairs(&bg, &q("EE")).unwrap());
    // Every two vectors here agree at the first assignment.
    assert_eq!(ee.len(), 16);
}

#[test]
fn theorem_grammar_membership() {
    let alg = a2();
    let t = tuple(&alg, "x:Nat,y:Nat");
    let tg = build_theorem_grammar(&[alg.clone()], &t).unwrap();
    for (text, expected) in [
        ("forall x forall y : x + y = y + x", true),
        ("forall x exists y : x + y = 0", true),
        ("exists x forall y : y = x + y", true),
        ("forall x forall y : x = (x + y) + y", true),
        ("forall x exists y : y = x + y", false),
        ("forall x forall y : x = x", true),
        ("forall x : x + x = 0", true),
    ] {
        let phi = formula(&alg, &t, text);
        assert_eq!(tg.contains(&phi).unwrap(), expected, "{text}");
        assert_eq!(sat(&alg, &phi).unwrap(), expected, "{text}");
    }
    let xyz = tuple(&alg, "x:Nat,y:Nat,z:Nat");
    let assoc = formula(&alg, &xyz, "forall x forall y forall z : (x + y) + z = x + (y + z)");
    assert!(matches!(tg.contains(&assoc), Err(Error::OutOfFragment(_))));
    let dump = tg.grammar().to_string();
    assert!(dump.contains("N_∀∀ ::= N0000 = N0000 | N0011 = N0011 | N0101 = N0101 | N0110 = N0110\n"));
    assert!(dump.contains("N ::= forall x forall y : N_∀∀ | forall x exists y : N_∀∃"));
}

#[test]
fn extern_normal_forms_and_equations() {
    let alg = a2();
    let t = tuple(&alg, "x:Nat,y:Nat");
    let bg = build_behavior(&[alg.clone()], &t).unwrap();
    let er = extern_grammar(&bg).unwrap();
    let nfs: Vec<String> = er.normal_forms().iter().map(|t| t.to_string()).collect();
    assert_eq!(nfs, ["0", "x", "y", "x + y"]);
    let eqs: Vec<String> = er.equations().map(|(_, l, r)| format!("{l} = {r}")).collect();
    assert!(eqs.contains(&"0 = x + x".to_string()));
    assert!(!eqs.contains(&"0 = 0".to_string()));
    assert_eq!(eqs.len(), 15);

    let term = |s: &str| parse_term(alg.signature(), &t, s).unwrap();
    assert_eq!(er.normalize(&term("(x + y) + y")).unwrap(), term("x"));
    assert_eq!(er.normalize(&term("x")).unwrap(), term("x"));
    assert_eq!(er.normalize(&term("0 + (x + y)")).unwrap(), term("x + y"));
    let (nf, steps) = er.normalize_with_trace(&term("(x + y) + y")).unwrap();
    assert_eq!(nf, term("x"));
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].rule.lhs, term("(x + y) + y"));
    let (_, steps) = er.normalize_with_trace(&term("(y + x) + (0 + 0)")).unwrap();
    let chain: Vec<String> = steps.iter().map(|s| s.after.to_string()).collect();
    assert_eq!(chain, ["(x + y) + (0 + 0)", "(x + y) + 0", "x + y"]);
}

#[test]
fn axioms_of_a2() {
    let alg = a2();
    let t = tuple(&alg, "x:Nat,y:Nat");
    let ax = build_axioms(&[alg.clone()], &t).unwrap();
    let ae = Prefix(vec![crate::Quantifier::Forall, crate::Quantifier::Exists]);
    let ee = Prefix(vec![crate::Quantifier::Exists, crate::Quantifier::Exists]);
    let block: Vec<String> = ax.existential()[&ae].iter().map(|f| f.to_string()).collect();
    assert!(block.contains(&"forall x exists y : 0 = x + y".to_string()));
    assert!(!block.iter().any(|f| f.ends_with(": y = x + y")));
    assert_eq!(ax.chained(&ee), ["0 = x = y = x + y"]);
    assert_eq!(ax.existential()[&ee].len(), 6);
    for phi in ax.formulas() {
        assert!(sat(&alg, phi).unwrap(), "{phi}");
    }

    let reduced = ax.reduce();
    let shown: Vec<String> = reduced.formulas().map(|f| f.to_string()).collect();
    for expected in [
        "forall x : 0 = x + x",
        "forall x : x = x + 0",
        "forall x forall y : x + y = y + x",
        "forall x forall y : x = (x + y) + y",
        "forall x exists y : 0 = x + y",
    ] {
        assert!(shown.contains(&expected.to_string()), "{expected} missing from {shown:?}");
    }
    assert!(!shown.iter().any(|s| s.contains("0 = y + y")));
    assert!(!shown.iter().any(|s| s.contains("y + x = x + y")));
    for phi in reduced.formulas() {
        assert!(sat(&alg, phi).unwrap(), "{phi}");
        assert!(!phi.is_reflexive());
    }
}

#[test]
fn subsumption_respects_scope() {
    let alg = a2();
    let t = tuple(&alg, "x:Nat,y:Nat");
    let f = |s: &str| formula(&alg, &t, s);
    assert!(subsumes(&f("forall x forall y : 0 = x + x"), &f("forall x forall y : 0 = y + y")));
    assert!(subsumes(&f("forall x forall y : x + y = y + x"), &f("forall x forall y : y + x = x + y")));
    assert!(!subsumes(&f("forall x exists y : x = y"), &f("forall x exists y : y = y")));
    assert!(!subsumes(&f("forall x exists y : 0 = x + y"), &f("forall x exists y : 0 = y + y")));
    assert!(subsumes(&f("forall x exists y : 0 = x + y"), &f("forall x exists y : 0 = (x + x) + y")));
    assert!(!subsumes(&f("forall x forall y : 0 = x + x"), &f("forall x exists y : 0 = x + x")));
}

#[test]
fn derivations() {
    let alg = a2();
    let t = tuple(&alg, "x:Nat,y:Nat");
    let ax = build_axioms(&[alg.clone()], &t).unwrap();
    let d = derive(&ax, &formula(&alg, &t, "forall x exists y : x + y = 0")).unwrap();
    assert!(d.succeeded());
    assert_eq!(d.lhs_normal.to_string(), "x + y");
    assert_eq!(d.rhs_normal.to_string(), "0");
    assert!(matches!(d.outcome, Outcome::Axiom(_)));

    let d = derive(&ax, &formula(&alg, &t, "forall x exists y : y = x + y")).unwrap();
    assert!(!d.succeeded());

    let d = derive(&ax, &formula(&alg, &t, "forall x forall y : 0 = 0")).unwrap();
    assert_eq!(d.outcome, Outcome::Reflexive);
    assert!(d.lhs_steps.is_empty() && d.rhs_steps.is_empty());

    let d = derive(&ax, &formula(&alg, &t, "forall x forall y : x + y = y + x")).unwrap();
    assert_eq!(d.outcome, Outcome::Reflexive);
    assert_eq!(d.rhs_steps.len(), 1);
    assert!(d.to_string().contains("derived"));

    let reduced = ax.reduce();
    let d = derive(&reduced, &formula(&alg, &t, "forall x exists y : x + y = 0")).unwrap();
    assert!(d.succeeded());

    let xyz = tuple(&alg, "x:Nat,y:Nat,z:Nat");
    let assoc = formula(&alg, &xyz, "forall x forall y forall z : (x + y) + z = x + (y + z)");
    assert!(matches!(derive(&ax, &assoc), Err(Error::OutOfFragment(_))));
}

#[test]
fn variety_steps() {
    let alg = a2();
    let nat = Sort::new("Nat");
    let steps = variety_sequence(&[alg.clone()], &[nat.clone(), nat.clone(), nat], None).unwrap();
    let text = |i: usize| -> Vec<String> { steps[i].axioms.iter().map(|f| f.to_string()).collect() };
    let comm = "forall x1 forall x2 : x1 + x2 = x2 + x1".to_string();
    assert!(!text(0).contains(&comm));
    assert!(text(1).contains(&comm));
    let t3 = &steps[2].tuple;
    let assoc = formula(&alg, t3, "forall x1 forall x2 forall x3 : (x1 + x2) + x3 = x1 + (x2 + x3)");
    let in_step = |i: usize| {
        steps[i]
            .axioms
            .iter()
            .filter_map(|a| a.extend_to(t3))
            .any(|a| subsumes(&a, &assoc))
    };
    assert!(!in_step(1));
    assert!(in_step(2));
    for s in &steps {
        for phi in &s.axioms {
            assert!(sat(&alg, phi).unwrap());
        }
    }
}

const TRIVIAL: &str = "\
sort Nat
elems Nat: 0
op 0 : -> Nat
op + : Nat, Nat -> Nat
table 0 = 0
table + (0,0) = 0
";

#[test]
fn class_of_algebras() {
    let alg = a2();
    let triv = parse_algebra(TRIVIAL).unwrap();
    let t = tuple(&alg, "x:Nat");
    let bg = build_behavior(&[alg.clone(), triv.clone()], &t).unwrap();
    assert_eq!(labels(&bg), ["000", "010"]);
    assert_eq!(bg.segments(), [0..2, 2..3]);
    let tg = TheoremGrammar::new(bg).unwrap();
    let xy = tuple(&alg, "x:Nat,y:Nat");
    let tg2 = build_theorem_grammar(&[alg.clone(), triv.clone()], &xy).unwrap();
    for text in ["forall x : x + x = 0", "forall x : x = 0", "exists x : x = 0", "forall x : x = x + 0"] {
        let phi = formula(&alg, &t, text);
        let expected = sat(&alg, &phi).unwrap() && sat(&triv, &phi).unwrap();
        assert_eq!(tg.contains(&phi).unwrap(), expected, "{text}");
        assert_eq!(tg2.contains(&phi).unwrap(), expected, "{text}");
    }
    let bigger = parse_algebra(ONE).unwrap();
    assert!(matches!(build_behavior(&[alg, bigger], &t), Err(Error::SignatureMismatch)));
}
