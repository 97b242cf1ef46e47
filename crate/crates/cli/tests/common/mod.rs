#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use finax::grammar::{Alphabet, Alternative, NtId, Profile, Symbol, TreeGrammar};
use finax::syntax::{parse_algebra, parse_tuple};
use finax::{eval, Assignment, Elem, FiniteAlgebra, Signature, Sort, Term, Var, VariableTuple};
use rand::rngs::StdRng;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn data_str(name: &str) -> String {
    data(name).display().to_string()
}

pub fn load(name: &str) -> FiniteAlgebra {
    parse_algebra(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn tuple(alg: &FiniteAlgebra, vars: &str) -> VariableTuple {
    parse_tuple(alg.signature(), vars).unwrap()
}

/// Runs the CLI in-process.
pub fn cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["finax"];
    argv.extend_from_slice(args);
    finax_cli::run_command(argv)
}

/// Every term over the signature and `vars` of depth at most `depth`
/// (leaves have depth 1), by sort. Built directly from the signature.
pub fn all_terms(sig: &Signature, vars: &VariableTuple, depth: usize) -> BTreeMap<Sort, Vec<Term>> {
    let mut level: BTreeMap<Sort, Vec<Term>> = sig.sorts().iter().map(|s| (s.clone(), Vec::new())).collect();
    for _ in 0..depth {
        let mut next: BTreeMap<Sort, Vec<Term>> = sig.sorts().iter().map(|s| (s.clone(), Vec::new())).collect();
        for v in vars.vars() {
            next.get_mut(&v.sort).unwrap().push(Term::Var(v.clone()));
        }
        for d in sig.symbols() {
            let pools: Vec<&Vec<Term>> = d.args.iter().map(|s| &level[s]).collect();
            let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
            for pool in pools {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        pool.iter().map(move |t| {
                            let mut c = c.clone();
                            c.push(t.clone());
                            c
                        })
                    })
                    .collect();
            }
            for args in combos {
                next.get_mut(&d.result).unwrap().push(Term::app(&*d.name, args));
            }
        }
        level = next;
    }
    level
}

/// Every assignment of `vars` into `alg`, first variable slowest.
pub fn assignments(alg: &FiniteAlgebra, vars: &[Var]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        let n = alg.domain(&v.sort).len();
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |i| {
                    let mut a = a.clone();
                    a.bind(
                        v,
                        Elem {
                            sort: v.sort.clone(),
                            index: i,
                        },
                    )
                    .unwrap();
                    a
                })
            })
            .collect();
    }
    out
}

/// The value of `t` under every assignment.
pub fn behavior(alg: &FiniteAlgebra, vars: &[Var], t: &Term) -> Vec<usize> {
    assignments(alg, vars)
        .iter()
        .map(|a| eval(alg, a, t).unwrap().index)
        .collect()
}

/// A random one-sorted grammar with constants, variables, unary and
/// binary symbols and chain rules.
pub fn random_grammar(rng: &mut StdRng, max_nts: usize, max_alts: usize) -> TreeGrammar {
    let s = Sort::new("S");
    let mut alphabet = Alphabet::new();
    for c in ["a", "b"] {
        alphabet.insert(Symbol::op(c), Profile::new(vec![], s.clone()));
    }
    alphabet.insert(Symbol::op("f"), Profile::new(vec![s.clone()], s.clone()));
    alphabet.insert(Symbol::op("g"), Profile::new(vec![s.clone(), s.clone()], s.clone()));
    alphabet.insert(Symbol::op("h"), Profile::new(vec![s.clone(); 3], s.clone()));
    let v = Var::new("v", &s);
    alphabet.insert(Symbol::Var(v.clone()), Profile::new(vec![], s.clone()));
    let mut g = TreeGrammar::new(alphabet);
    let n = rng.gen_range(1..=max_nts);
    for i in 0..n {
        g.add_nonterminal(format!("M{i}"), s.clone());
    }
    let alts = rng.gen_range(0..=max_alts);
    for _ in 0..alts {
        let head = NtId(rng.gen_range(0..n));
        let kind = rng.gen_range(0..10);
        let mut pick = || NtId(rng.gen_range(0..n));
        let alt = match kind {
            0 => Alternative::Func(Symbol::op("a"), vec![]),
            1 => Alternative::Func(Symbol::op("b"), vec![]),
            2 => Alternative::Func(Symbol::Var(v.clone()), vec![]),
            3 | 4 => Alternative::Func(Symbol::op("f"), vec![pick()]),
            5 | 6 => Alternative::Func(Symbol::op("g"), vec![pick(), pick()]),
            7 => Alternative::Func(Symbol::op("h"), vec![pick(), pick(), pick()]),
            _ => Alternative::Chain(pick()),
        };
        g.add_alternative(head, alt).unwrap();
    }
    g
}
