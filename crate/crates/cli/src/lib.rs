//! Command-line front end: argument parsing, file loading and report
//! rendering. `run_command` is the whole program minus process I/O.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use finax::barzdin::{enumerate_hypotheses_capped, parse_constraints};
use finax::grammar::{enumerate, heights_liquid, Symbol, Weights};
use finax::prototype::{setup_prototype_capped, ObligationStatus};
use finax::syntax::{
    parse_algebra, parse_formula, parse_sample_structure, parse_theory, parse_tuple, show_formula,
};
use finax::theory::{
    build_axioms_capped, build_behavior_capped, derive, variety_sequence, TheoremGrammar,
};
use finax::{falsify, Error, FiniteAlgebra, Formula, Signature, Sort, VariableTuple};

pub const DEFAULT_MAX_CLASSES: usize = 200_000;
pub const DEFAULT_MAX_HEIGHT: u64 = 6;
pub const DEFAULT_MAX_TERMS: usize = 10_000;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "finax", version, about = "Quantified equational theories of finite algebras")]
struct Cli {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Caps {
    /// Maximum number of product nonterminals.
    #[arg(long, default_value_t = DEFAULT_MAX_CLASSES, value_parser = positive)]
    max_classes: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a formula holds in an algebra.
    Check { algebra: PathBuf, formula: String },
    /// Dump the theorem grammar.
    Grammar {
        #[arg(required = true)]
        algebras: Vec<PathBuf>,
        #[arg(long)]
        vars: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// Enumerate valid formulas by increasing term height.
    Theorems {
        #[arg(required = true)]
        algebras: Vec<PathBuf>,
        #[arg(long)]
        vars: String,
        #[arg(long, default_value_t = DEFAULT_MAX_HEIGHT)]
        max_height: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        count: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Print the extracted axiom set.
    Axioms {
        #[arg(required = true)]
        algebras: Vec<PathBuf>,
        #[arg(long)]
        vars: String,
        #[arg(long)]
        no_reduce: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Derive a formula from the axioms, showing the rewrite chains.
    Derive {
        /// Algebra files followed by the formula.
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        vars: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// Enumerate terms consistent with input/output examples.
    Barzdin {
        algebra: PathBuf,
        #[arg(long)]
        vars: String,
        #[arg(long)]
        sort: String,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_HEIGHT)]
        max_height: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        count: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Universal axioms for growing variable tuples.
    Variety {
        #[arg(required = true)]
        algebras: Vec<PathBuf>,
        #[arg(long, value_parser = positive)]
        max_vars: usize,
        /// Variable sort; defaults to the only non-fixed sort.
        #[arg(long)]
        sort: Option<String>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Set up prototype algebras for a theory and optionally decide a formula.
    Prototype {
        /// Algebra files, optionally followed by a formula.
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        vars: String,
        /// Record the exported obligations as assumed.
        #[arg(long)]
        assume: bool,
        #[command(flatten)]
        caps: Caps,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_error(context: Option<&Path>, e: Error) -> Self {
        let code = match e {
            Error::ResourceLimit { .. } | Error::UnboundedLayer { .. } => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        };
        let message = match context {
            Some(p) => format!("{}: {e}", p.display()),
            None => e.to_string(),
        };
        Failure { code, message }
    }
}

fn lib<T>(r: finax::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::from_error(None, e))
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

/// Runs one command line (program name first) and returns the exit code
/// and the report. Failures are reported as `error: …`.
pub fn run_command<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    let json = cli.json;
    match dispatch(cli.command) {
        Ok(r) if json => {
            let mut s = serde_json::to_string_pretty(&r.json).expect("report serializes");
            s.push('\n');
            (r.code, s)
        }
        Ok(r) => (r.code, r.text),
        Err(f) => (f.code, format!("error: {}\n", f.message)),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra, Failure> {
    parse_algebra(&read(path)?).map_err(|e| Failure::from_error(Some(path), e))
}

fn load_algebras<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<FiniteAlgebra>, Failure> {
    let algs = paths
        .iter()
        .map(|p| load_algebra(p.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    if algs.iter().any(|a| a.signature() != algs[0].signature()) {
        return Err(Failure::usage("the algebras do not share a signature"));
    }
    Ok(algs)
}

fn tuple(alg: &FiniteAlgebra, vars: &str) -> Result<VariableTuple, Failure> {
    parse_tuple(alg.signature(), vars).map_err(|e| Failure::usage(format!("--vars: {e}")))
}

fn formula(alg: &FiniteAlgebra, hints: Option<&VariableTuple>, text: &str) -> Result<Formula, Failure> {
    parse_formula(alg.signature(), hints, text).map_err(|e| Failure::usage(format!("formula: {e}")))
}

fn paths(ps: &[PathBuf]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn lines(items: impl IntoIterator<Item = String>) -> String {
    let mut s = String::new();
    for i in items {
        s.push_str(&i);
        s.push('\n');
    }
    s
}

fn formula_json(sig: &Signature, phi: &Formula) -> Value {
    json!({
        "formula": show_formula(sig, phi),
        "prefix": phi.quantifiers().to_string(),
        "sort": phi.sort.to_string(),
        "lhs": phi.lhs.to_string(),
        "rhs": phi.rhs.to_string(),
    })
}

fn dispatch(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Check { algebra, formula: text } => check(&algebra, &text),
        Command::Grammar { algebras, vars, caps } => grammar(&algebras, &vars, caps.max_classes),
        Command::Theorems {
            algebras,
            vars,
            max_height,
            count,
            caps,
        } => theorems(&algebras, &vars, max_height, count, caps.max_classes),
        Command::Axioms {
            algebras,
            vars,
            no_reduce,
            caps,
        } => axioms(&algebras, &vars, !no_reduce, caps.max_classes),
        Command::Derive { mut inputs, vars, caps } => {
            if inputs.len() < 2 {
                return Err(Failure::usage("derive needs at least one algebra and a formula"));
            }
            let text = inputs.pop().expect("checked above");
            derive_cmd(&inputs, &vars, &text, caps.max_classes)
        }
        Command::Barzdin {
            algebra,
            vars,
            sort,
            constraints,
            max_height,
            count,
            caps,
        } => barzdin(&algebra, &vars, &sort, &constraints, max_height, count, caps.max_classes),
        Command::Variety {
            algebras,
            max_vars,
            sort,
            caps,
        } => variety(&algebras, max_vars, sort.as_deref(), caps.max_classes),
        Command::Prototype {
            mut inputs,
            theory,
            vars,
            assume,
            caps,
        } => {
            // A trailing argument that is not a file is the formula.
            let text = match inputs.last() {
                Some(last) if inputs.len() > 1 && !Path::new(last).is_file() => inputs.pop(),
                _ => None,
            };
            prototype(&inputs, &theory, &vars, text.as_deref(), assume, caps.max_classes)
        }
    }
}

fn check(path: &Path, text: &str) -> Result<Report, Failure> {
    let alg = load_algebra(path)?;
    let phi = formula(&alg, None, text)?;
    let w = lib(falsify(&alg, &phi))?;
    let mut out = String::new();
    let witness = w.map(|w| {
        w.iter()
            .map(|(v, e)| (v.name.to_string(), alg.element_name(&v.sort, *e).to_string()))
            .collect::<Vec<_>>()
    });
    match &witness {
        None => out.push_str("valid\n"),
        Some(w) => {
            out.push_str("invalid\n");
            let shown: Vec<String> = w.iter().map(|(v, e)| format!("{v} ↦ {e}")).collect();
            let _ = writeln!(out, "  witness: {}", shown.join(", "));
        }
    }
    let witness_json = witness.as_ref().map(|w| {
        w.iter()
            .map(|(v, e)| json!({"var": v, "element": e}))
            .collect::<Vec<_>>()
    });
    Ok(Report {
        code: if witness.is_none() { EXIT_OK } else { EXIT_NEGATIVE },
        text: out,
        json: json!({
            "command": "check",
            "inputs": {"algebra": path.display().to_string(), "formula": text},
            "results": [{
                "formula": phi.to_string(),
                "valid": witness.is_none(),
                "witness": witness_json,
            }],
        }),
    })
}

fn theorem_grammar(algs: &[FiniteAlgebra], t: &VariableTuple, cap: usize) -> Result<TheoremGrammar, Failure> {
    lib(TheoremGrammar::new(lib(build_behavior_capped(algs, t, Some(cap)))?))
}

fn grammar(ps: &[PathBuf], vars: &str, cap: usize) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let t = tuple(&algs[0], vars)?;
    let tg = theorem_grammar(&algs, &t, cap)?;
    let g = tg.grammar();
    let bg = tg.behavior();
    let results: Vec<Value> = g
        .ids()
        .map(|n| {
            let mut v = json!({
                "nonterminal": g.name(n),
                "sort": g.nonterminal(n).sort.to_string(),
                "alternatives": g.rule(n).iter().map(|a| g.show_alternative(a)).collect::<Vec<_>>(),
            });
            if n.0 < bg.class_count() {
                v["vector"] = json!(bg.vector_label(n));
            }
            v
        })
        .collect();
    Ok(Report {
        code: EXIT_OK,
        text: g.to_string(),
        json: json!({
            "command": "grammar",
            "inputs": {"algebras": paths(ps), "vars": vars},
            "results": results,
        }),
    })
}

fn theorems(ps: &[PathBuf], vars: &str, max_height: u64, count: usize, cap: usize) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let t = tuple(&algs[0], vars)?;
    let tg = theorem_grammar(&algs, &t, cap)?;
    let g = tg.grammar();
    // Height is that of the taller side: prefix and `=` weigh nothing.
    let mut w = Weights::default();
    for sym in g.alphabet().keys() {
        if matches!(sym, Symbol::Prefix(_) | Symbol::Eq(_)) {
            w = w.with(sym.clone(), 0);
        }
    }
    let hm = heights_liquid(g, &w);
    let sig = algs[0].signature();
    let trees = lib(enumerate(g, tg.start(), &hm, max_height, count))?;
    let found: Vec<Formula> = trees.iter().filter_map(|t| t.to_formula()).collect();
    Ok(Report {
        code: EXIT_OK,
        text: lines(found.iter().map(|f| show_formula(sig, f))),
        json: json!({
            "command": "theorems",
            "inputs": {"algebras": paths(ps), "vars": vars, "max_height": max_height, "count": count},
            "results": found.iter().map(|f| formula_json(sig, f)).collect::<Vec<_>>(),
        }),
    })
}

fn axioms(ps: &[PathBuf], vars: &str, reduce: bool, cap: usize) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let t = tuple(&algs[0], vars)?;
    let mut ax = lib(build_axioms_capped(&algs, &t, Some(cap)))?;
    if reduce {
        ax = ax.reduce();
    }
    let fs: Vec<&Formula> = ax.formulas().collect();
    let sig = algs[0].signature();
    Ok(Report {
        code: EXIT_OK,
        text: lines(fs.iter().map(|f| show_formula(sig, f))),
        json: json!({
            "command": "axioms",
            "inputs": {"algebras": paths(ps), "vars": vars, "reduced": reduce},
            "results": fs.iter().map(|f| formula_json(sig, f)).collect::<Vec<_>>(),
        }),
    })
}

fn derive_cmd(ps: &[String], vars: &str, text: &str, cap: usize) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let t = tuple(&algs[0], vars)?;
    let phi = formula(&algs[0], Some(&t), text)?;
    let ax = lib(build_axioms_capped(&algs, &t, Some(cap)))?;
    let d = lib(derive(&ax, &phi))?;
    let steps = |ss: &[finax::theory::RewriteStep]| {
        ss.iter()
            .map(|s| json!({"term": s.after.to_string(), "rule": s.rule.to_string()}))
            .collect::<Vec<_>>()
    };
    Ok(Report {
        code: if d.succeeded() { EXIT_OK } else { EXIT_NEGATIVE },
        text: format!("{d}\n"),
        json: json!({
            "command": "derive",
            "inputs": {"algebras": ps, "vars": vars, "formula": text},
            "results": [{
                "formula": d.formula.to_string(),
                "derived": d.succeeded(),
                "lhs_steps": steps(&d.lhs_steps),
                "rhs_steps": steps(&d.rhs_steps),
                "lhs_normal": d.lhs_normal.to_string(),
                "rhs_normal": d.rhs_normal.to_string(),
            }],
        }),
    })
}

#[allow(clippy::too_many_arguments)]
fn barzdin(
    path: &Path,
    vars: &str,
    sort: &str,
    constraints: &Path,
    max_height: u64,
    count: usize,
    cap: usize,
) -> Result<Report, Failure> {
    let sample = parse_sample_structure(&read(path)?).map_err(|e| Failure::from_error(Some(path), e))?;
    let t = parse_tuple(sample.signature(), vars).map_err(|e| Failure::usage(format!("--vars: {e}")))?;
    let target = Sort::new(sort);
    if !sample.signature().has_sort(&target) {
        return Err(Failure::usage(format!("--sort: unknown sort {sort}")));
    }
    let cs = parse_constraints(&sample, &t, &target, &read(constraints)?)
        .map_err(|e| Failure::from_error(Some(constraints), e))?;
    let terms = lib(enumerate_hypotheses_capped(
        &sample,
        &cs,
        &target,
        &t,
        max_height,
        count,
        Some(cap),
    ))?;
    Ok(Report {
        code: EXIT_OK,
        text: lines(terms.iter().map(|t| t.to_string())),
        json: json!({
            "command": "barzdin",
            "inputs": {
                "algebra": path.display().to_string(),
                "vars": vars,
                "sort": sort,
                "constraints": constraints.display().to_string(),
                "max_height": max_height,
                "count": count,
            },
            "results": terms.iter().map(|t| json!({"term": t.to_string()})).collect::<Vec<_>>(),
        }),
    })
}

fn variety(ps: &[PathBuf], max_vars: usize, sort: Option<&str>, cap: usize) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let sig = algs[0].signature();
    let s = match sort {
        Some(s) => {
            let s = Sort::new(s);
            if !sig.has_sort(&s) {
                return Err(Failure::usage(format!("--sort: unknown sort {s}")));
            }
            s
        }
        None => {
            let free: Vec<&Sort> = sig.sorts().iter().filter(|s| !sig.fixed_sorts().contains(s)).collect();
            match free.as_slice() {
                [only] => (*only).clone(),
                _ => return Err(Failure::usage("several sorts; choose one with --sort")),
            }
        }
    };
    let steps = lib(variety_sequence(&algs, &vec![s; max_vars], Some(cap)))?;
    let mut text = String::new();
    let mut results = Vec::new();
    for step in &steps {
        let names: Vec<&str> = step.tuple.vars().iter().map(|v| v.name.as_ref()).collect();
        let _ = writeln!(text, "## {}", names.join(", "));
        let show = |phi: &Formula| show_formula(sig, phi);
        for a in &step.axioms {
            let _ = writeln!(text, "{}", show(a));
        }
        for (old, by) in &step.subsumed {
            let _ = writeln!(text, "subsumed: {}  by  {}", show(old), show(by));
        }
        results.push(json!({
            "vars": names,
            "axioms": step.axioms.iter().map(show).collect::<Vec<_>>(),
            "subsumed": step
                .subsumed
                .iter()
                .map(|(o, b)| json!({"axiom": show(o), "by": show(b)}))
                .collect::<Vec<_>>(),
        }));
    }
    Ok(Report {
        code: EXIT_OK,
        text,
        json: json!({
            "command": "variety",
            "inputs": {"algebras": paths(ps), "max_vars": max_vars},
            "results": results,
        }),
    })
}

fn prototype(
    ps: &[String],
    theory: &Path,
    vars: &str,
    text: Option<&str>,
    assume: bool,
    cap: usize,
) -> Result<Report, Failure> {
    let algs = load_algebras(ps)?;
    let t = tuple(&algs[0], vars)?;
    let th = parse_theory(algs[0].signature(), None, &read(theory)?)
        .map_err(|e| Failure::from_error(Some(theory), e))?;
    let mut setup = match setup_prototype_capped(&algs, &th, &t, Some(cap)) {
        Err(e @ Error::TheoryFails { .. }) => {
            return Ok(Report {
                code: EXIT_NEGATIVE,
                text: format!("setup failed: {e}\n"),
                json: json!({
                    "command": "prototype",
                    "inputs": {"algebras": ps, "theory": theory.display().to_string(), "vars": vars},
                    "results": [{"setup": false, "error": e.to_string()}],
                }),
            })
        }
        r => lib(r)?,
    };
    let obligations = setup.export_obligations(assume);
    let status = setup.status();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "setup: {} algebra(s) satisfy {} theory formula(s)",
        algs.len(),
        th.len()
    );
    let _ = writeln!(out, "obligations ({status}): {}", obligations.len());
    let sig = algs[0].signature();
    for o in &obligations {
        let _ = writeln!(out, "  {}", show_formula(sig, o));
    }
    let mut code = EXIT_OK;
    let mut decision = Value::Null;
    if let Some(text) = text {
        let phi = formula(&algs[0], Some(&t), text)?;
        let d = lib(setup.decide(&phi))?;
        let _ = writeln!(out, "{d}");
        if !d.entailed {
            code = EXIT_NEGATIVE;
        }
        decision = json!({
            "formula": d.formula.to_string(),
            "entailed": d.entailed,
            "witness": d.witness.as_ref().map(|w| json!({
                "algebra": w.algebra,
                "assignment": w.assignment.iter().map(|(v, e)| json!({"var": v.name.as_ref(), "element": e})).collect::<Vec<_>>(),
            })),
        });
    }
    Ok(Report {
        code,
        text: out,
        json: json!({
            "command": "prototype",
            "inputs": {"algebras": ps, "theory": theory.display().to_string(), "vars": vars, "formula": text},
            "results": [{
                "setup": true,
                "status": status.to_string(),
                "assumed": status == ObligationStatus::Assumed,
                "obligations": obligations.iter().map(|o| show_formula(sig, o)).collect::<Vec<_>>(),
                "decision": decision,
            }],
        }),
    })
}
