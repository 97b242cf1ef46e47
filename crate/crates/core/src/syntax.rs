//! Text formats: algebra files, formulas and terms.
//!
//! Identifiers are runs of letters, digits and `+ * < = ¬ ∧ ∨ → ↔ _`, so
//! tokens must be separated by whitespace or punctuation: `x + y = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{
    check_admitted, FiniteAlgebra, Formula, Name, Quantifier, Signature, Sort, Structure,
    SymbolDecl, Term, Var, VariableTuple,
};
use crate::error::{Error, ParseError, Result};

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || "+*<=¬∧∨→↔_".contains(c)
}

/// Operator-like names (no letters or digits) print infix when binary.
pub fn is_operator(name: &str) -> bool {
    !name.chars().any(char::is_alphanumeric)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Arrow,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if c.is_whitespace() {
            i += 1;
        } else if let Some(tok) = single {
            out.push(Token { tok, line, col });
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token {
                tok: Tok::Arrow,
                line,
                col,
            });
            i += 2;
        } else if is_ident_char(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                col,
            });
        } else {
            return Err(ParseError::new(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Cursor {
    fn new(toks: Vec<Token>, line: usize, end_col: usize) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.line, self.end_col),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    /// Comma-separated identifiers up to the end of the line or `stop`.
    fn ident_list(&mut self, what: &str, stop: Option<Tok>) -> Result<Vec<(String, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            if self.done() || (stop.is_some() && self.peek() == stop.as_ref()) {
                break;
            }
            let (l, c) = self.here();
            out.push((self.ident(what)?, l, c));
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(out)
    }
}

struct SourceLine<'a> {
    number: usize,
    keyword: &'a str,
    rest: &'a str,
    rest_col: usize,
}

fn source_lines(text: &str) -> impl Iterator<Item = SourceLine<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.trim().is_empty() {
            return None;
        }
        let lead = line.chars().count() - trimmed.chars().count();
        let kw_len = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let keyword = &trimmed[..kw_len];
        let rest = &trimmed[kw_len..];
        Some(SourceLine {
            number: i + 1,
            keyword,
            rest,
            rest_col: lead + keyword.chars().count() + 1,
        })
    })
}

struct TableLine {
    line: usize,
    col: usize,
    symbol: String,
    args: Vec<String>,
    result: String,
}

/// Parses an algebra file with total tables.
pub fn parse_algebra(text: &str) -> Result<FiniteAlgebra> {
    let (structure, bool_sort) = parse_structure(text)?;
    let alg = FiniteAlgebra::new(structure)?;
    if bool_sort.is_some() && !check_admitted(&alg) {
        return Err(Error::NotAdmitted(
            "Boolean tables differ from the two-element Boolean algebra".into(),
        ));
    }
    Ok(alg)
}

/// Parses a file in the algebra format whose tables may be partial.
pub fn parse_sample_structure(text: &str) -> Result<Structure> {
    Ok(parse_structure(text)?.0)
}

fn parse_structure(text: &str) -> Result<(Structure, Option<Sort>)> {
    let mut sorts: Vec<(Sort, usize, usize)> = Vec::new();
    let mut elems: Vec<(Sort, Vec<Name>, usize, usize)> = Vec::new();
    let mut ops: Vec<(SymbolDecl, usize, usize)> = Vec::new();
    let mut tables: Vec<TableLine> = Vec::new();
    let mut bool_sort: Option<Sort> = None;

    for sl in source_lines(text) {
        let toks = lex(sl.rest, sl.number, sl.rest_col)?;
        let mut cur = Cursor::new(toks, sl.number, sl.rest_col + sl.rest.chars().count());
        match sl.keyword {
            "sort" => {
                loop {
                    let (l, c) = cur.here();
                    sorts.push((Sort::new(cur.ident("sort name")?), l, c));
                    if cur.peek() == Some(&Tok::Comma) {
                        cur.next();
                    }
                    if cur.done() {
                        break;
                    }
                }
            }
            "elems" => {
                let (l, c) = cur.here();
                let sort = Sort::new(cur.ident("sort name")?);
                cur.expect(Tok::Colon, "`:`")?;
                let names = cur
                    .ident_list("element name", None)?
                    .into_iter()
                    .map(|(n, _, _)| Arc::from(n.as_str()))
                    .collect::<Vec<Name>>();
                elems.push((sort, names, l, c));
            }
            "op" => {
                let (l, c) = cur.here();
                let name = cur.ident("symbol name")?;
                if name == "=" || name.starts_with("=_") {
                    return Err(ParseError::new(l, c, "`=` is reserved for equations").into());
                }
                cur.expect(Tok::Colon, "`:`")?;
                let args = cur
                    .ident_list("argument sort", Some(Tok::Arrow))?
                    .into_iter()
                    .map(|(n, _, _)| Sort::new(n))
                    .collect();
                cur.expect(Tok::Arrow, "`->`")?;
                let result = Sort::new(cur.ident("result sort")?);
                ops.push((SymbolDecl::new(name, args, result), l, c));
            }
            "table" => {
                let (l, c) = cur.here();
                let symbol = cur.ident("symbol name")?;
                let mut args = Vec::new();
                if cur.peek() == Some(&Tok::LParen) {
                    cur.next();
                    args = cur
                        .ident_list("element name", Some(Tok::RParen))?
                        .into_iter()
                        .map(|(n, _, _)| n)
                        .collect();
                    cur.expect(Tok::RParen, "`)`")?;
                }
                cur.keyword("=")?;
                let result = cur.ident("result element")?;
                tables.push(TableLine {
                    line: l,
                    col: c,
                    symbol,
                    args,
                    result,
                });
            }
            "bool-sort" => {
                let name = if cur.done() {
                    "Bool".to_string()
                } else {
                    cur.ident("sort name")?
                };
                bool_sort = Some(Sort::new(name));
            }
            other => {
                return Err(ParseError::new(
                    sl.number,
                    sl.rest_col.saturating_sub(other.chars().count() + 1).max(1),
                    format!("unknown directive `{other}`"),
                )
                .into())
            }
        }
        cur.finish()?;
    }

    let at = |l: usize, c: usize| move |e: Error| -> Error {
        match e {
            Error::Parse(p) => Error::Parse(p),
            other => Error::Parse(ParseError::new(l, c, other.to_string())),
        }
    };

    let mut sig = Signature::new(
        sorts.iter().map(|(s, _, _)| s.clone()).collect(),
        Vec::new(),
    )
    .map_err(|e| {
        let (_, l, c) = sorts.last().cloned().unwrap_or((Sort::new(""), 1, 1));
        at(l, c)(e)
    })?;
    let mut decls = Vec::new();
    for (d, l, c) in &ops {
        decls.push(d.clone());
        sig = Signature::new(sig.sorts().to_vec(), decls.clone()).map_err(at(*l, *c))?;
    }
    if let Some(b) = &bool_sort {
        sig = sig.with_bool(b)?;
    }
    let (el, ec) = elems.first().map(|e| (e.2, e.3)).unwrap_or((1, 1));
    let mut structure = Structure::new(
        sig,
        elems.iter().map(|(s, n, _, _)| (s.clone(), n.clone())).collect(),
    )
    .map_err(at(el, ec))?;
    for t in &tables {
        let err = at(t.line, t.col);
        let decl = structure
            .signature()
            .symbol(&t.symbol)
            .cloned()
            .ok_or_else(|| err(Error::UnknownSymbol(t.symbol.clone())))?;
        if decl.arity() != t.args.len() {
            return Err(err(Error::ArityMismatch {
                symbol: t.symbol.clone(),
                expected: decl.arity(),
                found: t.args.len(),
            }));
        }
        let args = t
            .args
            .iter()
            .zip(&decl.args)
            .map(|(a, s)| structure.element_index(s, a))
            .collect::<Result<Vec<_>>>()
            .map_err(&err)?;
        let r = structure.element_index(&decl.result, &t.result).map_err(&err)?;
        structure.set(&t.symbol, &args, r).map_err(&err)?;
    }
    Ok((structure, bool_sort))
}

/// Surface syntax tree, before names are resolved against a signature.
#[derive(Clone, Debug)]
struct Raw {
    name: String,
    args: Vec<Raw>,
    line: usize,
    col: usize,
}

fn parse_raw_term(cur: &mut Cursor) -> Result<Raw, ParseError> {
    let first = parse_primary(cur)?;
    match cur.peek() {
        Some(Tok::Ident(op)) if !op.starts_with('=') => {
            let (line, col) = cur.here();
            let op = op.clone();
            cur.next();
            let second = parse_primary(cur)?;
            if let Some(Tok::Ident(next)) = cur.peek() {
                if !next.starts_with('=') {
                    return Err(cur.err("nested infix applications need parentheses"));
                }
            }
            Ok(Raw {
                name: op,
                args: vec![first, second],
                line,
                col,
            })
        }
        _ => Ok(first),
    }
}

fn parse_primary(cur: &mut Cursor) -> Result<Raw, ParseError> {
    let (line, col) = cur.here();
    match cur.peek() {
        Some(Tok::LParen) => {
            cur.next();
            let t = parse_raw_term(cur)?;
            cur.expect(Tok::RParen, "`)`")?;
            Ok(t)
        }
        Some(Tok::Ident(name)) if !name.starts_with('=') => {
            let name = name.clone();
            cur.next();
            let mut args = Vec::new();
            if cur.peek() == Some(&Tok::LParen) {
                cur.next();
                loop {
                    args.push(parse_raw_term(cur)?);
                    match cur.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        _ => {
                            cur.pos -= 1;
                            return Err(cur.err("expected `,` or `)`"));
                        }
                    }
                }
            }
            Ok(Raw {
                name,
                args,
                line,
                col,
            })
        }
        _ => Err(cur.err("expected a term")),
    }
}

struct RawFormula {
    prefix: Vec<(Quantifier, String, Option<Sort>, usize, usize)>,
    lhs: Raw,
    rhs: Raw,
    eq_sort: Option<Sort>,
    eq_pos: (usize, usize),
}

fn parse_raw_formula(text: &str, line: usize) -> Result<RawFormula, ParseError> {
    let toks = lex(text, line, 1)?;
    let mut cur = Cursor::new(toks, line, text.chars().count() + 1);
    let mut prefix = Vec::new();
    loop {
        let q = match cur.peek() {
            Some(Tok::Ident(s)) if s == "forall" => Quantifier::Forall,
            Some(Tok::Ident(s)) if s == "exists" => Quantifier::Exists,
            _ => break,
        };
        cur.next();
        let (l, c) = cur.here();
        let name = cur.ident("variable name")?;
        let mut sort = None;
        if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "in") {
            cur.next();
            sort = Some(Sort::new(cur.ident("sort name")?));
        }
        prefix.push((q, name, sort, l, c));
    }
    if !prefix.is_empty() {
        cur.expect(Tok::Colon, "`:` after the quantifier prefix")?;
    } else if cur.peek() == Some(&Tok::Colon) {
        cur.next();
    }
    let lhs = parse_raw_term(&mut cur)?;
    let eq_pos = cur.here();
    let eq_sort = match cur.next() {
        Some(Tok::Ident(s)) if s == "=" => None,
        Some(Tok::Ident(s)) if s.starts_with("=_") => Some(Sort::new(&s[2..])),
        _ => {
            return Err(ParseError::new(eq_pos.0, eq_pos.1, "expected `=`"));
        }
    };
    let rhs = parse_raw_term(&mut cur)?;
    cur.finish()?;
    Ok(RawFormula {
        prefix,
        lhs,
        rhs,
        eq_sort,
        eq_pos,
    })
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse(ParseError::new(line, col, msg))
}

/// Parses one formula. Variable sorts come from `in S` annotations, from
/// `hints`, from argument positions, or from the only sort of the
/// signature. When `hints` is given the prefix must list its variables in
/// hint order.
pub fn parse_formula(sig: &Signature, hints: Option<&VariableTuple>, text: &str) -> Result<Formula> {
    parse_formula_at(sig, hints, text, 1)
}

fn parse_formula_at(
    sig: &Signature,
    hints: Option<&VariableTuple>,
    text: &str,
    line: usize,
) -> Result<Formula> {
    let raw = parse_raw_formula(text, line)?;
    let mut sorts: BTreeMap<String, Option<Sort>> = BTreeMap::new();
    let mut last_hint: Option<usize> = None;
    for (_, name, ann, l, c) in &raw.prefix {
        if sorts.contains_key(name) {
            return Err(perr(*l, *c, format!("variable `{name}` quantified twice")));
        }
        let mut s = ann.clone();
        if let Some(h) = hints {
            if let Some(pos) = h.position(name) {
                if last_hint.is_some_and(|p| p > pos) {
                    return Err(perr(*l, *c, "quantifier prefix must follow the tuple order"));
                }
                last_hint = Some(pos);
                let hs = &h.vars()[pos].sort;
                if s.as_ref().is_some_and(|s| s != hs) {
                    return Err(perr(*l, *c, format!("`{name}` is declared with sort {hs}")));
                }
                s = Some(hs.clone());
            }
        }
        if let Some(s) = &s {
            if !sig.has_sort(s) {
                return Err(perr(*l, *c, format!("unknown sort {s}")));
            }
        }
        sorts.insert(name.clone(), s);
    }
    infer(sig, &raw.lhs, &mut sorts)?;
    infer(sig, &raw.rhs, &mut sorts)?;
    if let Some(s) = &raw.eq_sort {
        if !sig.has_sort(s) {
            return Err(perr(raw.eq_pos.0, raw.eq_pos.1, format!("unknown sort {s}")));
        }
    }
    let side_sort = |r: &Raw, sorts: &BTreeMap<String, Option<Sort>>| -> Option<Sort> {
        match sorts.get(&r.name) {
            Some(s) if r.args.is_empty() => s.clone(),
            _ => sig.symbol(&r.name).map(|d| d.result.clone()),
        }
    };
    let eq_sort = raw
        .eq_sort
        .clone()
        .or_else(|| side_sort(&raw.lhs, &sorts))
        .or_else(|| side_sort(&raw.rhs, &sorts));
    for side in [&raw.lhs, &raw.rhs] {
        if let Some(slot) = sorts.get_mut(&side.name) {
            if side.args.is_empty() && slot.is_none() {
                *slot = eq_sort.clone();
            }
        }
    }
    let only_sort = (sig.sorts().len() == 1).then(|| sig.sorts()[0].clone());
    let mut prefix = Vec::new();
    for (q, name, _, l, c) in &raw.prefix {
        let s = match sorts[name].clone().or_else(|| only_sort.clone()) {
            Some(s) => s,
            None => {
                return Err(perr(
                    *l,
                    *c,
                    format!("cannot infer the sort of `{name}`; annotate it as `{name} in SORT`"),
                ))
            }
        };
        prefix.push((*q, Var::new(name, &s)));
    }
    let vars: BTreeMap<&str, &Var> = prefix.iter().map(|(_, v)| (&*v.name, v)).collect();
    let lhs = resolve(sig, &raw.lhs, &vars)?;
    let rhs = resolve(sig, &raw.rhs, &vars)?;
    let phi = Formula::new(sig, prefix, lhs, rhs)
        .map_err(|e| perr(raw.eq_pos.0, raw.eq_pos.1, e.to_string()))?;
    if let Some(s) = &raw.eq_sort {
        if s != &phi.sort {
            return Err(perr(
                raw.eq_pos.0,
                raw.eq_pos.1,
                format!("equation annotated {s} but its sides have sort {}", phi.sort),
            ));
        }
    }
    Ok(phi)
}

fn infer(sig: &Signature, raw: &Raw, sorts: &mut BTreeMap<String, Option<Sort>>) -> Result<()> {
    if sorts.contains_key(&raw.name) && raw.args.is_empty() {
        return Ok(());
    }
    let Some(decl) = sig.symbol(&raw.name) else {
        return Err(perr(raw.line, raw.col, format!("unknown symbol `{}`", raw.name)));
    };
    if decl.arity() != raw.args.len() {
        return Err(perr(
            raw.line,
            raw.col,
            format!(
                "`{}` expects {} arguments, found {}",
                raw.name,
                decl.arity(),
                raw.args.len()
            ),
        ));
    }
    for (a, s) in raw.args.iter().zip(&decl.args) {
        if a.args.is_empty() {
            if let Some(slot) = sorts.get_mut(&a.name) {
                match slot {
                    Some(prev) if prev != s => {
                        return Err(perr(
                            a.line,
                            a.col,
                            format!("`{}` used with sorts {prev} and {s}", a.name),
                        ))
                    }
                    _ => *slot = Some(s.clone()),
                }
                continue;
            }
        }
        infer(sig, a, sorts)?;
    }
    Ok(())
}

fn resolve(sig: &Signature, raw: &Raw, vars: &BTreeMap<&str, &Var>) -> Result<Term> {
    if let Some(v) = vars.get(raw.name.as_str()) {
        if !raw.args.is_empty() {
            return Err(perr(raw.line, raw.col, format!("variable `{}` applied to arguments", raw.name)));
        }
        return Ok(Term::Var((*v).clone()));
    }
    let args = raw
        .args
        .iter()
        .map(|a| resolve(sig, a, vars))
        .collect::<Result<Vec<_>>>()?;
    let t = Term::app(&raw.name, args);
    if let Err(e) = sig.sort_of(&t) {
        return Err(perr(raw.line, raw.col, e.to_string()));
    }
    Ok(t)
}

/// Parses a term over `sig` whose free variables come from `tuple`.
pub fn parse_term(sig: &Signature, tuple: &VariableTuple, text: &str) -> Result<Term> {
    let toks = lex(text, 1, 1)?;
    let mut cur = Cursor::new(toks, 1, text.chars().count() + 1);
    let raw = parse_raw_term(&mut cur)?;
    cur.finish()?;
    let vars: BTreeMap<&str, &Var> = tuple.vars().iter().map(|v| (&*v.name, v)).collect();
    resolve(sig, &raw, &vars)
}

/// One formula per line; blank lines and `#` comments are skipped.
pub fn parse_theory(sig: &Signature, hints: Option<&VariableTuple>, text: &str) -> Result<Vec<Formula>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let body = l.split('#').next().unwrap_or("");
            (!body.trim().is_empty()).then(|| parse_formula_at(sig, hints, body, i + 1))
        })
        .collect()
}

/// Parses `x:S,y:T` into a tuple, checking the sorts against `sig`.
pub fn parse_tuple(sig: &Signature, text: &str) -> Result<VariableTuple> {
    let mut vars = Vec::new();
    for (i, part) in text.split(',').enumerate() {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, sort) = part
            .split_once(':')
            .ok_or_else(|| perr(1, i + 1, format!("expected NAME:SORT, found `{part}`")))?;
        let (name, sort) = (name.trim(), Sort::new(sort.trim()));
        if name.is_empty() || !name.chars().all(is_ident_char) {
            return Err(perr(1, i + 1, format!("bad variable name `{name}`")));
        }
        if !sig.has_sort(&sort) {
            return Err(Error::UnknownSort(sort.to_string()));
        }
        vars.push(Var::new(name, &sort));
    }
    VariableTuple::new(vars)
}

fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&v.name),
        Term::App(name, args) if args.is_empty() => f.write_str(name),
        Term::App(name, args) if args.len() == 2 && is_operator(name) => {
            if nested {
                f.write_str("(")?;
            }
            fmt_term(&args[0], f, true)?;
            write!(f, " {name} ")?;
            fmt_term(&args[1], f, true)?;
            if nested {
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::App(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                fmt_term(a, f, false)?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, false)
    }
}

fn occurs_as_argument(t: &Term, v: &Var) -> bool {
    match t {
        Term::Var(_) => false,
        Term::App(_, args) => args
            .iter()
            .any(|a| matches!(a, Term::Var(w) if w == v) || occurs_as_argument(a, v)),
    }
}

fn write_formula(f: &mut impl fmt::Write, phi: &Formula, annotate: bool) -> fmt::Result {
    for (q, v) in &phi.prefix {
        write!(f, "{} {}", q.keyword(), v.name)?;
        let inferable = !annotate
            || occurs_as_argument(&phi.lhs, v)
            || occurs_as_argument(&phi.rhs, v)
            || (phi.lhs == Term::Var(v.clone()) && matches!(phi.rhs, Term::App(..)))
            || (phi.rhs == Term::Var(v.clone()) && matches!(phi.lhs, Term::App(..)));
        if !inferable {
            write!(f, " in {}", v.sort)?;
        }
        f.write_str(" ")?;
    }
    if !phi.prefix.is_empty() {
        f.write_str(": ")?;
    }
    write!(f, "{} = {}", phi.lhs, phi.rhs)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, true)
    }
}

/// Like `Display`, but leaves out sort annotations when `sig` has a single
/// sort, where the parser infers them anyway.
pub fn show_formula(sig: &Signature, phi: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, phi, sig.sorts().len() != 1).expect("writing to a string");
    s
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::{eval, sat, Assignment};

    pub const A2: &str = "\
sort Nat
elems Nat: 0, 1
op 0 : -> Nat
op + : Nat, Nat -> Nat
table 0 = 0
table + (0,0) = 0
table + (0,1) = 1
table + (1,0) = 1
table + (1,1) = 0
";

    #[test]
    fn parses_a2() {
        let alg = parse_algebra(A2).unwrap();
        assert_eq!(alg.equation_count(), 5);
        assert_eq!(alg.apply("+", &[1, 1]), Some(0));
        assert_eq!(alg.domain(&Sort::new("Nat")).len(), 2);
    }

    #[test]
    fn missing_entry_is_totality_error() {
        let text = A2.replace("table + (1,1) = 0\n", "");
        match parse_algebra(&text) {
            Err(Error::Totality { symbol, args }) => {
                assert_eq!(symbol, "+");
                assert_eq!(args, "1,1");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_entry_is_parse_error() {
        let text = format!("{A2}table + (1,1) = 1\n");
        match parse_algebra(&text) {
            Err(Error::Parse(p)) => assert_eq!(p.line, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_columns() {
        match parse_algebra("sort Nat\nelems Nat 0, 1\n") {
            Err(Error::Parse(p)) => assert_eq!((p.line, p.col), (2, 11)),
            other => panic!("{other:?}"),
        }
        match parse_algebra("sort Nat\nelems Nat: 0, $\n") {
            Err(Error::Parse(p)) => assert_eq!((p.line, p.col), (2, 15)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn formula_round_trip() {
        let alg = parse_algebra(A2).unwrap();
        let sig = alg.signature();
        for text in [
            "forall x exists y : x + y = 0",
            "forall x forall y : x = (x + y) + y",
            "exists x forall y : y = x + y",
            "forall x forall y in Nat : 0 = x + x",
            "forall x in Nat exists y in Nat : x = y",
            "0 = 0 + 0",
        ] {
            let phi = parse_formula(sig, None, text).unwrap();
            assert_eq!(phi.to_string(), text);
            assert_eq!(parse_formula(sig, None, &phi.to_string()).unwrap(), phi);
        }
    }

    #[test]
    fn formula_errors() {
        let alg = parse_algebra(A2).unwrap();
        let sig = alg.signature();
        assert!(parse_formula(sig, None, "forall x : x + y + 0 = x").is_err());
        assert!(parse_formula(sig, None, "forall x : x + 1 = x").is_err());
        assert!(parse_formula(sig, None, "forall x forall x : x = x").is_err());
        let tuple = parse_tuple(sig, "x:Nat,y:Nat").unwrap();
        assert!(parse_formula(sig, Some(&tuple), "forall y forall x : x = y").is_err());
        assert!(parse_formula(sig, Some(&tuple), "forall x forall y : x = y").is_ok());
    }

    pub const NAT_MOD2: &str = "\
sort Nat Bool
bool-sort Bool
elems Nat: 0, 1
elems Bool: false, true
op 0 : -> Nat
op + : Nat, Nat -> Nat
op < : Nat, Nat -> Bool
op false : -> Bool
op ∧ : Bool, Bool -> Bool
op ∨ : Bool, Bool -> Bool
table 0 = 0
table + (0,0) = 0
table + (0,1) = 1
table + (1,0) = 1
table + (1,1) = 0
table < (0,0) = false
table < (0,1) = true
table < (1,0) = false
table < (1,1) = false
table false = false
table ∧ (false,false) = false
table ∧ (false,true) = false
table ∧ (true,false) = false
table ∧ (true,true) = true
table ∨ (false,false) = false
table ∨ (false,true) = true
table ∨ (true,false) = true
table ∨ (true,true) = true
";

    #[test]
    fn bool_sort_admitted() {
        let alg = parse_algebra(NAT_MOD2).unwrap();
        assert!(check_admitted(&alg));
        let sig = alg.signature();
        let phi = parse_formula(sig, None, "forall x forall y : (x + y) < x = (0 < x) ∧ (0 < y)").unwrap();
        assert_eq!(phi.sort, Sort::new("Bool"));
        assert!(sat(&alg, &phi).unwrap());
    }

    #[test]
    fn flipped_bool_entry_not_admitted() {
        let text = NAT_MOD2.replace("table ∧ (true,true) = true", "table ∧ (true,true) = false");
        assert!(matches!(parse_algebra(&text), Err(Error::NotAdmitted(_))));
        // the same tables without the bool-sort line are an ordinary algebra
        let plain = text.replace("bool-sort Bool\n", "");
        let alg = parse_algebra(&plain).unwrap();
        assert!(check_admitted(&alg));
        let st = alg.structure().clone();
        let sig = st.signature().clone().with_bool(&Sort::new("Bool")).unwrap();
        let mut rebuilt = Structure::new(
            sig,
            vec![
                (Sort::new("Nat"), vec!["0".into(), "1".into()]),
                (Sort::new("Bool"), vec!["false".into(), "true".into()]),
            ],
        )
        .unwrap();
        for (i, d) in st.signature().symbols().iter().enumerate() {
            for (args, r) in st.entries(i) {
                rebuilt.set(&d.name, &args, r).unwrap();
            }
        }
        assert!(!check_admitted(&FiniteAlgebra::new(rebuilt).unwrap()));
    }

    #[test]
    fn unknown_bool_connective_rejected() {
        let text = NAT_MOD2.replace("op ∨ :", "op xor :").replace("table ∨", "table xor");
        assert!(matches!(parse_algebra(&text), Err(Error::NotAdmitted(_))));
    }

    #[test]
    fn parse_term_and_eval() {
        let alg = parse_algebra(A2).unwrap();
        let tuple = parse_tuple(alg.signature(), "x:Nat").unwrap();
        let t = parse_term(alg.signature(), &tuple, "(x + 0) + x").unwrap();
        let mut a = Assignment::new();
        a.bind_name(alg.structure(), &tuple.vars()[0], "1").unwrap();
        assert_eq!(eval(&alg, &a, &t).unwrap().index, 0);
        assert_eq!(t.to_string(), "(x + 0) + x");
    }
}
