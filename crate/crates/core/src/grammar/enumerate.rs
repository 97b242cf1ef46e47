use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};

use super::{Alternative, Height, HeightMap, NtId, Symbol, Tree, TreeGrammar};

const UNBOUNDED: u64 = u64::MAX;

/// Members of `L(n)` by nondecreasing generalized height, then size, then
/// [`Tree::lex_cmp`]; at most `max_count` of them, none above `max_height`.
///
/// Fails with `UnboundedLayer` if some height layer is infinite, which
/// needs a cycle of weight-0 symbols with arguments.
pub fn enumerate(
    g: &TreeGrammar,
    n: NtId,
    hm: &HeightMap,
    max_height: u64,
    max_count: usize,
) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    let Height::Finite(lowest) = hm.get(n) else {
        return Ok(out);
    };
    if max_count == 0 {
        return Ok(out);
    }
    let mut e = Enumerator::new(g, hm);
    for h in lowest..=max_height {
        let bound = e.max_size(n, h);
        if bound == UNBOUNDED {
            return Err(Error::UnboundedLayer {
                nonterminal: g.name(n).to_string(),
                height: h,
            });
        }
        for s in 1..=bound as usize {
            let cell = e.cell(n, h, s);
            for t in cell.iter() {
                out.push(t.clone());
                if out.len() == max_count {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

struct Enumerator<'g> {
    hm: &'g HeightMap,
    /// Function alternatives of each nonterminal after chain expansion, with
    /// their symbol weight.
    funcs: Vec<Vec<(&'g Symbol, &'g [NtId], u64)>>,
    cells: HashMap<(NtId, u64, usize), Rc<Vec<Tree>>>,
    /// Largest term size per nonterminal among heights `≤ h`, indexed by
    /// `h`; 0 for no terms.
    sizes: Vec<Vec<u64>>,
}

impl<'g> Enumerator<'g> {
    fn new(g: &'g TreeGrammar, hm: &'g HeightMap) -> Self {
        let w = hm.weights();
        let funcs = g
            .chain_closure()
            .into_iter()
            .map(|reach| {
                let mut alts = Vec::new();
                for m in reach {
                    for alt in g.rule(m) {
                        if let Alternative::Func(s, args) = alt {
                            let entry = (s, args.as_slice(), w.get(s));
                            if !alts.contains(&entry) {
                                alts.push(entry);
                            }
                        }
                    }
                }
                alts
            })
            .collect();
        Enumerator {
            hm,
            funcs,
            cells: HashMap::new(),
            sizes: Vec::new(),
        }
    }

    fn max_size(&mut self, n: NtId, h: u64) -> u64 {
        while self.sizes.len() as u64 <= h {
            let level = self.sizes.len() as u64;
            let next = self.level_sizes(level);
            self.sizes.push(next);
        }
        self.sizes[h as usize][n.0]
    }

    fn level_sizes(&self, h: u64) -> Vec<u64> {
        let count = self.funcs.len();
        let mut cur = vec![0u64; count];
        let mut round = 0;
        loop {
            let mut changed = false;
            for nt in 0..count {
                if cur[nt] == UNBOUNDED {
                    continue;
                }
                let mut best = cur[nt];
                for &(_, args, w) in &self.funcs[nt] {
                    if w > h {
                        continue;
                    }
                    let mut total: u64 = 1;
                    for a in args {
                        let sub = if w == 0 {
                            cur[a.0]
                        } else {
                            self.sizes[(h - w) as usize][a.0]
                        };
                        if sub == 0 {
                            total = 0;
                            break;
                        }
                        total = total.saturating_add(sub);
                    }
                    best = best.max(total);
                }
                if best != cur[nt] {
                    // Still growing after every chain of zero-weight steps
                    // had its chance: the layer is infinite.
                    cur[nt] = if round > count { UNBOUNDED } else { best };
                    changed = true;
                }
            }
            if !changed {
                return cur;
            }
            round += 1;
        }
    }

    fn height(&self, n: NtId) -> Option<u64> {
        self.hm.get(n).finite()
    }

    fn cell(&mut self, n: NtId, h: u64, s: usize) -> Rc<Vec<Tree>> {
        if let Some(c) = self.cells.get(&(n, h, s)) {
            return c.clone();
        }
        let mut out = Vec::new();
        for ai in 0..self.funcs[n.0].len() {
            let (sym, args, w) = self.funcs[n.0][ai];
            if args.is_empty() {
                if w == h && s == 1 {
                    out.push(Tree::leaf(sym.clone()));
                }
                continue;
            }
            if w > h || s < args.len() + 1 {
                continue;
            }
            let c = h - w;
            if args.iter().any(|a| self.height(*a).is_none_or(|x| x > c)) {
                continue;
            }
            for split in compositions(s - 1, args.len()) {
                let mut exact = Vec::with_capacity(args.len());
                let mut below = Vec::with_capacity(args.len());
                for (a, &si) in args.iter().zip(&split) {
                    exact.push(self.cell(*a, c, si));
                    let lo = self.height(*a).unwrap();
                    let lower: Vec<Rc<Vec<Tree>>> = (lo..c).map(|x| self.cell(*a, x, si)).collect();
                    below.push(lower);
                }
                // The first child of height exactly `c` sits at `p`.
                for p in 0..args.len() {
                    let pools: Vec<Vec<&Tree>> = (0..args.len())
                        .map(|j| {
                            let mut pool: Vec<&Tree> = Vec::new();
                            if j <= p {
                                if j == p {
                                    pool.extend(exact[j].iter());
                                } else {
                                    pool.extend(below[j].iter().flat_map(|v| v.iter()));
                                }
                            } else {
                                pool.extend(below[j].iter().flat_map(|v| v.iter()));
                                pool.extend(exact[j].iter());
                            }
                            pool
                        })
                        .collect();
                    if pools.iter().any(Vec::is_empty) {
                        continue;
                    }
                    product(&pools, &mut |children| {
                        out.push(Tree {
                            symbol: sym.clone(),
                            args: children.iter().map(|t| (*t).clone()).collect(),
                        })
                    });
                }
            }
        }
        out.sort_by(|a, b| a.lex_cmp(b));
        out.dedup();
        let rc = Rc::new(out);
        self.cells.insert((n, h, s), rc.clone());
        rc
    }
}

/// Ordered ways to write `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product<'t>(pools: &[Vec<&'t Tree>], f: &mut dyn FnMut(&[&'t Tree])) {
    fn go<'t>(
        pools: &[Vec<&'t Tree>],
        acc: &mut Vec<&'t Tree>,
        f: &mut dyn FnMut(&[&'t Tree]),
    ) {
        if acc.len() == pools.len() {
            f(acc);
            return;
        }
        for t in &pools[acc.len()] {
            acc.push(t);
            go(pools, acc, f);
            acc.pop();
        }
    }
    go(pools, &mut Vec::with_capacity(pools.len()), f);
}
