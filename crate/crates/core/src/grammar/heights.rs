use std::collections::BTreeMap;
use std::fmt;

use super::{Alternative, NtId, Symbol, TreeGrammar};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Height {
    Finite(u64),
    Infinite,
}

impl Height {
    pub fn finite(self) -> Option<u64> {
        match self {
            Height::Finite(h) => Some(h),
            Height::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Height::Infinite
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("∞"),
        }
    }
}

/// Symbol weights `hg(f)`: variables 0, everything else 1 unless overridden.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    var: u64,
    other: u64,
    overrides: BTreeMap<Symbol, u64>,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            var: 0,
            other: 1,
            overrides: BTreeMap::new(),
        }
    }
}

impl Weights {
    pub fn uniform(var: u64, other: u64) -> Self {
        Weights {
            var,
            other,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, symbol: Symbol, weight: u64) -> Self {
        self.overrides.insert(symbol, weight);
        self
    }

    pub fn get(&self, symbol: &Symbol) -> u64 {
        match self.overrides.get(symbol) {
            Some(&w) => w,
            None if matches!(symbol, Symbol::Var(_)) => self.var,
            None => self.other,
        }
    }

    pub fn max_weight(&self) -> u64 {
        self.overrides
            .values()
            .copied()
            .chain([self.var, self.other])
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightMap {
    heights: Vec<Height>,
    weights: Weights,
}

impl HeightMap {
    pub fn get(&self, n: NtId) -> Height {
        self.heights[n.0]
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn as_slice(&self) -> &[Height] {
        &self.heights
    }
}

fn combine(alt: &Alternative, h: &[Height], w: &Weights) -> Height {
    let (args, weight): (&[NtId], u64) = match alt {
        Alternative::Chain(m) => (std::slice::from_ref(m), 0),
        Alternative::Func(s, args) => (args, w.get(s)),
    };
    let mut top = 0;
    for a in args {
        match h[a.0] {
            Height::Finite(x) => top = top.max(x),
            Height::Infinite => return Height::Infinite,
        }
    }
    Height::Finite(top + weight)
}

/// Least fixpoint by repeated sweeps over all alternatives.
pub fn heights_naive(g: &TreeGrammar, weights: &Weights) -> HeightMap {
    let mut h = vec![Height::Infinite; g.nonterminals().len()];
    loop {
        let mut changed = false;
        for id in g.ids() {
            for alt in g.rule(id) {
                let v = combine(alt, &h, weights);
                if v < h[id.0] {
                    h[id.0] = v;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    HeightMap {
        heights: h,
        weights: weights.clone(),
    }
}

/// Worklist version: alternatives fire once all their arguments are final,
/// and values are finalized in nondecreasing order from a bucket queue.
/// Linear in the grammar size up to the bucket bookkeeping; with weights in
/// {0, 1} the first finite value reached is already final.
pub fn heights_liquid(g: &TreeGrammar, weights: &Weights) -> HeightMap {
    let n = g.nonterminals().len();
    // Flattened alternatives: (head, weight, pending argument count).
    let mut heads = Vec::new();
    let mut weight = Vec::new();
    let mut pending = Vec::new();
    let mut top = Vec::new();
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut buckets: BTreeMap<u64, Vec<NtId>> = BTreeMap::new();
    for id in g.ids() {
        for alt in g.rule(id) {
            let k = heads.len();
            let (args, w): (&[NtId], u64) = match alt {
                Alternative::Chain(m) => (std::slice::from_ref(m), 0),
                Alternative::Func(s, args) => (args, weights.get(s)),
            };
            heads.push(id);
            weight.push(w);
            pending.push(args.len());
            top.push(0u64);
            for a in args {
                occurs[a.0].push(k);
            }
            if args.is_empty() {
                buckets.entry(w).or_default().push(id);
            }
        }
    }
    let mut h = vec![Height::Infinite; n];
    // Pushed values never drop below the level being popped, so a refilled
    // level is popped again before any higher one.
    while let Some((value, batch)) = buckets.pop_first() {
        for nt in batch {
            if !h[nt.0].is_infinite() {
                continue;
            }
            h[nt.0] = Height::Finite(value);
            for &k in &occurs[nt.0] {
                pending[k] -= 1;
                top[k] = top[k].max(value);
                if pending[k] == 0 && h[heads[k].0].is_infinite() {
                    buckets.entry(top[k] + weight[k]).or_default().push(heads[k]);
                }
            }
        }
    }
    HeightMap {
        heights: h,
        weights: weights.clone(),
    }
}
