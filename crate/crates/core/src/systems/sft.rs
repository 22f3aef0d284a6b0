//! Subshifts of finite type and the graph structure of their transition
//! matrices.

use std::collections::VecDeque;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    OneSided,
}

/// A vertex shift: sequences whose adjacent symbols are allowed by a 0/1
/// transition matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sft {
    alphabet: usize,
    allowed: Vec<bool>,
    succ: Vec<Vec<Symbol>>,
    pred: Vec<Vec<Symbol>>,
    sidedness: Sidedness,
}

impl Sft {
    /// Builds the shift from a square 0/1 matrix. Every row and column must
    /// contain a 1.
    pub fn new(transitions: &[Vec<u8>], sidedness: Sidedness) -> Result<Sft> {
        let n = transitions.len();
        if n == 0 {
            return Err(Error::spec("parameters.transitions", "alphabet_size must be at least 1"));
        }
        if n > 256 {
            return Err(Error::spec("parameters.transitions", "alphabet_size must be at most 256"));
        }
        let mut allowed = vec![false; n * n];
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::spec(
                    format!("parameters.transitions[{i}]"),
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => allowed[i * n + j] = true,
                    _ => {
                        return Err(Error::spec(
                            format!("parameters.transitions[{i}][{j}]"),
                            format!("entry must be 0 or 1, got {v}"),
                        ))
                    }
                }
            }
        }
        for i in 0..n {
            if !(0..n).any(|j| allowed[i * n + j]) {
                return Err(Error::spec(format!("parameters.transitions[{i}]"), "row of zeros"));
            }
            if !(0..n).any(|j| allowed[j * n + i]) {
                return Err(Error::spec("parameters.transitions", format!("column {i} is all zeros")));
            }
        }
        let succ = (0..n)
            .map(|i| (0..n).filter(|&j| allowed[i * n + j]).map(|j| j as Symbol).collect())
            .collect();
        let pred = (0..n)
            .map(|j| (0..n).filter(|&i| allowed[i * n + j]).map(|i| i as Symbol).collect())
            .collect();
        Ok(Sft { alphabet: n, allowed, succ, pred, sidedness })
    }

    pub fn full(k: usize) -> Sft {
        Sft::new(&vec![vec![1; k]; k], Sidedness::TwoSided).expect("full shift is valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    pub fn is_two_sided(&self) -> bool {
        self.sidedness == Sidedness::TwoSided
    }

    #[inline]
    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.allowed[a as usize * self.alphabet + b as usize]
    }

    pub fn successors(&self, a: Symbol) -> &[Symbol] {
        &self.succ[a as usize]
    }

    pub fn predecessors(&self, a: Symbol) -> &[Symbol] {
        &self.pred[a as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.alphabet).map(|s| s as Symbol)
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.alphabet)
            .map(|i| (0..self.alphabet).map(|j| self.allowed[i * self.alphabet + j] as u8).collect())
            .collect()
    }

    /// Whether every adjacent pair of `word` is allowed.
    pub fn is_admissible(&self, word: &[Symbol]) -> bool {
        word.iter().all(|&s| (s as usize) < self.alphabet)
            && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Whether `word` can be repeated forever (including the wrap-around).
    pub fn is_cyclically_admissible(&self, word: &[Symbol]) -> bool {
        !word.is_empty()
            && self.is_admissible(word)
            && self.allows(*word.last().unwrap(), word[0])
    }

    /// Number of admissible words of each length `1..=max_len`, by dynamic
    /// programming over end symbols.
    pub fn word_counts(&self, max_len: usize) -> Vec<u128> {
        let mut ends = vec![1u128; self.alphabet];
        let mut out = Vec::with_capacity(max_len);
        for len in 1..=max_len {
            if len > 1 {
                let mut next = vec![0u128; self.alphabet];
                for a in 0..self.alphabet {
                    for &b in &self.succ[a] {
                        next[b as usize] += ends[a];
                    }
                }
                ends = next;
            }
            out.push(ends.iter().sum());
        }
        out
    }

    /// All admissible words of length `len`, in lexicographic order.
    pub fn words(&self, len: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        if len == 0 {
            out.push(Vec::new());
            return out;
        }
        let mut stack = Vec::with_capacity(len);
        fn rec(sft: &Sft, len: usize, stack: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
            if stack.len() == len {
                out.push(stack.clone());
                return;
            }
            let choices: Vec<Symbol> = match stack.last() {
                None => sft.symbols().collect(),
                Some(&a) => sft.successors(a).to_vec(),
            };
            for s in choices {
                stack.push(s);
                rec(sft, len, stack, out);
                stack.pop();
            }
        }
        rec(self, len, &mut stack, &mut out);
        out
    }

    /// Shortest path `from -> ... -> to` with at least one step, as the list
    /// of symbols after `from` (so it ends with `to`). BFS visits successors in
    /// increasing order, so the result is deterministic.
    pub fn shortest_path(&self, from: Symbol, to: Symbol) -> Option<Vec<Symbol>> {
        let n = self.alphabet;
        let mut parent: Vec<Option<Symbol>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in self.successors(from) {
            if !seen[s as usize] {
                seen[s as usize] = true;
                parent[s as usize] = None;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(p) = parent[cur as usize] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &v in self.successors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    parent[v as usize] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Length of the shortest path with at least one step, for every ordered
    /// pair. `None` marks unreachable pairs.
    pub fn distance_table(&self) -> Vec<Vec<Option<usize>>> {
        self.symbols()
            .map(|a| self.symbols().map(|b| self.shortest_path(a, b).map(|p| p.len())).collect())
            .collect()
    }

    /// Strongly connected components in a deterministic order (by smallest
    /// member). Each component lists its symbols in increasing order.
    pub fn components(&self) -> Vec<Vec<Symbol>> {
        let reach: Vec<Vec<bool>> = self.symbols().map(|a| self.reachable_from(a)).collect();
        let mut assigned = vec![false; self.alphabet];
        let mut out = Vec::new();
        for a in 0..self.alphabet {
            if assigned[a] {
                continue;
            }
            let comp: Vec<Symbol> = (0..self.alphabet)
                .filter(|&b| b == a || (reach[a][b] && reach[b][a]))
                .map(|b| b as Symbol)
                .collect();
            for &b in &comp {
                assigned[b as usize] = true;
            }
            out.push(comp);
        }
        out
    }

    /// Whether a component carries a cycle (a single symbol needs a self loop).
    pub fn is_nontrivial_component(&self, comp: &[Symbol]) -> bool {
        comp.len() > 1 || self.allows(comp[0], comp[0])
    }

    /// Symbols reachable in one or more steps from `a`.
    pub fn reachable_from(&self, a: Symbol) -> Vec<bool> {
        let mut seen = vec![false; self.alphabet];
        let mut stack: Vec<Symbol> = self.successors(a).to_vec();
        for &s in &stack {
            seen[s as usize] = true;
        }
        while let Some(u) = stack.pop() {
            for &v in self.successors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// First ordered pair `(a, b)` with no path from `a` to `b`, if any.
    pub fn unreachable_pair(&self) -> Option<(Symbol, Symbol)> {
        self.symbols().find_map(|a| {
            let reach = self.reachable_from(a);
            self.symbols().find(|&b| !reach[b as usize]).map(|b| (a, b))
        })
    }

    pub fn is_irreducible(&self) -> bool {
        self.unreachable_pair().is_none()
    }

    /// Period (gcd of cycle lengths) of an irreducible matrix.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        // BFS levels from symbol 0; the period is the gcd of level(u) + 1 - level(v)
        // over all edges u -> v.
        let mut level = vec![usize::MAX; self.alphabet];
        level[0] = 0;
        let mut queue = VecDeque::from([0 as Symbol]);
        while let Some(u) = queue.pop_front() {
            for &v in self.successors(u) {
                if level[v as usize] == usize::MAX {
                    level[v as usize] = level[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..self.alphabet {
            for &v in &self.succ[u] {
                let d = (level[u] as i64 + 1 - level[v as usize] as i64).unsigned_abs() as usize;
                g = g.gcd(&d);
            }
        }
        Some(g)
    }

    pub fn is_primitive(&self) -> bool {
        self.period() == Some(1)
    }

    /// Shortest cycle through `a` as a word starting with `a`.
    pub fn shortest_cycle_through(&self, a: Symbol) -> Option<Vec<Symbol>> {
        let path = self.shortest_path(a, a)?;
        let mut cycle = vec![a];
        cycle.extend_from_slice(&path[..path.len() - 1]);
        Some(cycle)
    }

    /// Whether the shift space is finite (every symbol on a cycle has a
    /// unique successor within its component and components do not branch).
    /// Equivalent to: every symbol has exactly one successor and one
    /// predecessor, i.e. the graph is a disjoint union of cycles.
    pub fn is_finite_space(&self) -> bool {
        self.succ.iter().all(|s| s.len() == 1) && self.pred.iter().all(|p| p.len() == 1)
    }

    /// Kronecker product: the shift on pairs of symbols.
    pub fn product(&self, other: &Sft) -> Result<Sft> {
        let n = self.alphabet * other.alphabet;
        if n > 256 {
            return Err(Error::spec("parameters.factors", "product alphabet exceeds 256 symbols"));
        }
        let mut m = vec![vec![0u8; n]; n];
        for a1 in 0..self.alphabet {
            for b1 in 0..other.alphabet {
                for a2 in 0..self.alphabet {
                    for b2 in 0..other.alphabet {
                        let ok = self.allowed[a1 * self.alphabet + a2]
                            && other.allowed[b1 * other.alphabet + b2];
                        m[a1 * other.alphabet + b1][a2 * other.alphabet + b2] = ok as u8;
                    }
                }
            }
        }
        let sidedness = if self.is_two_sided() && other.is_two_sided() {
            Sidedness::TwoSided
        } else {
            Sidedness::OneSided
        };
        Sft::new(&m, sidedness)
    }
}
