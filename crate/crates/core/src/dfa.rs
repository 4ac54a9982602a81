//! Regular expression to DFA: Thompson construction, subset construction,
//! completion and Moore minimization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::grammar::Rhs;

/// A symbol of a right-hand side: terminal or (unmarked) non-terminal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RhsSymbol {
    Terminal(String),
    NonTerminal(String),
}

impl fmt::Display for RhsSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsSymbol::Terminal(t) => write!(f, "'{t}'"),
            RhsSymbol::NonTerminal(n) => f.write_str(n),
        }
    }
}

/// Complete deterministic automaton over an explicit alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: Vec<RhsSymbol>,
    /// `delta[state][symbol index]`.
    pub delta: Vec<Vec<usize>>,
    pub initial: usize,
    pub accepting: Vec<bool>,
}

struct Nfa {
    /// `(from, symbol or epsilon, to)`
    edges: Vec<Vec<(Option<usize>, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    /// Returns `(entry, exit)`.
    fn build(&mut self, r: &Rhs, index: &BTreeMap<RhsSymbol, usize>) -> (usize, usize) {
        match r {
            Rhs::Terminal(_) | Rhs::NonTerminal(_) => {
                let (s, e) = (self.state(), self.state());
                let sym = match r {
                    Rhs::Terminal(t) => RhsSymbol::Terminal(t.clone()),
                    Rhs::NonTerminal(n) => RhsSymbol::NonTerminal(n.name.clone()),
                    _ => unreachable!(),
                };
                if let Some(&i) = index.get(&sym) {
                    self.edges[s].push((Some(i), e));
                }
                (s, e)
            }
            Rhs::Epsilon => {
                let s = self.state();
                (s, s)
            }
            Rhs::Seq(xs) => {
                let s = self.state();
                let mut cur = s;
                for x in xs {
                    let (a, b) = self.build(x, index);
                    self.edges[cur].push((None, a));
                    cur = b;
                }
                (s, cur)
            }
            Rhs::Alt(xs) => {
                let (s, e) = (self.state(), self.state());
                for x in xs {
                    let (a, b) = self.build(x, index);
                    self.edges[s].push((None, a));
                    self.edges[b].push((None, e));
                }
                (s, e)
            }
            Rhs::Star(x) => {
                let s = self.state();
                let (a, b) = self.build(x, index);
                self.edges[s].push((None, a));
                self.edges[b].push((None, s));
                (s, s)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut work: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = work.pop() {
            for &(sym, to) in &self.edges[q] {
                if sym.is_none() && set.insert(to) {
                    work.push(to);
                }
            }
        }
    }
}

/// Builds the minimal complete DFA of `r` over `alphabet`. Symbols of `r`
/// outside the alphabet never match.
pub fn regex_to_dfa(r: &Rhs, alphabet: &[RhsSymbol]) -> Dfa {
    let mut alphabet: Vec<RhsSymbol> = alphabet.to_vec();
    alphabet.sort();
    alphabet.dedup();
    let index: BTreeMap<RhsSymbol, usize> = alphabet
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let mut nfa = Nfa { edges: Vec::new() };
    let (entry, exit) = nfa.build(r, &index);

    let mut start = BTreeSet::from([entry]);
    nfa.closure(&mut start);
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut sets = vec![start.clone()];
    ids.insert(start, 0);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut row = Vec::with_capacity(alphabet.len());
        for a in 0..alphabet.len() {
            let mut next = BTreeSet::new();
            for &q in &sets[i] {
                for &(sym, to) in &nfa.edges[q] {
                    if sym == Some(a) {
                        next.insert(to);
                    }
                }
            }
            nfa.closure(&mut next);
            let id = *ids.entry(next.clone()).or_insert_with(|| {
                sets.push(next);
                sets.len() - 1
            });
            row.push(id);
        }
        delta.push(row);
        i += 1;
    }
    let accepting = sets.iter().map(|s| s.contains(&exit)).collect();
    Dfa {
        alphabet,
        delta,
        initial: 0,
        accepting,
    }
    .minimize()
}

impl Dfa {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn symbol_index(&self, s: &RhsSymbol) -> Option<usize> {
        self.alphabet.binary_search(s).ok()
    }

    pub fn step(&self, q: usize, s: &RhsSymbol) -> Option<usize> {
        self.symbol_index(s).map(|i| self.delta[q][i])
    }

    pub fn accepts(&self, word: &[RhsSymbol]) -> bool {
        let mut q = self.initial;
        for s in word {
            match self.step(q, s) {
                Some(n) => q = n,
                None => return false,
            }
        }
        self.accepting[q]
    }

    /// States from which no accepting state is reachable.
    pub fn dead_states(&self) -> Vec<bool> {
        let n = self.len();
        let mut live: Vec<bool> = self.accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..n {
                if !live[q] && self.delta[q].iter().any(|&t| live[t]) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        live.iter().map(|l| !l).collect()
    }

    /// Number of non-dead states.
    pub fn live_states(&self) -> usize {
        self.dead_states().iter().filter(|d| !**d).count()
    }

    /// Moore partition refinement followed by canonical breadth-first numbering
    /// (dead state, when present, numbered last).
    pub fn minimize(&self) -> Dfa {
        // Restrict to reachable states first.
        let mut reach = vec![false; self.len()];
        let mut queue = VecDeque::from([self.initial]);
        reach[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if !reach[t] {
                    reach[t] = true;
                    queue.push_back(t);
                }
            }
        }
        let mut class: Vec<usize> = self.accepting.iter().map(|&a| a as usize).collect();
        loop {
            let mut sigs: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next = vec![0; self.len()];
            for q in 0..self.len() {
                if !reach[q] {
                    continue;
                }
                let sig = (
                    class[q],
                    self.delta[q].iter().map(|&t| class[t]).collect::<Vec<_>>(),
                );
                let n = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(n);
            }
            let before = (0..self.len())
                .filter(|&q| reach[q])
                .map(|q| class[q])
                .collect::<BTreeSet<_>>()
                .len();
            let after = sigs.len();
            class = next;
            if before == after {
                break;
            }
        }
        // Quotient automaton with canonical numbering.
        let dead = self.dead_states();
        let dead_class = (0..self.len())
            .find(|&q| reach[q] && dead[q])
            .map(|q| class[q]);
        let mut order: BTreeMap<usize, usize> = BTreeMap::new();
        let mut seq = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        let mut seen_class = BTreeSet::from([class[self.initial]]);
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        rep.insert(class[self.initial], self.initial);
        while let Some(q) = queue.pop_front() {
            if Some(class[q]) != dead_class {
                order.insert(class[q], seq.len());
                seq.push(class[q]);
            }
            for &t in &self.delta[q] {
                if seen_class.insert(class[t]) {
                    rep.insert(class[t], t);
                    queue.push_back(t);
                }
            }
        }
        if let Some(d) = dead_class {
            order.insert(d, seq.len());
            seq.push(d);
        }
        let delta = seq
            .iter()
            .map(|c| {
                self.delta[rep[c]]
                    .iter()
                    .map(|t| order[&class[*t]])
                    .collect()
            })
            .collect();
        let accepting = seq.iter().map(|c| self.accepting[rep[c]]).collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: order[&class[self.initial]],
            accepting,
        }
    }

    /// The automaton recognizing this language minus every single-symbol word
    /// drawn from `excluded`.
    pub fn without_single_symbols(&self, excluded: &[RhsSymbol]) -> Dfa {
        let excl: BTreeSet<usize> = excluded
            .iter()
            .filter_map(|s| self.symbol_index(s))
            .collect();
        // phase 0: nothing read, 1: exactly one excluded symbol read, 2: anything else
        let mut ids: BTreeMap<(usize, u8), usize> = BTreeMap::new();
        let mut states = vec![(self.initial, 0u8)];
        ids.insert((self.initial, 0), 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (q, phase) = states[i];
            let mut row = Vec::new();
            for a in 0..self.alphabet.len() {
                let np = if phase == 0 && excl.contains(&a) {
                    1
                } else {
                    2
                };
                let key = (self.delta[q][a], np);
                let id = *ids.entry(key).or_insert_with(|| {
                    states.push(key);
                    states.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            i += 1;
        }
        let accepting = states
            .iter()
            .map(|&(q, p)| self.accepting[q] && p != 1)
            .collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            initial: 0,
            accepting,
        }
        .minimize()
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dead = self.dead_states();
        for q in 0..self.len() {
            if dead[q] {
                continue;
            }
            let mark = match (q == self.initial, self.accepting[q]) {
                (true, true) => "->*",
                (true, false) => "-> ",
                (false, true) => "  *",
                (false, false) => "   ",
            };
            write!(f, "{mark}{q}:")?;
            for (a, &t) in self.delta[q].iter().enumerate() {
                if !dead[t] {
                    write!(f, " {}->{t}", self.alphabet[a])?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> RhsSymbol {
        RhsSymbol::Terminal(s.into())
    }
    fn n(s: &str) -> RhsSymbol {
        RhsSymbol::NonTerminal(s.into())
    }

    #[test]
    fn production_a_of_static_example() {
        let r = Rhs::seq([Rhs::nt("E"), Rhs::opt(Rhs::t(";"))]);
        let alpha = [n("E"), t(";"), t("s"), t("z")];
        let d = regex_to_dfa(&r, &alpha);
        assert_eq!(d.live_states(), 3);
        assert_eq!(d.len(), 4);
        let q1 = d.initial;
        let q2 = d.step(q1, &n("E")).unwrap();
        let q3 = d.step(q2, &t(";")).unwrap();
        assert!(!d.accepting[q1] && d.accepting[q2] && d.accepting[q3]);
        assert!(d.dead_states()[d.step(q3, &t(";")).unwrap()]);

        let stripped = d.without_single_symbols(&[n("E")]);
        assert!(!stripped.accepts(&[n("E")]));
        assert!(stripped.accepts(&[n("E"), t(";")]));
        assert_eq!(stripped.live_states(), 3);
    }

    #[test]
    fn epsilon_dfa() {
        let d = regex_to_dfa(&Rhs::Epsilon, &[t("a")]);
        assert_eq!(d.len(), 2);
        assert!(d.accepting[d.initial]);
        assert!(d.accepts(&[]));
        assert!(!d.accepts(&[t("a")]));
    }

    #[test]
    fn single_terminal_has_two_live_states() {
        let d = regex_to_dfa(&Rhs::t("z"), &[t("z"), n("E")]);
        assert_eq!(d.live_states(), 2);
        assert_eq!(d.without_single_symbols(&[n("E")]), d);
    }

    #[test]
    fn minimization_merges_equivalent_states() {
        let r = Rhs::alt([
            Rhs::seq([Rhs::t("a"), Rhs::t("b")]),
            Rhs::seq([Rhs::t("a"), Rhs::t("b")]),
        ]);
        let d = regex_to_dfa(&r, &[t("a"), t("b")]);
        assert_eq!(d.live_states(), 3);
    }
}
