//! Visibly pushdown automata over token alphabets partitioned into call,
//! internal and return letters. A word is accepted when a run ends in an
//! accepting state with an empty stack, so only well-matched words are accepted.

mod analysis;
mod lazy;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grammar::LanguageDefinition;
use crate::lexer::Token;

pub use analysis::{Step, WellMatched};
pub use lazy::{
    complement, difference, materialize, product, product_with_states, union, Determinized,
    Explicit, LazyProduct, LazyVpda,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Call,
    Internal,
    Return,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub token: Token,
    pub kind: Kind,
    /// Primary sort key; ties are broken by lexeme.
    pub rank: u32,
}

/// Ordered, partitioned alphabet. The order is the tie-break order for
/// shortest words.
#[derive(Clone, Debug, Default)]
pub struct Alphabet {
    letters: Vec<Letter>,
    index: HashMap<Token, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(mut letters: Vec<Letter>) -> Result<Alphabet> {
        letters.sort_by(|a, b| {
            (a.rank, &a.token.lexeme, &a.token.terminal).cmp(&(
                b.rank,
                &b.token.lexeme,
                &b.token.terminal,
            ))
        });
        letters.dedup();
        let mut index = HashMap::new();
        for (i, l) in letters.iter().enumerate() {
            if index.insert(l.token.clone(), i).is_some() {
                return Err(Error::PartitionMismatch);
            }
        }
        Ok(Alphabet { letters, index })
    }

    /// Letters for `tokens` under `defn`: grouping parentheses are call and
    /// return letters, everything else is internal. Grouping letters are
    /// always present.
    pub fn for_definition<'a>(
        defn: &LanguageDefinition,
        tokens: impl IntoIterator<Item = &'a Token>,
    ) -> Alphabet {
        let open = Token::new(&defn.grouping.open, &defn.grouping.open);
        let close = Token::new(&defn.grouping.close, &defn.grouping.close);
        let mut letters = vec![
            Letter {
                token: open,
                kind: Kind::Call,
                rank: 0,
            },
            Letter {
                token: close,
                kind: Kind::Return,
                rank: 1,
            },
        ];
        for t in tokens {
            let (kind, rank) = if t.terminal == defn.grouping.open {
                (Kind::Call, 0)
            } else if t.terminal == defn.grouping.close {
                (Kind::Return, 1)
            } else {
                let pos = defn
                    .terminals
                    .iter()
                    .position(|x| x.name == t.terminal)
                    .unwrap_or(defn.terminals.len());
                (Kind::Internal, pos as u32 + 2)
            };
            letters.push(Letter {
                token: Token::new(&t.terminal, &t.lexeme),
                kind,
                rank,
            });
        }
        Alphabet::new(letters).expect("consistent partition")
    }

    /// Alphabet with one call, one return and the given internal names, each
    /// token spelled as its name.
    pub fn simple(call: &str, ret: &str, internals: &[&str]) -> Alphabet {
        let mut letters = vec![
            Letter {
                token: Token::new(call, call),
                kind: Kind::Call,
                rank: 0,
            },
            Letter {
                token: Token::new(ret, ret),
                kind: Kind::Return,
                rank: 1,
            },
        ];
        for (i, s) in internals.iter().enumerate() {
            letters.push(Letter {
                token: Token::new(*s, *s),
                kind: Kind::Internal,
                rank: i as u32 + 2,
            });
        }
        Alphabet::new(letters).expect("distinct letters")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn kind(&self, a: usize) -> Kind {
        self.letters[a].kind
    }

    pub fn token(&self, a: usize) -> &Token {
        &self.letters[a].token
    }

    pub fn index_of(&self, t: &Token) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.letters
            .iter()
            .position(|l| l.token.lexeme == name || l.token.terminal == name)
    }

    pub fn encode(&self, word: &[Token]) -> Option<Vec<usize>> {
        word.iter().map(|t| self.index_of(t)).collect()
    }

    pub fn decode(&self, word: &[usize]) -> Vec<Token> {
        word.iter()
            .map(|&a| self.letters[a].token.clone())
            .collect()
    }

    /// Union of two alphabets; fails when a letter has different kinds.
    pub fn merge(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut letters = self.letters.clone();
        for l in &other.letters {
            match self.index.get(&l.token) {
                Some(&i) if self.letters[i].kind != l.kind => return Err(Error::PartitionMismatch),
                Some(_) => {}
                None => letters.push(l.clone()),
            }
        }
        Alphabet::new(letters)
    }
}

/// Explicit VPDA with states and stack symbols numbered from zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vpda {
    pub alphabet: Alphabet,
    pub states: usize,
    pub stack_symbols: usize,
    pub initial: usize,
    pub accepting: Vec<bool>,
    /// `(from, letter, to)`
    pub internals: Vec<(usize, usize, usize)>,
    /// `(from, letter, to, pushed)`
    pub calls: Vec<(usize, usize, usize, usize)>,
    /// `(from, letter, popped, to)`
    pub returns: Vec<(usize, usize, usize, usize)>,
    /// Optional display names.
    pub state_names: Vec<String>,
    pub stack_names: Vec<String>,
}

/// Adjacency lists for an explicit automaton.
pub(crate) struct Index {
    pub internal: Vec<Vec<(usize, usize)>>,
    pub call: Vec<Vec<(usize, usize, usize)>>,
    pub ret: Vec<Vec<(usize, usize, usize)>>,
    /// `(from state, popped) -> [(letter, to)]`
    pub ret_by: HashMap<(usize, usize), Vec<(usize, usize)>>,
}

impl Vpda {
    pub fn new(alphabet: Alphabet, states: usize, initial: usize) -> Vpda {
        Vpda {
            alphabet,
            states,
            stack_symbols: 0,
            initial,
            accepting: vec![false; states],
            internals: Vec::new(),
            calls: Vec::new(),
            returns: Vec::new(),
            state_names: Vec::new(),
            stack_names: Vec::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.accepting.push(false);
        self.states - 1
    }

    pub fn add_stack_symbol(&mut self) -> usize {
        self.stack_symbols += 1;
        self.stack_symbols - 1
    }

    fn check(&self, a: usize, kind: Kind) {
        assert_eq!(
            self.alphabet.kind(a),
            kind,
            "letter {} used with the wrong stack effect",
            self.alphabet.token(a)
        );
    }

    pub fn add_internal(&mut self, from: usize, a: usize, to: usize) {
        self.check(a, Kind::Internal);
        self.internals.push((from, a, to));
    }

    pub fn add_call(&mut self, from: usize, a: usize, to: usize, push: usize) {
        self.check(a, Kind::Call);
        self.stack_symbols = self.stack_symbols.max(push + 1);
        self.calls.push((from, a, to, push));
    }

    pub fn add_return(&mut self, from: usize, a: usize, pop: usize, to: usize) {
        self.check(a, Kind::Return);
        self.stack_symbols = self.stack_symbols.max(pop + 1);
        self.returns.push((from, a, pop, to));
    }

    /// Sorts and deduplicates transitions.
    pub fn normalize(&mut self) {
        self.internals.sort_unstable();
        self.internals.dedup();
        self.calls.sort_unstable();
        self.calls.dedup();
        self.returns.sort_unstable();
        self.returns.dedup();
    }

    pub fn transition_count(&self) -> usize {
        self.internals.len() + self.calls.len() + self.returns.len()
    }

    pub(crate) fn index(&self) -> Index {
        let mut ix = Index {
            internal: vec![Vec::new(); self.states],
            call: vec![Vec::new(); self.states],
            ret: vec![Vec::new(); self.states],
            ret_by: HashMap::new(),
        };
        for &(p, a, q) in &self.internals {
            ix.internal[p].push((a, q));
        }
        for &(p, a, q, g) in &self.calls {
            ix.call[p].push((a, q, g));
        }
        for &(p, a, g, q) in &self.returns {
            ix.ret[p].push((a, g, q));
            ix.ret_by.entry((p, g)).or_default().push((a, q));
        }
        ix
    }

    /// Successor configurations of a set of configurations on letter `a`.
    pub(crate) fn step_configs(
        &self,
        ix: &Index,
        configs: &HashSet<(usize, Vec<usize>)>,
        a: usize,
    ) -> HashSet<(usize, Vec<usize>)> {
        let mut out = HashSet::new();
        for (q, stack) in configs {
            match self.alphabet.kind(a) {
                Kind::Internal => {
                    for &(b, r) in &ix.internal[*q] {
                        if b == a {
                            out.insert((r, stack.clone()));
                        }
                    }
                }
                Kind::Call => {
                    for &(b, r, g) in &ix.call[*q] {
                        if b == a {
                            let mut s = stack.clone();
                            s.push(g);
                            out.insert((r, s));
                        }
                    }
                }
                Kind::Return => {
                    if let Some(&top) = stack.last() {
                        for &(b, g, r) in &ix.ret[*q] {
                            if b == a && g == top {
                                let mut s = stack.clone();
                                s.pop();
                                out.insert((r, s));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Membership by simulating the set of reachable configurations.
    pub fn accepts_symbols(&self, word: &[usize]) -> bool {
        let ix = self.index();
        let mut configs: HashSet<(usize, Vec<usize>)> = HashSet::from([(self.initial, Vec::new())]);
        for &a in word {
            if a >= self.alphabet.len() {
                return false;
            }
            configs = self.step_configs(&ix, &configs, a);
            if configs.is_empty() {
                return false;
            }
        }
        configs
            .iter()
            .any(|(q, s)| s.is_empty() && self.accepting[*q])
    }

    pub fn accepts(&self, word: &[Token]) -> bool {
        match self.alphabet.encode(word) {
            Some(w) => self.accepts_symbols(&w),
            None => false,
        }
    }

    /// All accepted words of length at most `max_len`, in length-then-letter order.
    pub fn enumerate(&self, max_len: usize) -> Vec<Vec<usize>> {
        let ix = self.index();
        let wm = self.well_matched();
        let mut out = Vec::new();
        let mut frontier: Vec<(Vec<usize>, HashSet<(usize, Vec<usize>)>)> =
            vec![(Vec::new(), HashSet::from([(self.initial, Vec::new())]))];
        for len in 0..=max_len {
            let mut next = Vec::new();
            for (w, configs) in frontier {
                if configs
                    .iter()
                    .any(|(q, s)| s.is_empty() && self.accepting[*q])
                {
                    out.push(w.clone());
                }
                if len == max_len {
                    continue;
                }
                let remaining = max_len - len;
                for a in 0..self.alphabet.len() {
                    let succ = self.step_configs(&ix, &configs, a);
                    let succ: HashSet<_> = succ
                        .into_iter()
                        .filter(|(q, s)| {
                            wm.completion_cost(self, &ix, *q, s)
                                .is_some_and(|c| (c as usize) < remaining)
                        })
                        .collect();
                    if !succ.is_empty() {
                        let mut w2 = w.clone();
                        w2.push(a);
                        next.push((w2, succ));
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Accepted words of length at most `max_len`, as tokens.
    pub fn enumerate_tokens(&self, max_len: usize) -> Vec<Vec<Token>> {
        self.enumerate(max_len)
            .iter()
            .map(|w| self.alphabet.decode(w))
            .collect()
    }

    /// Re-expresses the automaton over a larger alphabet.
    pub fn with_alphabet(&self, alphabet: &Alphabet) -> Result<Vpda> {
        let map: Vec<usize> = (0..self.alphabet.len())
            .map(|a| {
                let l = &self.alphabet.letters()[a];
                match alphabet.index_of(&l.token) {
                    Some(b) if alphabet.kind(b) == l.kind => Ok(b),
                    _ => Err(Error::PartitionMismatch),
                }
            })
            .collect::<Result<_>>()?;
        let mut v = self.clone();
        v.alphabet = alphabet.clone();
        v.internals.iter_mut().for_each(|t| t.1 = map[t.1]);
        v.calls.iter_mut().for_each(|t| t.1 = map[t.1]);
        v.returns.iter_mut().for_each(|t| t.1 = map[t.1]);
        v.normalize();
        Ok(v)
    }

    fn state_label(&self, q: usize) -> String {
        self.state_names
            .get(q)
            .cloned()
            .unwrap_or_else(|| q.to_string())
    }

    fn stack_label(&self, g: usize) -> String {
        self.stack_names
            .get(g)
            .cloned()
            .unwrap_or_else(|| g.to_string())
    }

    /// Graphviz rendering with `+g` / `-g` stack annotations.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph vpda {\n  rankdir=LR;\n  node [shape=circle];\n");
        let _ = writeln!(s, "  start [shape=point];\n  start -> q{};", self.initial);
        for q in 0..self.states {
            let shape = if self.accepting[q] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                s,
                "  q{q} [label=\"{}\", shape={shape}];",
                escape(&self.state_label(q))
            );
        }
        let mut edges: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for &(p, a, q) in &self.internals {
            edges
                .entry((p, q))
                .or_default()
                .push(self.alphabet.token(a).lexeme.clone());
        }
        for &(p, a, q, g) in &self.calls {
            edges.entry((p, q)).or_default().push(format!(
                "{} +{}",
                self.alphabet.token(a).lexeme,
                self.stack_label(g)
            ));
        }
        for &(p, a, g, q) in &self.returns {
            edges.entry((p, q)).or_default().push(format!(
                "{} -{}",
                self.alphabet.token(a).lexeme,
                self.stack_label(g)
            ));
        }
        for ((p, q), labels) in edges {
            let _ = writeln!(
                s,
                "  q{p} -> q{q} [label=\"{}\"];",
                escape(&labels.join("\\n"))
            );
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}
