//! Brute-force oracles and random grammar generators shared by the
//! integration tests. Nothing here calls into the static analysis or the
//! automata: trees are enumerated directly from right-hand sides and words
//! by inserting grouping pairs around subtrees.

#![allow(dead_code)]

pub mod vpda_sets;

use std::collections::{BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use resolvable::dfa::RhsSymbol;
use resolvable::grammar::{LanguageDefinition, NtRef, Rhs};
use resolvable::lexer::Token;
use resolvable::parser::Parser;
use resolvable::static_analysis::{classify, Subclass};
use resolvable::tree::ParseTree;

pub const GRAMMAR_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/grammars");
pub const CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");

pub fn grammar_source(name: &str) -> (String, String) {
    let text = std::fs::read_to_string(format!("{GRAMMAR_DIR}/{name}")).expect("grammar file");
    (name.to_string(), text)
}

pub fn load(names: &[&str]) -> LanguageDefinition {
    let sources: Vec<_> = names.iter().map(|n| grammar_source(n)).collect();
    resolvable::dsl::load(&sources).expect("grammar loads")
}

pub fn tok(s: &str) -> Token {
    Token::new(s, s)
}

pub fn word(s: &str) -> Vec<Token> {
    s.split_whitespace().map(tok).collect()
}

pub fn spaced(w: &[Token]) -> String {
    w.iter()
        .map(|t| t.lexeme.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Words of `rhs` with at most `max` symbols, marks dropped.
pub fn rhs_words(rhs: &Rhs, max: usize) -> BTreeSet<Vec<RhsSymbol>> {
    sequences(rhs, max)
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|x| match x {
                    Sym::T(t) => RhsSymbol::Terminal(t),
                    Sym::N(n) => RhsSymbol::NonTerminal(n.name),
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Sym {
    T(String),
    N(NtRef),
}

/// Symbol strings of `rhs` with at most `max` symbols.
fn sequences(rhs: &Rhs, max: usize) -> Vec<Vec<Sym>> {
    match rhs {
        Rhs::Terminal(t) if max >= 1 => vec![vec![Sym::T(t.clone())]],
        Rhs::NonTerminal(n) if max >= 1 => vec![vec![Sym::N(n.clone())]],
        Rhs::Terminal(_) | Rhs::NonTerminal(_) => vec![],
        Rhs::Epsilon => vec![vec![]],
        Rhs::Alt(rs) => rs.iter().flat_map(|r| sequences(r, max)).collect(),
        Rhs::Seq(rs) => {
            let mut acc = vec![vec![]];
            for r in rs {
                let mut next = Vec::new();
                for a in &acc {
                    for b in sequences(r, max - a.len()) {
                        let mut s = a.clone();
                        s.extend(b);
                        next.push(s);
                    }
                }
                acc = next;
            }
            acc
        }
        Rhs::Star(r) => {
            let mut out = vec![vec![]];
            let mut frontier: Vec<Vec<Sym>> = vec![vec![]];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for a in &frontier {
                    for b in sequences(r, max - a.len()) {
                        if b.is_empty() {
                            continue;
                        }
                        let mut s = a.clone();
                        s.extend(b);
                        next.push(s);
                    }
                }
                out.extend(next.iter().cloned());
                frontier = next;
            }
            out
        }
    }
}

/// Tree enumeration by cost and depth. A leaf costs 1 and an inner node
/// costs the sum of its children plus `node_cost`. Requires a grammar
/// without nullable right-hand sides or unit cycles.
pub struct TreeEnumerator<'a> {
    defn: &'a LanguageDefinition,
    node_cost: usize,
    memo: HashMap<(String, usize, usize), Vec<(ParseTree, usize)>>,
}

impl<'a> TreeEnumerator<'a> {
    pub fn new(defn: &'a LanguageDefinition, node_cost: usize) -> Self {
        TreeEnumerator {
            defn,
            node_cost,
            memo: HashMap::new(),
        }
    }

    /// All trees of `nt` with cost at most `budget`, paired with their cost.
    pub fn trees(&mut self, nt: &str, budget: usize) -> Vec<(ParseTree, usize)> {
        self.trees_within(nt, budget, usize::MAX)
    }

    /// Like [`TreeEnumerator::trees`], limited to trees of depth at most `depth`.
    pub fn trees_within(
        &mut self,
        nt: &str,
        budget: usize,
        depth: usize,
    ) -> Vec<(ParseTree, usize)> {
        let key = (nt.to_string(), budget, depth);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        if budget > self.node_cost && depth >= 1 {
            let inner = budget - self.node_cost;
            let prods: Vec<_> = self.defn.productions_of(nt).cloned().collect();
            for p in prods {
                for seq in sequences(&p.rhs, inner) {
                    // `usize::MAX` stands for no limit.
                    let below = if depth == usize::MAX {
                        depth
                    } else {
                        depth - 1
                    };
                    for (children, cost) in self.children(&seq, inner, below) {
                        out.push((
                            ParseTree::node(p.label.clone(), children),
                            cost + self.node_cost,
                        ));
                    }
                }
            }
        }
        out.sort_by_key(|a| a.1);
        self.memo.insert(key, out.clone());
        out
    }

    fn children(
        &mut self,
        seq: &[Sym],
        budget: usize,
        depth: usize,
    ) -> Vec<(Vec<ParseTree>, usize)> {
        let Some((first, rest)) = seq.split_first() else {
            return vec![(vec![], 0)];
        };
        // Every remaining symbol costs at least one.
        let reserve = rest.len();
        if budget < 1 + reserve {
            return vec![];
        }
        let heads: Vec<(ParseTree, usize)> = match first {
            Sym::T(t) => vec![(ParseTree::leaf(t.clone(), t.clone()), 1)],
            Sym::N(n) => self.trees_within(&n.name, budget - reserve, depth),
        };
        let mut out = Vec::new();
        for (h, c) in heads {
            for (mut tail, c2) in self.children(rest, budget - c, depth) {
                tail.insert(0, h.clone());
                out.push((tail, c + c2));
            }
        }
        out
    }
}

fn lhs<'a>(defn: &'a LanguageDefinition, t: &ParseTree) -> Option<&'a str> {
    t.label()
        .and_then(|l| defn.production(l))
        .map(|p| p.lhs.as_str())
}

/// Every word obtained from the yield of `t` by wrapping subtrees of grouped
/// non-terminals in any number of grouping pairs, up to `max_len` tokens.
pub fn paren_words(defn: &LanguageDefinition, t: &ParseTree, max_len: usize) -> Vec<Vec<Token>> {
    let open = tok(&defn.grouping.open);
    let close = tok(&defn.grouping.close);
    let mut out = words_of(defn, t, max_len, &open, &close);
    out.sort();
    out.dedup();
    out
}

fn words_of(
    defn: &LanguageDefinition,
    t: &ParseTree,
    max: usize,
    open: &Token,
    close: &Token,
) -> Vec<Vec<Token>> {
    match t {
        ParseTree::Leaf(tk) => {
            if max >= 1 {
                vec![vec![tk.clone()]]
            } else {
                vec![]
            }
        }
        ParseTree::Group { inner, .. } => words_of(defn, inner, max, open, close),
        ParseTree::Node { children, .. } => {
            let mut acc: Vec<Vec<Token>> = vec![vec![]];
            let min_rest: Vec<usize> = (0..children.len())
                .map(|i| children[i..].iter().map(yield_len).sum())
                .collect();
            for (i, c) in children.iter().enumerate() {
                let mut next = Vec::new();
                for a in &acc {
                    let room =
                        max.saturating_sub(a.len() + min_rest.get(i + 1).copied().unwrap_or(0));
                    for b in words_of(defn, c, room, open, close) {
                        let mut w = a.clone();
                        w.extend(b);
                        next.push(w);
                    }
                }
                acc = next;
            }
            let grouped = lhs(defn, t).is_some_and(|n| defn.is_grouped(n));
            let mut out = Vec::new();
            for w in acc {
                let mut cur = w;
                loop {
                    out.push(cur.clone());
                    if !grouped || cur.len() + 2 > max {
                        break;
                    }
                    let mut wrapped = vec![open.clone()];
                    wrapped.extend(cur);
                    wrapped.push(close.clone());
                    cur = wrapped;
                }
            }
            out
        }
    }
}

pub fn yield_len(t: &ParseTree) -> usize {
    t.tokens().len()
}

/// The word with exactly one grouping pair around every grouped subtree.
pub fn fully_grouped(defn: &LanguageDefinition, t: &ParseTree) -> Vec<Token> {
    match t {
        ParseTree::Leaf(tk) => vec![tk.clone()],
        ParseTree::Group { inner, .. } => fully_grouped(defn, inner),
        ParseTree::Node { children, .. } => {
            let inner: Vec<Token> = children
                .iter()
                .flat_map(|c| fully_grouped(defn, c))
                .collect();
            if lhs(defn, t).is_some_and(|n| defn.is_grouped(n)) {
                let mut w = vec![tok(&defn.grouping.open)];
                w.extend(inner);
                w.push(tok(&defn.grouping.close));
                w
            } else {
                inner
            }
        }
    }
}

pub fn oracle_parser(defn: &LanguageDefinition) -> Parser {
    Parser::new(defn).expect("parser").with_limit(1 << 16)
}

/// Shortest words among `paren_words(t)` that parse to `t` alone.
pub fn unique_words(parser: &Parser, t: &ParseTree, max_len: usize) -> Vec<Vec<Token>> {
    let defn = parser.definition();
    let mut best: Vec<Vec<Token>> = Vec::new();
    for w in paren_words(defn, t, max_len) {
        if best.first().is_some_and(|b| b.len() < w.len()) {
            continue;
        }
        let trees = parser.trees(&w).expect("parse");
        if trees.len() == 1 && &trees[0] == t {
            if best.first().is_some_and(|b| b.len() > w.len()) {
                best.clear();
            }
            best.push(w);
        }
    }
    best
}

/// Outcome of the bounded brute-force resolvability check.
#[derive(Debug)]
pub enum BruteForce {
    Resolvable,
    /// A tree none of whose words (within the bound) parses to it alone.
    Unresolvable(ParseTree),
}

pub const MAX_DEPTH: usize = 4;
pub const MAX_WORD: usize = 12;

/// Enumerates every start tree of depth at most [`MAX_DEPTH`] with at most
/// [`MAX_WORD`] leaves and looks for one with no word that parses to it
/// alone. Candidate words are all grouping insertions of at most
/// [`MAX_WORD`] tokens plus the fully grouped word, whatever its length.
pub fn brute_force(defn: &LanguageDefinition) -> BruteForce {
    brute_force_to_depth(defn, MAX_DEPTH)
}

pub fn brute_force_to_depth(defn: &LanguageDefinition, depth: usize) -> BruteForce {
    let parser = oracle_parser(defn);
    let mut en = TreeEnumerator::new(defn, 0);
    // Smallest trees first: unresolvable grammars usually fail early.
    for size in 1..=MAX_WORD {
        for (t, _) in en
            .trees_within(&defn.start, size, depth)
            .into_iter()
            .filter(|(_, c)| *c == size)
        {
            if !has_unique_word(&parser, &t) {
                return BruteForce::Unresolvable(t);
            }
        }
    }
    BruteForce::Resolvable
}

pub fn has_unique_word(parser: &Parser, t: &ParseTree) -> bool {
    let ts = parser
        .trees(&fully_grouped(parser.definition(), t))
        .expect("parse");
    if ts.len() == 1 && &ts[0] == t {
        return true;
    }
    !unique_words(parser, t, MAX_WORD).is_empty()
}

fn rhs_productive(r: &Rhs, ok: &BTreeSet<String>) -> bool {
    match r {
        Rhs::Terminal(_) | Rhs::Epsilon | Rhs::Star(_) => true,
        Rhs::NonTerminal(n) => ok.contains(&n.name),
        Rhs::Seq(rs) => rs.iter().all(|r| rhs_productive(r, ok)),
        Rhs::Alt(rs) => rs.iter().any(|r| rhs_productive(r, ok)),
    }
}

/// Non-terminals that derive at least one terminal word.
pub fn productive(defn: &LanguageDefinition) -> BTreeSet<String> {
    let mut ok = BTreeSet::new();
    loop {
        let before = ok.len();
        for p in &defn.productions {
            if rhs_productive(&p.rhs, &ok) {
                ok.insert(p.lhs.clone());
            }
        }
        if ok.len() == before {
            return ok;
        }
    }
}

fn reachable(defn: &LanguageDefinition) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([defn.start.clone()]);
    let mut todo = vec![defn.start.clone()];
    while let Some(n) = todo.pop() {
        for p in defn.productions_of(&n) {
            for r in p.rhs.nonterminals() {
                if seen.insert(r.name.clone()) {
                    todo.push(r.name.clone());
                }
            }
        }
    }
    seen
}

const NTS: [&str; 4] = ["S", "T", "U", "V"];
const TERMS: [&str; 3] = ["a", "b", "c"];

fn random_item(rng: &mut StdRng, nts: &[&str]) -> Rhs {
    let base = if rng.gen_bool(0.5) {
        Rhs::t(*TERMS.choose(rng).unwrap())
    } else {
        Rhs::nt(*nts.choose(rng).unwrap())
    };
    match rng.gen_range(0..10) {
        0 => Rhs::opt(base),
        1 => Rhs::star(base),
        _ => base,
    }
}

/// A random grammar without marks or grouping terminals: at most four
/// non-terminals and eight productions over `a`, `b`, `c`. Grammars with
/// unit cycles, nullable right-hand sides or useless non-terminals are
/// rejected and redrawn.
pub fn random_plain(rng: &mut StdRng) -> LanguageDefinition {
    loop {
        let n = rng.gen_range(1..=4);
        let nts = &NTS[..n];
        let count = rng.gen_range(n..=8);
        let mut b = LanguageDefinition::builder("S");
        for t in TERMS {
            b = b.literal(t);
        }
        for i in 0..count {
            let lhs = if i < n {
                nts[i]
            } else {
                *nts.choose(rng).unwrap()
            };
            let len = rng.gen_range(1..=3);
            let items: Vec<Rhs> = (0..len).map(|_| random_item(rng, nts)).collect();
            let rhs = if items.len() == 1 {
                items.into_iter().next().unwrap()
            } else {
                Rhs::seq(items)
            };
            b = b.production(lhs, format!("p{i}"), rhs);
        }
        let d = b.build();
        if d.productions.iter().any(|p| p.rhs.nullable()) {
            continue;
        }
        if !d.check_unit_cycles().is_empty() {
            continue;
        }
        let names: BTreeSet<String> = nts.iter().map(|s| s.to_string()).collect();
        if productive(&d) != names || reachable(&d) != names {
            continue;
        }
        if d.validate()
            .iter()
            .any(|i| i.severity == resolvable::grammar::Severity::Error)
        {
            continue;
        }
        if classify(&d) != Subclass::NoMarksNoParens {
            continue;
        }
        return d;
    }
}

/// Adds random marks to `defn`: each non-terminal occurrence is marked with
/// probability one half, forbidding a random proper subset of the labels of
/// that non-terminal's productions.
pub fn add_random_marks(rng: &mut StdRng, defn: &LanguageDefinition) -> LanguageDefinition {
    let mut d = defn.clone();
    let labels: HashMap<String, Vec<String>> = defn
        .nonterminals()
        .into_iter()
        .map(|n| {
            let ls = defn.productions_of(&n).map(|p| p.label.clone()).collect();
            (n, ls)
        })
        .collect();
    for p in &mut d.productions {
        p.rhs.walk_mut(&mut |r| {
            if let Rhs::NonTerminal(n) = r {
                let ls = &labels[&n.name];
                if ls.len() > 1 && rng.gen_bool(0.5) {
                    let k = rng.gen_range(1..ls.len());
                    n.mark = ls.choose_multiple(rng, k).cloned().collect();
                }
            }
        });
    }
    d
}

/// A random tree of `nt` whose depth stays below `depth` where possible.
pub fn random_tree(
    rng: &mut StdRng,
    defn: &LanguageDefinition,
    nt: &str,
    depth: usize,
) -> ParseTree {
    let heights = min_heights(defn);
    let prods: Vec<_> = defn.productions_of(nt).collect();
    let fitting: Vec<_> = prods
        .iter()
        .filter(|p| heights[&p.label] <= depth)
        .collect();
    let p = if fitting.is_empty() {
        *prods.iter().min_by_key(|p| heights[&p.label]).unwrap()
    } else {
        **fitting.choose(rng).unwrap()
    };
    let mut children = Vec::new();
    expand(
        rng,
        defn,
        &p.rhs,
        depth.saturating_sub(1),
        &heights,
        &mut children,
    );
    ParseTree::node(p.label.clone(), children)
}

fn expand(
    rng: &mut StdRng,
    defn: &LanguageDefinition,
    r: &Rhs,
    depth: usize,
    heights: &HashMap<String, usize>,
    out: &mut Vec<ParseTree>,
) {
    match r {
        Rhs::Terminal(t) => out.push(ParseTree::leaf(t.clone(), t.clone())),
        Rhs::NonTerminal(n) => out.push(random_tree(rng, defn, &n.name, depth)),
        Rhs::Epsilon => {}
        Rhs::Seq(rs) => rs
            .iter()
            .for_each(|r| expand(rng, defn, r, depth, heights, out)),
        Rhs::Alt(rs) => {
            // Out of depth, only the lowest alternatives keep the tree finite.
            let a = if depth == 0 {
                let nt = nt_heights(defn, heights);
                let best = rs.iter().filter_map(|r| rhs_height(r, &nt)).min();
                rs.iter().find(|r| rhs_height(r, &nt) == best).unwrap()
            } else {
                rs.choose(rng).unwrap()
            };
            expand(rng, defn, a, depth, heights, out)
        }
        Rhs::Star(inner) => {
            let reps = if depth == 0 { 0 } else { rng.gen_range(0..=2) };
            for _ in 0..reps {
                expand(rng, defn, inner, depth, heights, out);
            }
        }
    }
}

fn rhs_height(r: &Rhs, nt: &HashMap<String, usize>) -> Option<usize> {
    match r {
        Rhs::Terminal(_) | Rhs::Epsilon | Rhs::Star(_) => Some(0),
        Rhs::NonTerminal(n) => nt.get(&n.name).copied(),
        Rhs::Seq(rs) => rs
            .iter()
            .map(|r| rhs_height(r, nt))
            .try_fold(0, |a, h| h.map(|h| a.max(h))),
        Rhs::Alt(rs) => rs.iter().filter_map(|r| rhs_height(r, nt)).min(),
    }
}

/// Least tree height per non-terminal, from the per-label heights.
fn nt_heights(defn: &LanguageDefinition, prod: &HashMap<String, usize>) -> HashMap<String, usize> {
    let mut nt: HashMap<String, usize> = HashMap::new();
    for p in &defn.productions {
        let h = prod[&p.label];
        nt.entry(p.lhs.clone())
            .and_modify(|x| *x = (*x).min(h))
            .or_insert(h);
    }
    nt
}

/// Least tree height per production label.
fn min_heights(defn: &LanguageDefinition) -> HashMap<String, usize> {
    let mut nt: HashMap<String, usize> = HashMap::new();
    let mut prod: HashMap<String, usize> = HashMap::new();
    loop {
        let mut changed = false;
        for p in &defn.productions {
            if let Some(h) = rhs_height(&p.rhs, &nt) {
                let h = h + 1;
                if prod.get(&p.label).is_none_or(|&old| h < old) {
                    prod.insert(p.label.clone(), h);
                    changed = true;
                }
                if nt.get(&p.lhs).is_none_or(|&old| h < old) {
                    nt.insert(p.lhs.clone(), h);
                    changed = true;
                }
            }
        }
        if !changed {
            return prod;
        }
    }
}
