//! Earley parsing over the concrete grammar with forest unpacking into the
//! set of distinct parse trees.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::generate::{gen_concrete, Origin, Symbol};
use crate::grammar::LanguageDefinition;
use crate::lexer::{Lexer, Token};
use crate::tree::ParseTree;

pub const DEFAULT_TREE_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Sym {
    T(u32),
    N(u32),
}

#[derive(Debug)]
enum Kind {
    Label(String),
    Helper,
    Grouping,
}

#[derive(Debug)]
struct Prod {
    lhs: u32,
    rhs: Vec<Sym>,
    kind: Kind,
}

#[derive(Debug)]
struct Compiled {
    helper: Vec<bool>,
    terminals: HashMap<String, u32>,
    prods: Vec<Prod>,
    by_lhs: Vec<Vec<u32>>,
    nullable: Vec<bool>,
    start: u32,
}

impl Compiled {
    fn new(defn: &LanguageDefinition) -> Compiled {
        let cfg = gen_concrete(defn);
        let nts: HashMap<&str, u32> = cfg
            .nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        let terminals: HashMap<String, u32> = cfg
            .terminals
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let helpers = cfg.helpers();
        let helper = cfg
            .nonterminals
            .iter()
            .map(|n| helpers.contains(n.as_str()))
            .collect();
        let mut by_lhs = vec![Vec::new(); cfg.nonterminals.len()];
        let prods: Vec<Prod> = cfg
            .productions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let lhs = nts[p.lhs.as_str()];
                by_lhs[lhs as usize].push(i as u32);
                Prod {
                    lhs,
                    rhs: p
                        .rhs
                        .iter()
                        .map(|s| match s {
                            Symbol::T(t) => Sym::T(terminals[t]),
                            Symbol::N(n) => Sym::N(nts[n.as_str()]),
                        })
                        .collect(),
                    kind: match &p.origin {
                        Origin::Label(l) => Kind::Label(l.clone()),
                        Origin::Helper => Kind::Helper,
                        Origin::Grouping => Kind::Grouping,
                    },
                }
            })
            .collect();
        let mut nullable = vec![false; cfg.nonterminals.len()];
        loop {
            let mut changed = false;
            for p in &prods {
                if !nullable[p.lhs as usize]
                    && p.rhs
                        .iter()
                        .all(|s| matches!(s, Sym::N(n) if nullable[*n as usize]))
                {
                    nullable[p.lhs as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Compiled {
            helper,
            terminals,
            prods,
            by_lhs,
            nullable,
            start: nts[cfg.start.as_str()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Item {
    prod: u32,
    dot: u32,
    origin: u32,
}

struct Chart {
    /// `(non-terminal, start) -> ends`
    ends: HashMap<(u32, u32), Vec<u32>>,
    furthest: usize,
}

impl Chart {
    fn completed(&self, nt: u32, i: u32, j: u32) -> bool {
        self.ends.get(&(nt, i)).is_some_and(|e| e.contains(&j))
    }
}

/// Parser for one language definition; reusable across inputs.
pub struct Parser {
    defn: LanguageDefinition,
    lexer: Lexer,
    g: Compiled,
    limit: usize,
}

/// Tokens of a word together with its distinct semantic parse trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub word: Vec<Token>,
    pub trees: Vec<ParseTree>,
}

impl ParseResult {
    pub fn is_ambiguous(&self) -> bool {
        self.trees.len() > 1
    }
}

impl Parser {
    /// Fails with `InfiniteAmbiguity` when the definition has unit cycles.
    pub fn new(defn: &LanguageDefinition) -> Result<Parser> {
        let cycles = defn.check_unit_cycles();
        if !cycles.is_empty() {
            return Err(Error::InfiniteAmbiguity(cycles.into_iter().collect()));
        }
        Ok(Parser {
            defn: defn.clone(),
            lexer: Lexer::new(defn)?,
            g: Compiled::new(defn),
            limit: DEFAULT_TREE_LIMIT,
        })
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn definition(&self) -> &LanguageDefinition {
        &self.defn
    }

    pub fn tokenize(&self, input: &str) -> Result<Vec<Token>> {
        Ok(self.lexer.tokenize(input)?)
    }

    fn chart(&self, tokens: &[Token]) -> Chart {
        let g = &self.g;
        let n = tokens.len();
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
        let mut ends: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        let add = |sets: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, k: usize, it: Item| {
            if seen[k].insert(it) {
                sets[k].push(it);
            }
        };
        for &p in &g.by_lhs[g.start as usize] {
            add(
                &mut sets,
                &mut seen,
                0,
                Item {
                    prod: p,
                    dot: 0,
                    origin: 0,
                },
            );
        }
        let mut furthest = 0;
        for i in 0..=n {
            if !sets[i].is_empty() {
                furthest = i;
            }
            let term = tokens
                .get(i)
                .and_then(|t| g.terminals.get(&t.terminal))
                .copied();
            let mut k = 0;
            while k < sets[i].len() {
                let it = sets[i][k];
                k += 1;
                let prod = &g.prods[it.prod as usize];
                match prod.rhs.get(it.dot as usize) {
                    Some(Sym::N(nt)) => {
                        for &p in &g.by_lhs[*nt as usize] {
                            add(
                                &mut sets,
                                &mut seen,
                                i,
                                Item {
                                    prod: p,
                                    dot: 0,
                                    origin: i as u32,
                                },
                            );
                        }
                        if g.nullable[*nt as usize] {
                            add(
                                &mut sets,
                                &mut seen,
                                i,
                                Item {
                                    dot: it.dot + 1,
                                    ..it
                                },
                            );
                        }
                    }
                    Some(Sym::T(t)) => {
                        if term == Some(*t) {
                            add(
                                &mut sets,
                                &mut seen,
                                i + 1,
                                Item {
                                    dot: it.dot + 1,
                                    ..it
                                },
                            );
                        }
                    }
                    None => {
                        let e = ends.entry((prod.lhs, it.origin)).or_default();
                        if !e.contains(&(i as u32)) {
                            e.push(i as u32);
                        }
                        let o = it.origin as usize;
                        let mut m = 0;
                        while m < sets[o].len() {
                            let w = sets[o][m];
                            m += 1;
                            if g.prods[w.prod as usize].rhs.get(w.dot as usize)
                                == Some(&Sym::N(prod.lhs))
                            {
                                add(
                                    &mut sets,
                                    &mut seen,
                                    i,
                                    Item {
                                        dot: w.dot + 1,
                                        ..w
                                    },
                                );
                            }
                        }
                    }
                }
            }
        }
        Chart { ends, furthest }
    }

    /// Whether the tokens form a word of the concrete grammar.
    pub fn recognize(&self, tokens: &[Token]) -> bool {
        self.chart(tokens)
            .completed(self.g.start, 0, tokens.len() as u32)
    }

    fn extract(
        &self,
        tokens: &[Token],
        raw: bool,
    ) -> Result<std::result::Result<Vec<ParseTree>, usize>> {
        let chart = self.chart(tokens);
        let n = tokens.len() as u32;
        if !chart.completed(self.g.start, 0, n) {
            return Ok(Err(chart.furthest));
        }
        let mut ex = Extractor {
            g: &self.g,
            tokens,
            chart: &chart,
            raw,
            cap: self.limit.saturating_mul(64).max(256),
            trees: HashMap::new(),
            seqs: HashMap::new(),
            helpers: HashMap::new(),
            active: HashSet::new(),
        };
        let trees = ex.trees(self.g.start, 0, n)?;
        let mut trees: Vec<ParseTree> = trees.as_ref().clone();
        if trees.len() > self.limit {
            return Err(Error::TooManyTrees { count: trees.len() });
        }
        trees.sort();
        Ok(Ok(trees))
    }

    /// The distinct semantic trees of a word; empty when it is not in the language.
    pub fn trees(&self, tokens: &[Token]) -> Result<Vec<ParseTree>> {
        Ok(self.extract(tokens, false)?.unwrap_or_default())
    }

    /// Concrete trees (grouping nodes kept) of a word.
    pub fn parse_raw(&self, tokens: &[Token]) -> Result<Vec<ParseTree>> {
        Ok(self.extract(tokens, true)?.unwrap_or_default())
    }

    /// Like [`Parser::trees`] but reports an empty result as `NoParse`.
    pub fn parse_tokens(&self, tokens: &[Token]) -> Result<ParseResult> {
        match self.extract(tokens, false)? {
            Ok(trees) => Ok(ParseResult {
                word: tokens.to_vec(),
                trees,
            }),
            Err(at) => {
                let offset = match tokens.get(at) {
                    Some(t) => t.span.map(|s| s.start),
                    None => tokens.last().and_then(|t| t.span).map(|s| s.end),
                };
                Err(Error::NoParse { offset })
            }
        }
    }

    pub fn parse_str(&self, input: &str) -> Result<ParseResult> {
        let tokens = self.tokenize(input)?;
        self.parse_tokens(&tokens)
    }
}

/// One-shot helper: builds a parser and parses `tokens`.
pub fn parse_word(defn: &LanguageDefinition, tokens: &[Token]) -> Result<ParseResult> {
    Parser::new(defn)?.parse_tokens(tokens)
}

type Seqs = Rc<Vec<Vec<ParseTree>>>;

struct Extractor<'a> {
    g: &'a Compiled,
    tokens: &'a [Token],
    chart: &'a Chart,
    raw: bool,
    cap: usize,
    trees: HashMap<(u32, u32, u32), Rc<Vec<ParseTree>>>,
    seqs: HashMap<(u32, u32, u32, u32), Seqs>,
    helpers: HashMap<(u32, u32, u32), Seqs>,
    active: HashSet<(u32, u32, u32)>,
}

impl Extractor<'_> {
    fn check_cap(&self, len: usize) -> Result<()> {
        if len > self.cap {
            Err(Error::TooManyTrees { count: len })
        } else {
            Ok(())
        }
    }

    fn trees(&mut self, nt: u32, i: u32, j: u32) -> Result<Rc<Vec<ParseTree>>> {
        if let Some(r) = self.trees.get(&(nt, i, j)) {
            return Ok(r.clone());
        }
        if !self.active.insert((nt, i, j)) {
            return Err(Error::InfiniteAmbiguity(vec![format!(
                "non-terminal #{nt}"
            )]));
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for &p in &self.g.by_lhs[nt as usize] {
            for kids in self.seqs(p, 0, i, j)?.iter() {
                let t = match &self.g.prods[p as usize].kind {
                    Kind::Label(l) => ParseTree::node(l.clone(), kids.clone()),
                    Kind::Grouping => {
                        let [ParseTree::Leaf(open), inner, ParseTree::Leaf(close)] = &kids[..]
                        else {
                            unreachable!("grouping production shape")
                        };
                        if self.raw {
                            ParseTree::group(open.clone(), inner.clone(), close.clone())
                        } else {
                            inner.clone()
                        }
                    }
                    Kind::Helper => unreachable!("helpers are flattened"),
                };
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
            self.check_cap(out.len())?;
        }
        self.active.remove(&(nt, i, j));
        let out = Rc::new(out);
        self.trees.insert((nt, i, j), out.clone());
        Ok(out)
    }

    /// Child sequences for a helper non-terminal spanning `i..j`.
    fn helper(&mut self, nt: u32, i: u32, j: u32) -> Result<Seqs> {
        let key = (nt, i, j);
        if let Some(r) = self.helpers.get(&key) {
            return Ok(r.clone());
        }
        if !self.active.insert(key) {
            // a nullable loop body repeated at the same span adds nothing new
            return Ok(Rc::new(Vec::new()));
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for &p in &self.g.by_lhs[nt as usize] {
            for s in self.seqs(p, 0, i, j)?.iter() {
                if seen.insert(s.clone()) {
                    out.push(s.clone());
                }
            }
            self.check_cap(out.len())?;
        }
        self.active.remove(&key);
        let out = Rc::new(out);
        self.helpers.insert(key, out.clone());
        Ok(out)
    }

    /// Child sequences for `rhs[k..]` of production `p` spanning `i..j`.
    fn seqs(&mut self, p: u32, k: u32, i: u32, j: u32) -> Result<Seqs> {
        if let Some(r) = self.seqs.get(&(p, k, i, j)) {
            return Ok(r.clone());
        }
        let prod = &self.g.prods[p as usize];
        let mut out: Vec<Vec<ParseTree>> = Vec::new();
        match prod.rhs.get(k as usize).copied() {
            None => {
                if i == j {
                    out.push(Vec::new());
                }
            }
            Some(Sym::T(t)) => {
                let tok = self.tokens.get(i as usize);
                if i < j && tok.and_then(|x| self.g.terminals.get(&x.terminal)) == Some(&t) {
                    let leaf = ParseTree::Leaf(tok.expect("checked").clone());
                    for rest in self.seqs(p, k + 1, i + 1, j)?.iter() {
                        let mut v = Vec::with_capacity(rest.len() + 1);
                        v.push(leaf.clone());
                        v.extend(rest.iter().cloned());
                        out.push(v);
                    }
                }
            }
            Some(Sym::N(nt)) => {
                let mids: Vec<u32> = self
                    .chart
                    .ends
                    .get(&(nt, i))
                    .map(|e| e.iter().copied().filter(|&m| m <= j).collect())
                    .unwrap_or_default();
                let mut seen = HashSet::new();
                for m in mids {
                    let rest = self.seqs(p, k + 1, m, j)?;
                    if rest.is_empty() {
                        continue;
                    }
                    let heads: Vec<Vec<ParseTree>> = if self.g.helper[nt as usize] {
                        self.helper(nt, i, m)?.as_ref().clone()
                    } else {
                        self.trees(nt, i, m)?
                            .iter()
                            .map(|t| vec![t.clone()])
                            .collect()
                    };
                    for h in &heads {
                        for r in rest.iter() {
                            let mut v = h.clone();
                            v.extend(r.iter().cloned());
                            if seen.insert(v.clone()) {
                                out.push(v);
                            }
                        }
                        self.check_cap(out.len())?;
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.seqs.insert((p, k, i, j), out.clone());
        Ok(out)
    }
}
