//! Canonical linear encoding of the set of words that parse to a tree.
//!
//! `[ x ]` (optional) stands for zero or more grouping pairs around `x`,
//! `( x )` (required) for exactly one.

use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::LanguageDefinition;
use crate::lexer::Token;
use crate::tree::{lhs_of, match_children, Child, ParseTree};
use crate::vpda::{Alphabet, Kind, Vpda};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncSym {
    Leaf(Token),
    ReqOpen,
    ReqClose,
    OptOpen,
    OptClose,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearEncoding {
    pub symbols: Vec<EncSym>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pair {
    Opt,
    Req,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Item {
    Leaf(Token),
    Pair(Pair, Vec<Item>),
}

fn to_items(symbols: &[EncSym]) -> Option<Vec<Item>> {
    let mut stack: Vec<(Option<Pair>, Vec<Item>)> = vec![(None, Vec::new())];
    for s in symbols {
        match s {
            EncSym::Leaf(t) => stack.last_mut()?.1.push(Item::Leaf(t.clone())),
            EncSym::ReqOpen => stack.push((Some(Pair::Req), Vec::new())),
            EncSym::OptOpen => stack.push((Some(Pair::Opt), Vec::new())),
            EncSym::ReqClose | EncSym::OptClose => {
                let want = if *s == EncSym::ReqClose {
                    Pair::Req
                } else {
                    Pair::Opt
                };
                let (kind, body) = stack.pop()?;
                if kind != Some(want) {
                    return None;
                }
                stack.last_mut()?.1.push(Item::Pair(want, body));
            }
        }
    }
    match stack.pop() {
        Some((None, items)) if stack.is_empty() => Some(items),
        _ => None,
    }
}

fn from_items(items: &[Item], out: &mut Vec<EncSym>) {
    for it in items {
        match it {
            Item::Leaf(t) => out.push(EncSym::Leaf(t.clone())),
            Item::Pair(k, body) => {
                out.push(if *k == Pair::Req {
                    EncSym::ReqOpen
                } else {
                    EncSym::OptOpen
                });
                from_items(body, out);
                out.push(if *k == Pair::Req {
                    EncSym::ReqClose
                } else {
                    EncSym::OptClose
                });
            }
        }
    }
}

/// Canonical form of one pair whose body is already canonical.
fn canon_pair(kind: Pair, body: Vec<Item>) -> Item {
    if let [Item::Pair(inner, inner_body)] = &body[..] {
        match (kind, inner) {
            (Pair::Opt, Pair::Opt) => return canon_pair(Pair::Opt, inner_body.clone()),
            (Pair::Req, Pair::Opt) => {
                let req = canon_pair(Pair::Req, inner_body.clone());
                return Item::Pair(Pair::Opt, vec![req]);
            }
            _ => {}
        }
    }
    Item::Pair(kind, body)
}

fn canon_items(items: Vec<Item>) -> Vec<Item> {
    items
        .into_iter()
        .map(|it| match it {
            Item::Leaf(_) => it,
            Item::Pair(k, body) => canon_pair(k, canon_items(body)),
        })
        .collect()
}

impl LinearEncoding {
    pub fn is_well_nested(&self) -> bool {
        to_items(&self.symbols).is_some()
    }

    /// Applies the two rewrites, innermost first, to a fixpoint.
    pub fn canonicalize(&self) -> LinearEncoding {
        let items = to_items(&self.symbols).expect("well-nested encoding");
        let mut symbols = Vec::new();
        from_items(&canon_items(items), &mut symbols);
        LinearEncoding { symbols }
    }

    pub fn is_canonical(&self) -> bool {
        self.redexes().is_empty()
    }

    /// Positions of opening brackets where one of the rewrites applies.
    pub fn redexes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, s) in self.symbols.iter().enumerate() {
            if matches!(s, EncSym::ReqOpen | EncSym::OptOpen)
                && self.symbols.get(i + 1) == Some(&EncSym::OptOpen)
            {
                let outer_close = self.matching(i);
                let inner_close = self.matching(i + 1);
                if inner_close + 1 == outer_close {
                    out.push(i);
                }
            }
        }
        out
    }

    fn matching(&self, open: usize) -> usize {
        let mut depth = 0usize;
        for (j, s) in self.symbols.iter().enumerate().skip(open) {
            match s {
                EncSym::ReqOpen | EncSym::OptOpen => depth += 1,
                EncSym::ReqClose | EncSym::OptClose => {
                    depth -= 1;
                    if depth == 0 {
                        return j;
                    }
                }
                EncSym::Leaf(_) => {}
            }
        }
        panic!("unbalanced encoding")
    }

    /// Applies a single rewrite at the redex starting at `at`.
    pub fn rewrite_at(&self, at: usize) -> LinearEncoding {
        let outer_close = self.matching(at);
        let inner_close = outer_close - 1;
        let mut s = self.symbols.clone();
        match s[at] {
            EncSym::OptOpen => {
                s.remove(inner_close);
                s.remove(at + 1);
            }
            EncSym::ReqOpen => {
                s[at] = EncSym::OptOpen;
                s[at + 1] = EncSym::ReqOpen;
                s[inner_close] = EncSym::ReqClose;
                s[outer_close] = EncSym::OptClose;
            }
            _ => panic!("not a redex"),
        }
        LinearEncoding { symbols: s }
    }

    /// Whether `word` is in the denoted word set.
    pub fn denotes(&self, word: &[Token], open: &str, close: &str) -> bool {
        let items = to_items(&self.symbols).expect("well-nested encoding");
        let m = Matcher { word, open, close };
        m.seq(&items, 0).contains(&word.len())
    }

    /// The words of length at most `max_len` in the denoted set.
    pub fn expand(&self, open: &Token, close: &Token, max_len: usize) -> Vec<Vec<Token>> {
        let items = to_items(&self.symbols).expect("well-nested encoding");
        let mut out = expand_seq(&items, open, close, max_len);
        out.sort();
        out.dedup();
        out
    }
}

fn expand_seq(items: &[Item], open: &Token, close: &Token, max: usize) -> Vec<Vec<Token>> {
    let mut acc: Vec<Vec<Token>> = vec![Vec::new()];
    for it in items {
        let parts = expand_item(it, open, close, max);
        let mut next = Vec::new();
        for a in &acc {
            for p in &parts {
                if a.len() + p.len() <= max {
                    let mut w = a.clone();
                    w.extend(p.iter().cloned());
                    next.push(w);
                }
            }
        }
        acc = next;
    }
    acc
}

fn expand_item(it: &Item, open: &Token, close: &Token, max: usize) -> Vec<Vec<Token>> {
    match it {
        Item::Leaf(t) => vec![vec![t.clone()]],
        Item::Pair(k, body) => {
            let base = expand_seq(body, open, close, max);
            let wrap = |w: &Vec<Token>| {
                let mut v = vec![open.clone()];
                v.extend(w.iter().cloned());
                v.push(close.clone());
                v
            };
            match k {
                Pair::Req => base
                    .iter()
                    .filter(|w| w.len() + 2 <= max)
                    .map(wrap)
                    .collect(),
                Pair::Opt => {
                    let mut out = base.clone();
                    let mut layer = base;
                    loop {
                        layer = layer
                            .iter()
                            .filter(|w| w.len() + 2 <= max)
                            .map(wrap)
                            .collect();
                        if layer.is_empty() {
                            break;
                        }
                        out.extend(layer.iter().cloned());
                    }
                    out
                }
            }
        }
    }
}

struct Matcher<'a> {
    word: &'a [Token],
    open: &'a str,
    close: &'a str,
}

impl Matcher<'_> {
    fn is(&self, i: usize, t: &str) -> bool {
        self.word.get(i).is_some_and(|x| x.terminal == t)
    }

    fn seq(&self, items: &[Item], i: usize) -> Vec<usize> {
        let mut ends = vec![i];
        for it in items {
            let mut next: Vec<usize> = ends.iter().flat_map(|&e| self.item(it, e)).collect();
            next.sort_unstable();
            next.dedup();
            ends = next;
        }
        ends
    }

    fn item(&self, it: &Item, i: usize) -> Vec<usize> {
        match it {
            Item::Leaf(t) => {
                if self.word.get(i) == Some(t) {
                    vec![i + 1]
                } else {
                    vec![]
                }
            }
            Item::Pair(Pair::Req, body) => self.wrapped(body, i),
            Item::Pair(Pair::Opt, body) => {
                let mut out = self.seq(body, i);
                out.extend(self.opt_wrapped(body, i));
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }

    fn wrapped(&self, body: &[Item], i: usize) -> Vec<usize> {
        if !self.is(i, self.open) {
            return vec![];
        }
        self.seq(body, i + 1)
            .into_iter()
            .filter(|&e| self.is(e, self.close))
            .map(|e| e + 1)
            .collect()
    }

    /// One or more pairs around `body`.
    fn opt_wrapped(&self, body: &[Item], i: usize) -> Vec<usize> {
        if !self.is(i, self.open) {
            return vec![];
        }
        let mut inner = self.seq(body, i + 1);
        inner.extend(self.opt_wrapped(body, i + 1));
        inner
            .into_iter()
            .filter(|&e| self.is(e, self.close))
            .map(|e| e + 1)
            .collect()
    }
}

impl fmt::Display for LinearEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut prev_leaf = false;
        for s in &self.symbols {
            match s {
                EncSym::Leaf(t) => {
                    if prev_leaf {
                        f.write_str(" ")?;
                    }
                    f.write_str(&t.lexeme)?;
                }
                EncSym::ReqOpen => f.write_str("(")?,
                EncSym::ReqClose => f.write_str(")")?,
                EncSym::OptOpen => f.write_str("[")?,
                EncSym::OptClose => f.write_str("]")?,
            }
            prev_leaf = matches!(s, EncSym::Leaf(_));
        }
        Ok(())
    }
}

/// Whether each child of a node is forbidden by every occurrence it can fill.
pub(crate) fn forbidden_children(
    defn: &LanguageDefinition,
    label: &str,
    children: &[ParseTree],
) -> Option<Vec<bool>> {
    let p = defn.production(label)?;
    let kids: Vec<Child<'_>> = children
        .iter()
        .map(|c| match c {
            ParseTree::Leaf(t) => Child::Leaf(&t.terminal),
            _ => Child::Sub,
        })
        .collect();
    let fits =
        |i: usize, n: &crate::grammar::NtRef| lhs_of(&children[i], defn) == Some(n.name.as_str());
    let occ = match_children(&p.rhs, &kids, &fits)?;
    let refs = p.rhs.nonterminals();
    Some(
        children
            .iter()
            .zip(&occ)
            .map(|(c, ks)| match c.label() {
                Some(l) if !ks.is_empty() => ks.iter().all(|&k| refs[k].mark.contains(l)),
                _ => false,
            })
            .collect(),
    )
}

/// The canonical encoding of `words(t)`.
pub fn encode(defn: &LanguageDefinition, t: &ParseTree) -> Result<LinearEncoding> {
    t.check(defn, false).map_err(Error::NotInTreeLanguage)?;
    let mut symbols = Vec::new();
    encode_node(defn, t, false, &mut symbols)?;
    Ok(LinearEncoding { symbols }.canonicalize())
}

fn encode_node(
    defn: &LanguageDefinition,
    t: &ParseTree,
    forbidden: bool,
    out: &mut Vec<EncSym>,
) -> Result<()> {
    match t {
        ParseTree::Leaf(tok) => {
            out.push(EncSym::Leaf(tok.clone()));
            Ok(())
        }
        ParseTree::Group { .. } => Err(Error::NotInTreeLanguage(
            "grouping node in an abstract tree".into(),
        )),
        ParseTree::Node { label, children } => {
            let nt = lhs_of(t, defn).unwrap_or_default();
            let grouped = defn.is_grouped(nt);
            if forbidden && !grouped {
                return Err(Error::NotInTreeLanguage(format!(
                    "{label} is forbidden in its position and {nt} cannot be parenthesized"
                )));
            }
            let forb = forbidden_children(defn, label, children)
                .ok_or_else(|| Error::NotInTreeLanguage(t.render()))?;
            if grouped {
                out.push(EncSym::OptOpen);
            }
            if forbidden {
                out.push(EncSym::ReqOpen);
            }
            for (c, f) in children.iter().zip(forb) {
                encode_node(defn, c, f, out)?;
            }
            if forbidden {
                out.push(EncSym::ReqClose);
            }
            if grouped {
                out.push(EncSym::OptClose);
            }
            Ok(())
        }
    }
}

/// The automaton accepting exactly the words of `t`, over `alphabet`
/// (which must contain the tree's tokens and the grouping pair).
pub fn words_automaton_over(
    defn: &LanguageDefinition,
    t: &ParseTree,
    alphabet: &Alphabet,
) -> Result<Vpda> {
    let enc = encode(defn, t)?;
    Ok(encoding_automaton(defn, &enc, alphabet))
}

/// The automaton accepting exactly the words of `t`.
pub fn words_automaton(defn: &LanguageDefinition, t: &ParseTree) -> Result<Vpda> {
    let alphabet = Alphabet::for_definition(defn, &t.tokens());
    words_automaton_over(defn, t, &alphabet)
}

/// Linear automaton for an encoding: an optional pair is a push and a pop
/// self-loop with its own stack symbol, a required pair moves to a new state
/// while pushing or popping the shared symbol.
pub fn encoding_automaton(
    defn: &LanguageDefinition,
    enc: &LinearEncoding,
    alphabet: &Alphabet,
) -> Vpda {
    let open = alphabet
        .index_of(&Token::new(&defn.grouping.open, &defn.grouping.open))
        .expect("grouping open letter");
    let close = alphabet
        .index_of(&Token::new(&defn.grouping.close, &defn.grouping.close))
        .expect("grouping close letter");
    let mut v = Vpda::new(alphabet.clone(), 1, 0);
    let gamma = v.add_stack_symbol();
    v.stack_names.push("γ".into());
    let mut cur = 0;
    let mut open_syms: Vec<usize> = Vec::new();
    let mut literal_syms: Vec<usize> = Vec::new();
    for s in &enc.symbols {
        match s {
            EncSym::OptOpen => {
                let g = v.add_stack_symbol();
                v.stack_names.push(g.to_string());
                v.add_call(cur, open, cur, g);
                open_syms.push(g);
            }
            EncSym::OptClose => {
                let g = open_syms.pop().expect("balanced");
                v.add_return(cur, close, g, cur);
            }
            EncSym::ReqOpen => {
                let q = v.add_state();
                v.add_call(cur, open, q, gamma);
                cur = q;
            }
            EncSym::ReqClose => {
                let q = v.add_state();
                v.add_return(cur, close, gamma, q);
                cur = q;
            }
            EncSym::Leaf(t) => {
                let a = alphabet.index_of(t).expect("leaf letter in alphabet");
                let q = v.add_state();
                match alphabet.kind(a) {
                    Kind::Internal => v.add_internal(cur, a, q),
                    Kind::Call => {
                        let g = v.add_stack_symbol();
                        v.stack_names.push(format!("{}{g}", t.lexeme));
                        v.add_call(cur, a, q, g);
                        literal_syms.push(g);
                    }
                    Kind::Return => {
                        let g = literal_syms.pop().expect("balanced literal parentheses");
                        v.add_return(cur, a, g, q);
                    }
                }
                cur = q;
            }
        }
    }
    v.accepting[cur] = true;
    v
}
