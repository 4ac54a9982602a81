//! Parse trees: leaves carry tokens, inner nodes carry production labels,
//! and grouping nodes record a pair of grouping parentheses.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::generate::GROUP_LABEL;
use crate::grammar::{LanguageDefinition, NtRef, Rhs};
use crate::lexer::{Span, Token};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ParseTree {
    Leaf(Token),
    Node {
        label: String,
        children: Vec<ParseTree>,
    },
    Group {
        open: Token,
        inner: Box<ParseTree>,
        close: Token,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum KeyItem<'a> {
    Group,
    Node(&'a str, usize),
    Leaf(&'a str, &'a str),
}

impl ParseTree {
    pub fn leaf(terminal: impl Into<String>, lexeme: impl Into<String>) -> Self {
        ParseTree::Leaf(Token::new(terminal, lexeme))
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn group(open: Token, inner: ParseTree, close: Token) -> Self {
        ParseTree::Group {
            open,
            inner: Box::new(inner),
            close,
        }
    }

    /// Production label of an inner node, `g` for grouping nodes, `None` for leaves.
    pub fn label(&self) -> Option<&str> {
        match self {
            ParseTree::Leaf(_) => None,
            ParseTree::Node { label, .. } => Some(label),
            ParseTree::Group { .. } => Some(GROUP_LABEL),
        }
    }

    pub fn children(&self) -> Vec<&ParseTree> {
        match self {
            ParseTree::Leaf(_) => vec![],
            ParseTree::Node { children, .. } => children.iter().collect(),
            ParseTree::Group { inner, .. } => vec![inner],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, ParseTree::Leaf(_))
    }

    /// The leaf tokens from left to right, grouping parentheses included.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens(&self, out: &mut Vec<Token>) {
        match self {
            ParseTree::Leaf(t) => out.push(t.clone()),
            ParseTree::Node { children, .. } => children.iter().for_each(|c| c.collect_tokens(out)),
            ParseTree::Group { open, inner, close } => {
                out.push(open.clone());
                inner.collect_tokens(out);
                out.push(close.clone());
            }
        }
    }

    /// Removes every grouping node, keeping its inner tree.
    pub fn semantic(&self) -> ParseTree {
        match self {
            ParseTree::Leaf(_) => self.clone(),
            ParseTree::Node { label, children } => ParseTree::Node {
                label: label.clone(),
                children: children.iter().map(|c| c.semantic()).collect(),
            },
            ParseTree::Group { inner, .. } => inner.semantic(),
        }
    }

    pub fn has_groups(&self) -> bool {
        match self {
            ParseTree::Leaf(_) => false,
            ParseTree::Node { children, .. } => children.iter().any(|c| c.has_groups()),
            ParseTree::Group { .. } => true,
        }
    }

    /// Number of inner (non-leaf) nodes.
    pub fn inner_nodes(&self) -> usize {
        match self {
            ParseTree::Leaf(_) => 0,
            _ => {
                1 + self
                    .children()
                    .iter()
                    .map(|c| c.inner_nodes())
                    .sum::<usize>()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ParseTree::Leaf(_) => 0,
            _ => 1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    /// Source range covered by the leaves, when they carry spans.
    pub fn span(&self) -> Option<Span> {
        self.tokens()
            .iter()
            .filter_map(|t| t.span)
            .reduce(Span::join)
    }

    fn key(&self) -> Vec<KeyItem<'_>> {
        fn go<'a>(t: &'a ParseTree, out: &mut Vec<KeyItem<'a>>) {
            match t {
                ParseTree::Leaf(tok) => out.push(KeyItem::Leaf(&tok.terminal, &tok.lexeme)),
                ParseTree::Node { label, children } => {
                    out.push(KeyItem::Node(label, children.len()));
                    children.iter().for_each(|c| go(c, out));
                }
                ParseTree::Group { open, inner, close } => {
                    out.push(KeyItem::Group);
                    out.push(KeyItem::Leaf(&open.terminal, &open.lexeme));
                    go(inner, out);
                    out.push(KeyItem::Leaf(&close.terminal, &close.lexeme));
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Functional notation, e.g. `m(a(n('1') '+' n('2')) '*' n('3'))`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, s: &mut String) {
        match self {
            ParseTree::Leaf(t) => {
                s.push('\'');
                s.push_str(&t.lexeme.replace('\\', "\\\\").replace('\'', "\\'"));
                s.push('\'');
            }
            _ => {
                s.push_str(self.label().expect("inner node"));
                s.push('(');
                let mut first = true;
                let mut sep = |s: &mut String| {
                    if !std::mem::take(&mut first) {
                        s.push(' ');
                    }
                };
                match self {
                    ParseTree::Node { children, .. } => {
                        for c in children {
                            sep(s);
                            c.render_into(s);
                        }
                    }
                    ParseTree::Group { open, inner, close } => {
                        sep(s);
                        ParseTree::Leaf(open.clone()).render_into(s);
                        sep(s);
                        inner.render_into(s);
                        sep(s);
                        ParseTree::Leaf(close.clone()).render_into(s);
                    }
                    ParseTree::Leaf(_) => unreachable!(),
                }
                s.push(')');
            }
        }
    }

    /// Nested-array form: inner nodes are `[label, child...]`, grouping nodes
    /// are `["g", open, inner, close]` and leaves are `{"t": terminal, "v": lexeme}`.
    pub fn to_json(&self) -> Value {
        match self {
            ParseTree::Leaf(t) => json!({ "t": t.terminal, "v": t.lexeme }),
            ParseTree::Node { label, children } => {
                let mut v = vec![json!(label)];
                v.extend(children.iter().map(|c| c.to_json()));
                Value::Array(v)
            }
            ParseTree::Group { open, inner, close } => Value::Array(vec![
                json!(GROUP_LABEL),
                ParseTree::Leaf(open.clone()).to_json(),
                inner.to_json(),
                ParseTree::Leaf(close.clone()).to_json(),
            ]),
        }
    }

    pub fn from_json(v: &Value) -> Option<ParseTree> {
        match v {
            Value::Object(m) => Some(ParseTree::leaf(
                m.get("t")?.as_str()?,
                m.get("v")?.as_str()?,
            )),
            Value::Array(items) => {
                let label = items.first()?.as_str()?;
                let rest: Option<Vec<ParseTree>> =
                    items[1..].iter().map(ParseTree::from_json).collect();
                let rest = rest?;
                if label == GROUP_LABEL && rest.len() == 3 && rest[0].is_leaf() && rest[2].is_leaf()
                {
                    let mut it = rest.into_iter();
                    let (Some(ParseTree::Leaf(open)), Some(inner), Some(ParseTree::Leaf(close))) =
                        (it.next(), it.next(), it.next())
                    else {
                        return None;
                    };
                    return Some(ParseTree::group(open, inner, close));
                }
                Some(ParseTree::node(label, rest))
            }
            _ => None,
        }
    }

    /// Checks membership in the tree language of `defn`: `T'_D` when `raw`
    /// (grouping nodes allowed, marks enforced), `T_D` otherwise.
    pub fn check(&self, defn: &LanguageDefinition, raw: bool) -> Result<(), String> {
        let root = NtRef {
            name: defn.start.clone(),
            mark: Default::default(),
            slot: None,
        };
        if fits(self, &root, defn, raw) {
            check_node(self, defn, raw)
        } else {
            Err(format!(
                "root {} does not derive from {}",
                self.render(),
                defn.start
            ))
        }
    }
}

/// Slot name of each child of a node, when all occurrences it can fill agree.
pub fn child_slots(defn: &LanguageDefinition, t: &ParseTree) -> Vec<Option<String>> {
    let ParseTree::Node { label, children } = t else {
        return Vec::new();
    };
    let none = || vec![None; children.len()];
    let Some(p) = defn.production(label) else {
        return none();
    };
    let kids: Vec<Child<'_>> = children
        .iter()
        .map(|c| match c {
            ParseTree::Leaf(t) => Child::Leaf(&t.terminal),
            _ => Child::Sub,
        })
        .collect();
    let fits = |i: usize, n: &NtRef| lhs_of(&children[i], defn) == Some(n.name.as_str());
    let Some(occ) = match_children(&p.rhs, &kids, &fits) else {
        return none();
    };
    let refs = p.rhs.nonterminals();
    occ.iter()
        .map(|ks| {
            let slots: BTreeSet<Option<&String>> =
                ks.iter().map(|&k| refs[k].slot.as_ref()).collect();
            match slots.into_iter().collect::<Vec<_>>().as_slice() {
                [Some(s)] => Some((*s).clone()),
                _ => None,
            }
        })
        .collect()
}

/// Non-terminal a subtree derives from, looking through grouping nodes.
pub(crate) fn lhs_of<'a>(t: &ParseTree, defn: &'a LanguageDefinition) -> Option<&'a str> {
    match t {
        ParseTree::Leaf(_) => None,
        ParseTree::Node { label, .. } => defn.production(label).map(|p| p.lhs.as_str()),
        ParseTree::Group { inner, .. } => lhs_of(inner, defn),
    }
}

/// Whether subtree `t` may fill occurrence `n`.
fn fits(t: &ParseTree, n: &NtRef, defn: &LanguageDefinition, raw: bool) -> bool {
    match t {
        ParseTree::Leaf(_) => false,
        ParseTree::Node { label, .. } => {
            lhs_of(t, defn) == Some(n.name.as_str()) && (!raw || !n.mark.contains(label))
        }
        ParseTree::Group { open, inner, close } => {
            raw && defn.is_grouped(&n.name)
                && open.terminal == defn.grouping.open
                && close.terminal == defn.grouping.close
                && fits(
                    inner,
                    &NtRef {
                        name: n.name.clone(),
                        mark: Default::default(),
                        slot: None,
                    },
                    defn,
                    raw,
                )
        }
    }
}

fn check_node(t: &ParseTree, defn: &LanguageDefinition, raw: bool) -> Result<(), String> {
    match t {
        ParseTree::Leaf(_) => Ok(()),
        ParseTree::Group { inner, .. } => check_node(inner, defn, raw),
        ParseTree::Node { label, children } => {
            let p = defn
                .production(label)
                .ok_or_else(|| format!("unknown label {label}"))?;
            let kids: Vec<Child<'_>> = children
                .iter()
                .map(|c| match c {
                    ParseTree::Leaf(tok) => Child::Leaf(&tok.terminal),
                    _ => Child::Sub,
                })
                .collect();
            let fit = |i: usize, n: &NtRef| fits(&children[i], n, defn, raw);
            if match_children(&p.rhs, &kids, &fit).is_none() {
                return Err(format!(
                    "children of {label} do not match its right-hand side in {}",
                    t.render()
                ));
            }
            children.iter().try_for_each(|c| check_node(c, defn, raw))
        }
    }
}

impl PartialOrd for ParseTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the preorder sequence of labels (with arities) and leaves.
impl Ord for ParseTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A child position as seen by the horizontal matcher.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Child<'a> {
    Leaf(&'a str),
    Sub,
}

struct HNfa<'r> {
    eps: Vec<Vec<usize>>,
    /// `(from, to, edge)`
    edges: Vec<(usize, usize, HEdge<'r>)>,
}

#[derive(Clone, Copy)]
enum HEdge<'r> {
    T(&'r str),
    N(usize, &'r NtRef),
}

impl<'r> HNfa<'r> {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &'r Rhs, occ: &mut usize) -> (usize, usize) {
        let (s, e) = (self.state(), self.state());
        match r {
            Rhs::Terminal(t) => self.edges.push((s, e, HEdge::T(t))),
            Rhs::NonTerminal(n) => {
                self.edges.push((s, e, HEdge::N(*occ, n)));
                *occ += 1;
            }
            Rhs::Epsilon => self.eps[s].push(e),
            Rhs::Seq(xs) => {
                let mut cur = s;
                for x in xs {
                    let (a, b) = self.build(x, occ);
                    self.eps[cur].push(a);
                    cur = b;
                }
                self.eps[cur].push(e);
            }
            Rhs::Alt(xs) => {
                for x in xs {
                    let (a, b) = self.build(x, occ);
                    self.eps[s].push(a);
                    self.eps[b].push(e);
                }
            }
            Rhs::Star(x) => {
                let (a, b) = self.build(x, occ);
                self.eps[s].push(a);
                self.eps[s].push(e);
                self.eps[b].push(a);
                self.eps[b].push(e);
            }
        }
        (s, e)
    }
}

fn closure(eps: &[Vec<usize>], set: &mut [bool], reverse: bool) {
    let n = eps.len();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); if reverse { n } else { 0 }];
    if reverse {
        for (p, qs) in eps.iter().enumerate() {
            for &q in qs {
                rev[q].push(p);
            }
        }
    }
    let adj = if reverse { &rev[..] } else { eps };
    let mut stack: Vec<usize> = (0..n).filter(|&q| set[q]).collect();
    while let Some(p) = stack.pop() {
        for &q in &adj[p] {
            if !set[q] {
                set[q] = true;
                stack.push(q);
            }
        }
    }
}

/// Matches a child sequence against a right-hand side. For each child, returns
/// the non-terminal occurrences (indices in `rhs.nonterminals()` order) that it
/// fills on some accepting path; `None` when no path accepts.
pub(crate) fn match_children(
    rhs: &Rhs,
    children: &[Child<'_>],
    fits: &dyn Fn(usize, &NtRef) -> bool,
) -> Option<Vec<Vec<usize>>> {
    let mut nfa = HNfa {
        eps: Vec::new(),
        edges: Vec::new(),
    };
    let mut occ = 0;
    let (start, end) = nfa.build(rhs, &mut occ);
    let n = nfa.eps.len();
    let ok = |i: usize, e: &HEdge<'_>| match (children[i], e) {
        (Child::Leaf(t), HEdge::T(u)) => t == *u,
        (Child::Sub, HEdge::N(_, r)) => fits(i, r),
        _ => false,
    };
    let mut fwd = vec![vec![false; n]; children.len() + 1];
    fwd[0][start] = true;
    closure(&nfa.eps, &mut fwd[0], false);
    for i in 0..children.len() {
        for (p, q, e) in &nfa.edges {
            if fwd[i][*p] && ok(i, e) {
                fwd[i + 1][*q] = true;
            }
        }
        closure(&nfa.eps, &mut fwd[i + 1], false);
    }
    if !fwd[children.len()][end] {
        return None;
    }
    let mut bwd = vec![vec![false; n]; children.len() + 1];
    bwd[children.len()][end] = true;
    closure(&nfa.eps, &mut bwd[children.len()], true);
    for i in (0..children.len()).rev() {
        for (p, q, e) in &nfa.edges {
            if bwd[i + 1][*q] && ok(i, e) {
                bwd[i][*p] = true;
            }
        }
        closure(&nfa.eps, &mut bwd[i], true);
    }
    let mut out = vec![Vec::new(); children.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        for (p, q, e) in &nfa.edges {
            if let HEdge::N(k, _) = e {
                if fwd[i][*p] && bwd[i + 1][*q] && ok(i, e) && !slot.contains(k) {
                    slot.push(*k);
                }
            }
        }
        slot.sort_unstable();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::running_example;

    fn n(x: &str) -> ParseTree {
        ParseTree::node("n", vec![ParseTree::leaf("I", x)])
    }

    fn bin(l: &str, a: ParseTree, op: &str, b: ParseTree) -> ParseTree {
        ParseTree::node(l, vec![a, ParseTree::leaf(op, op), b])
    }

    fn paren(t: ParseTree) -> ParseTree {
        ParseTree::group(Token::new("(", "("), t, Token::new(")", ")"))
    }

    fn fig5a() -> ParseTree {
        bin("m", bin("a", n("1"), "+", n("2")), "*", n("3"))
    }

    #[test]
    fn paper_notation() {
        assert_eq!(fig5a().render(), "m(a(n('1') '+' n('2')) '*' n('3'))");
        assert_eq!(paren(n("1")).render(), "g('(' n('1') ')')");
    }

    #[test]
    fn yield_and_semantic() {
        let raw = bin("m", paren(bin("a", n("1"), "+", n("2"))), "*", n("3"));
        assert_eq!(crate::lexer::render_word(&raw.tokens()), "( 1 + 2 ) * 3");
        assert_eq!(raw.semantic(), fig5a());
        assert_eq!(paren(paren(n("1"))).semantic(), n("1"));
        assert_eq!(fig5a().semantic(), fig5a());
    }

    #[test]
    fn tree_language_membership() {
        let d = running_example();
        assert!(fig5a().check(&d, false).is_ok());
        let raw = bin("m", paren(bin("a", n("1"), "+", n("2"))), "*", n("3"));
        assert!(raw.check(&d, true).is_ok());
        assert!(raw.check(&d, false).is_err());
        // the mark forbids an unparenthesized addition below a multiplication
        assert!(fig5a().check(&d, true).is_err());
        let list = ParseTree::node(
            "l",
            vec![
                ParseTree::leaf("[", "["),
                n("1"),
                ParseTree::leaf(";", ";"),
                n("2"),
                ParseTree::leaf("]", "]"),
            ],
        );
        assert!(list.check(&d, false).is_ok());
        let bad = ParseTree::node(
            "l",
            vec![
                ParseTree::leaf("[", "["),
                n("1"),
                n("2"),
                ParseTree::leaf("]", "]"),
            ],
        );
        assert!(bad.check(&d, false).is_err());
    }

    #[test]
    fn json_round_trip() {
        let raw = bin("m", paren(bin("a", n("1"), "+", n("2"))), "*", n("3"));
        for t in [raw, fig5a()] {
            assert_eq!(ParseTree::from_json(&t.to_json()), Some(t));
        }
    }

    #[test]
    fn ordering_is_total_and_structural() {
        let t1 = bin("a", n("1"), "+", bin("a", n("2"), "+", n("3")));
        let t2 = bin("a", bin("a", n("1"), "+", n("2")), "+", n("3"));
        assert_ne!(t1.cmp(&t2), Ordering::Equal);
        assert_eq!(t1.cmp(&t1.clone()), Ordering::Equal);
    }

    #[test]
    fn matcher_reports_occurrences() {
        let d = running_example();
        let l = &d.production("l").unwrap().rhs;
        let kids = [
            Child::Leaf("["),
            Child::Sub,
            Child::Leaf(";"),
            Child::Sub,
            Child::Leaf("]"),
        ];
        let m = match_children(l, &kids, &|_, _| true).unwrap();
        assert_eq!(m, vec![vec![], vec![0], vec![], vec![1], vec![]]);
        assert!(match_children(l, &kids[..4], &|_, _| true).is_none());
    }
}
