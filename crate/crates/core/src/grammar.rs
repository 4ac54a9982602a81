//! Language definitions: labelled productions whose right-hand sides are
//! regular expressions over terminals and marked non-terminals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// How a terminal is recognized in source text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenPattern {
    /// Exact spelling.
    Literal(String),
    /// Regular expression (POSIX bracket classes allowed).
    Regex(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Terminal {
    pub name: String,
    pub pattern: TokenPattern,
}

impl Terminal {
    pub fn literal(spelling: impl Into<String>) -> Self {
        let s = spelling.into();
        Terminal {
            name: s.clone(),
            pattern: TokenPattern::Literal(s),
        }
    }

    pub fn regex(name: impl Into<String>, pattern: impl Into<String>) -> Self {
        Terminal {
            name: name.into(),
            pattern: TokenPattern::Regex(pattern.into()),
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.pattern, TokenPattern::Literal(_))
    }
}

/// A non-terminal occurrence on a right-hand side, with its mark.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NtRef {
    pub name: String,
    /// Labels that may not be the immediate production filling this occurrence.
    pub mark: BTreeSet<String>,
    /// Field name from the frontend (`left`, `right`, `head`, ...), if any.
    pub slot: Option<String>,
}

/// Right-hand side regular expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rhs {
    Terminal(String),
    NonTerminal(NtRef),
    Seq(Vec<Rhs>),
    Alt(Vec<Rhs>),
    Epsilon,
    Star(Box<Rhs>),
}

impl Rhs {
    pub fn t(name: impl Into<String>) -> Rhs {
        Rhs::Terminal(name.into())
    }

    pub fn nt(name: impl Into<String>) -> Rhs {
        Rhs::NonTerminal(NtRef {
            name: name.into(),
            mark: BTreeSet::new(),
            slot: None,
        })
    }

    pub fn marked<I, S>(name: impl Into<String>, mark: I) -> Rhs
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Rhs::NonTerminal(NtRef {
            name: name.into(),
            mark: mark.into_iter().map(Into::into).collect(),
            slot: None,
        })
    }

    pub fn slot(name: impl Into<String>, slot: impl Into<String>) -> Rhs {
        Rhs::NonTerminal(NtRef {
            name: name.into(),
            mark: BTreeSet::new(),
            slot: Some(slot.into()),
        })
    }

    pub fn seq(items: impl IntoIterator<Item = Rhs>) -> Rhs {
        Rhs::Seq(items.into_iter().collect())
    }

    pub fn alt(items: impl IntoIterator<Item = Rhs>) -> Rhs {
        Rhs::Alt(items.into_iter().collect())
    }

    pub fn star(inner: Rhs) -> Rhs {
        Rhs::Star(Box::new(inner))
    }

    pub fn opt(inner: Rhs) -> Rhs {
        Rhs::Alt(vec![inner, Rhs::Epsilon])
    }

    pub fn plus(inner: Rhs) -> Rhs {
        Rhs::Seq(vec![inner.clone(), Rhs::Star(Box::new(inner))])
    }

    /// Visits every node in preorder.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Rhs)) {
        f(self);
        match self {
            Rhs::Seq(xs) | Rhs::Alt(xs) => xs.iter().for_each(|x| x.walk(f)),
            Rhs::Star(x) => x.walk(f),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Rhs)) {
        f(self);
        match self {
            Rhs::Seq(xs) | Rhs::Alt(xs) => xs.iter_mut().for_each(|x| x.walk_mut(f)),
            Rhs::Star(x) => x.walk_mut(f),
            _ => {}
        }
    }

    pub fn nonterminals(&self) -> Vec<&NtRef> {
        let mut out = Vec::new();
        self.walk(&mut |r| {
            if let Rhs::NonTerminal(n) = r {
                out.push(n);
            }
        });
        out
    }

    pub fn terminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |r| {
            if let Rhs::Terminal(t) = r {
                out.push(t.as_str());
            }
        });
        out
    }

    pub fn nullable(&self) -> bool {
        match self {
            Rhs::Terminal(_) | Rhs::NonTerminal(_) => false,
            Rhs::Epsilon | Rhs::Star(_) => true,
            Rhs::Seq(xs) => xs.iter().all(Rhs::nullable),
            Rhs::Alt(xs) => xs.iter().any(Rhs::nullable),
        }
    }

    /// Whether the single-symbol word consisting of non-terminal `nt` is in the language.
    pub fn matches_single_nt(&self, nt: &str) -> bool {
        self.single_symbol(&|r| matches!(r, Rhs::NonTerminal(n) if n.name == nt))
    }

    fn single_symbol(&self, is: &dyn Fn(&Rhs) -> bool) -> bool {
        match self {
            Rhs::Terminal(_) | Rhs::NonTerminal(_) => is(self),
            Rhs::Epsilon => false,
            Rhs::Alt(xs) => xs.iter().any(|x| x.single_symbol(is)),
            Rhs::Star(x) => x.single_symbol(is),
            Rhs::Seq(xs) => xs.iter().enumerate().any(|(i, x)| {
                x.single_symbol(is) && xs.iter().enumerate().all(|(j, y)| j == i || y.nullable())
            }),
        }
    }

    /// Drops every mark.
    pub fn strip_marks(&mut self) {
        self.walk_mut(&mut |r| {
            if let Rhs::NonTerminal(n) = r {
                n.mark.clear();
            }
        });
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Terminal(t) => write!(f, "'{t}'"),
            Rhs::NonTerminal(n) => {
                f.write_str(&n.name)?;
                if !n.mark.is_empty() {
                    let labels: Vec<_> = n.mark.iter().map(String::as_str).collect();
                    write!(f, "{{{}}}", labels.join(","))?;
                }
                Ok(())
            }
            Rhs::Seq(xs) => {
                if xs.is_empty() {
                    return f.write_str("ε");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    match x {
                        Rhs::Alt(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            Rhs::Alt(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Rhs::Epsilon => f.write_str("ε"),
            Rhs::Star(x) => match **x {
                Rhs::Terminal(_) | Rhs::NonTerminal(_) => write!(f, "{x}*"),
                _ => write!(f, "({x})*"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Production {
    pub lhs: String,
    pub label: String,
    pub rhs: Rhs,
}

/// The grouping parenthesis pair injected by the concrete grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grouping {
    pub open: String,
    pub close: String,
}

impl Default for Grouping {
    fn default() -> Self {
        Grouping {
            open: "(".into(),
            close: ")".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageDefinition {
    pub start: String,
    /// Declared terminals; declaration order is the token order used for tie-breaking.
    pub terminals: Vec<Terminal>,
    pub productions: Vec<Production>,
    pub grouping: Grouping,
    /// Non-terminals for which no grouping production is generated.
    pub ungrouped: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

/// A well-formedness finding about a language definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    /// Production label or declaration the issue is attached to.
    pub location: Option<String>,
}

impl Issue {
    fn error(code: &str, message: String, location: Option<String>) -> Self {
        Issue {
            severity: Severity::Error,
            code: code.into(),
            message,
            location,
        }
    }

    fn warning(code: &str, message: String, location: Option<String>) -> Self {
        Issue {
            severity: Severity::Warning,
            code: code.into(),
            message,
            location,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)?;
        if let Some(loc) = &self.location {
            write!(f, " (at {loc})")?;
        }
        Ok(())
    }
}

impl LanguageDefinition {
    pub fn builder(start: impl Into<String>) -> DefinitionBuilder {
        DefinitionBuilder::new(start)
    }

    pub fn production(&self, label: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.label == label)
    }

    pub fn terminal(&self, name: &str) -> Option<&Terminal> {
        self.terminals.iter().find(|t| t.name == name)
    }

    /// Non-terminals in first-appearance order (start first).
    pub fn nonterminals(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        std::iter::once(&self.start)
            .chain(self.productions.iter().map(|p| &p.lhs))
            .filter(|n| seen.insert(n.as_str()))
            .cloned()
            .collect()
    }

    pub fn productions_of<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| p.lhs == lhs)
    }

    pub fn is_grouped(&self, nt: &str) -> bool {
        !self.ungrouped.contains(nt)
    }

    pub fn has_marks(&self) -> bool {
        self.productions
            .iter()
            .any(|p| p.rhs.nonterminals().iter().any(|n| !n.mark.is_empty()))
    }

    /// Whether some production uses a grouping parenthesis as an ordinary terminal.
    pub fn uses_grouping_terminals(&self) -> bool {
        self.productions.iter().any(|p| {
            p.rhs
                .terminals()
                .iter()
                .any(|t| *t == self.grouping.open || *t == self.grouping.close)
        })
    }

    /// Copy of this definition with every mark removed.
    pub fn without_marks(&self) -> LanguageDefinition {
        let mut d = self.clone();
        for p in &mut d.productions {
            p.rhs.strip_marks();
        }
        d
    }

    /// Checks the structural invariants; an empty list means well-formed.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let nts: BTreeSet<&str> = self.productions.iter().map(|p| p.lhs.as_str()).collect();
        let labels: BTreeMap<&str, &Production> = self
            .productions
            .iter()
            .map(|p| (p.label.as_str(), p))
            .collect();

        let mut seen_terms = BTreeSet::new();
        for t in &self.terminals {
            if !seen_terms.insert(t.name.as_str()) {
                issues.push(Issue::error(
                    "duplicate-terminal",
                    format!("terminal `{}` declared twice", t.name),
                    None,
                ));
            }
            if let TokenPattern::Literal(s) = &t.pattern {
                if s.is_empty() {
                    issues.push(Issue::error(
                        "empty-literal",
                        format!("literal terminal `{}` has an empty spelling", t.name),
                        None,
                    ));
                }
            }
        }

        let mut seen_labels = BTreeSet::new();
        for p in &self.productions {
            if p.label == crate::generate::GROUP_LABEL {
                issues.push(Issue::error(
                    "reserved-label",
                    format!("label `{}` is reserved for grouping", p.label),
                    Some(p.label.clone()),
                ));
            }
            if !seen_labels.insert(p.label.as_str()) {
                issues.push(Issue::error(
                    "duplicate-label",
                    format!("label `{}` is used by more than one production", p.label),
                    Some(p.label.clone()),
                ));
            }
        }

        if !nts.contains(self.start.as_str()) {
            issues.push(Issue::error(
                "no-start-production",
                format!("start symbol `{}` has no productions", self.start),
                None,
            ));
        }

        for name in &nts {
            if seen_terms.contains(name) {
                issues.push(Issue::error(
                    "name-clash",
                    format!("`{name}` is both a terminal and a non-terminal"),
                    None,
                ));
            }
            if labels.contains_key(name) {
                issues.push(Issue::error(
                    "name-clash",
                    format!("`{name}` is both a label and a non-terminal"),
                    None,
                ));
            }
        }
        for label in labels.keys() {
            if seen_terms.contains(label) {
                issues.push(Issue::error(
                    "name-clash",
                    format!("`{label}` is both a terminal and a label"),
                    None,
                ));
            }
        }

        for p in &self.productions {
            for t in p.rhs.terminals() {
                if !seen_terms.contains(t) {
                    issues.push(Issue::error(
                        "unknown-terminal",
                        format!("production `{}` uses undeclared terminal `{t}`", p.label),
                        Some(p.label.clone()),
                    ));
                }
                if t == self.grouping.open || t == self.grouping.close {
                    issues.push(Issue::warning(
                        "grouping-terminal-in-production",
                        format!(
                            "production `{}` uses grouping terminal `{t}` as an ordinary terminal",
                            p.label
                        ),
                        Some(p.label.clone()),
                    ));
                }
            }
            for n in p.rhs.nonterminals() {
                if !nts.contains(n.name.as_str()) {
                    issues.push(Issue::error(
                        "unknown-nonterminal",
                        format!(
                            "production `{}` references unknown non-terminal `{}`",
                            p.label, n.name
                        ),
                        Some(p.label.clone()),
                    ));
                }
                for m in &n.mark {
                    if m == crate::generate::GROUP_LABEL && !labels.contains_key(m.as_str()) {
                        issues.push(Issue::error(
                            "mark-forbids-grouping",
                            format!(
                                "mark in production `{}` forbids grouping, which is always allowed",
                                p.label
                            ),
                            Some(p.label.clone()),
                        ));
                        continue;
                    }
                    match labels.get(m.as_str()) {
                        None => issues.push(Issue::error(
                            "unknown-label-in-mark",
                            format!("mark in production `{}` names unknown label `{m}`", p.label),
                            Some(p.label.clone()),
                        )),
                        Some(target) if target.lhs != n.name => issues.push(Issue::warning(
                            "vacuous-mark",
                            format!(
                                "mark on `{}` in production `{}` names `{m}`, a production of `{}`",
                                n.name, p.label, target.lhs
                            ),
                            Some(p.label.clone()),
                        )),
                        _ => {}
                    }
                }
            }
        }

        if self.grouping.open == self.grouping.close {
            issues.push(Issue::error(
                "grouping-pair",
                "grouping open and close terminals must differ".into(),
                None,
            ));
        }
        issues
    }

    /// True when every right-hand side only recognizes words whose grouping
    /// parentheses are balanced.
    pub fn check_balanced(&self) -> bool {
        self.productions.iter().all(|p| {
            let e = paren_effect(&p.rhs, &self.grouping);
            e.ok && e.min >= 0 && e.net == 0
        })
    }

    /// Non-terminals on a cycle of single-non-terminal derivations.
    pub fn check_unit_cycles(&self) -> BTreeSet<String> {
        let graph = self.unit_graph();
        let mut on_cycle = BTreeSet::new();
        // Tarjan's strongly connected components.
        let nodes: Vec<&str> = graph.keys().copied().collect();
        let mut index = BTreeMap::new();
        let mut low = BTreeMap::new();
        let mut stack: Vec<&str> = Vec::new();
        let mut on_stack = BTreeSet::new();
        let mut counter = 0usize;

        fn strong<'a>(
            v: &'a str,
            graph: &BTreeMap<&'a str, BTreeSet<&'a str>>,
            index: &mut BTreeMap<&'a str, usize>,
            low: &mut BTreeMap<&'a str, usize>,
            stack: &mut Vec<&'a str>,
            on_stack: &mut BTreeSet<&'a str>,
            counter: &mut usize,
            out: &mut BTreeSet<String>,
        ) {
            index.insert(v, *counter);
            low.insert(v, *counter);
            *counter += 1;
            stack.push(v);
            on_stack.insert(v);
            for &w in graph.get(v).into_iter().flatten() {
                if !index.contains_key(w) {
                    strong(w, graph, index, low, stack, on_stack, counter, out);
                    let lw = low[w];
                    let lv = low.get_mut(v).unwrap();
                    *lv = (*lv).min(lw);
                } else if on_stack.contains(w) {
                    let iw = index[w];
                    let lv = low.get_mut(v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack.remove(w);
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                let self_loop = graph.get(v).is_some_and(|s| s.contains(v));
                if comp.len() > 1 || self_loop {
                    out.extend(comp.into_iter().map(String::from));
                }
            }
        }

        for v in nodes {
            if !index.contains_key(v) {
                strong(
                    v,
                    &graph,
                    &mut index,
                    &mut low,
                    &mut stack,
                    &mut on_stack,
                    &mut counter,
                    &mut on_cycle,
                );
            }
        }
        on_cycle
    }

    /// Edges `N -> N'` for every production of `N` whose language contains the word `N'`.
    pub fn unit_graph(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let nts: BTreeSet<&str> = self.productions.iter().map(|p| p.lhs.as_str()).collect();
        let mut graph: BTreeMap<&str, BTreeSet<&str>> =
            nts.iter().map(|n| (*n, BTreeSet::new())).collect();
        for p in &self.productions {
            for n in &nts {
                if p.rhs.matches_single_nt(n) {
                    graph.get_mut(p.lhs.as_str()).unwrap().insert(n);
                }
            }
        }
        graph
    }
}

#[derive(Clone, Copy, Debug)]
struct ParenEffect {
    /// Lowest depth reached relative to the start.
    min: i64,
    /// Depth at the end.
    net: i64,
    /// False when different words disagree on `net` (e.g. `'(' + ε`).
    ok: bool,
}

fn paren_effect(r: &Rhs, g: &Grouping) -> ParenEffect {
    match r {
        Rhs::Terminal(t) if *t == g.open => ParenEffect {
            min: 0,
            net: 1,
            ok: true,
        },
        Rhs::Terminal(t) if *t == g.close => ParenEffect {
            min: -1,
            net: -1,
            ok: true,
        },
        Rhs::Terminal(_) | Rhs::NonTerminal(_) | Rhs::Epsilon => ParenEffect {
            min: 0,
            net: 0,
            ok: true,
        },
        Rhs::Seq(xs) => {
            let mut acc = ParenEffect {
                min: 0,
                net: 0,
                ok: true,
            };
            for x in xs {
                let e = paren_effect(x, g);
                acc.min = acc.min.min(acc.net + e.min);
                acc.net += e.net;
                acc.ok &= e.ok;
            }
            acc
        }
        Rhs::Alt(xs) => {
            let effects: Vec<_> = xs.iter().map(|x| paren_effect(x, g)).collect();
            let net = effects.first().map_or(0, |e| e.net);
            ParenEffect {
                min: effects.iter().map(|e| e.min).min().unwrap_or(0),
                net,
                ok: effects.iter().all(|e| e.ok && e.net == net),
            }
        }
        Rhs::Star(x) => {
            let e = paren_effect(x, g);
            ParenEffect {
                min: e.min.min(0),
                net: 0,
                ok: e.ok && e.net == 0 && e.min >= 0,
            }
        }
    }
}

/// Incremental construction of a [`LanguageDefinition`]. Terminals referenced
/// on right-hand sides but never declared as tokens become literals.
#[derive(Clone, Debug)]
pub struct DefinitionBuilder {
    start: String,
    tokens: Vec<Terminal>,
    productions: Vec<Production>,
    grouping: Grouping,
    ungrouped: BTreeSet<String>,
}

impl DefinitionBuilder {
    pub fn new(start: impl Into<String>) -> Self {
        DefinitionBuilder {
            start: start.into(),
            tokens: Vec::new(),
            productions: Vec::new(),
            grouping: Grouping::default(),
            ungrouped: BTreeSet::new(),
        }
    }

    pub fn token(mut self, name: impl Into<String>, pattern: impl Into<String>) -> Self {
        self.tokens.push(Terminal::regex(name, pattern));
        self
    }

    pub fn literal(mut self, spelling: impl Into<String>) -> Self {
        self.tokens.push(Terminal::literal(spelling));
        self
    }

    pub fn grouping(mut self, open: impl Into<String>, close: impl Into<String>) -> Self {
        self.grouping = Grouping {
            open: open.into(),
            close: close.into(),
        };
        self
    }

    pub fn ungrouped(mut self, nt: impl Into<String>) -> Self {
        self.ungrouped.insert(nt.into());
        self
    }

    pub fn production(
        mut self,
        lhs: impl Into<String>,
        label: impl Into<String>,
        rhs: Rhs,
    ) -> Self {
        self.productions.push(Production {
            lhs: lhs.into(),
            label: label.into(),
            rhs,
        });
        self
    }

    pub fn build(self) -> LanguageDefinition {
        let mut terminals = Vec::new();
        let mut names = BTreeSet::new();
        let mut add = |t: Terminal, terminals: &mut Vec<Terminal>| {
            if names.insert(t.name.clone()) {
                terminals.push(t);
            }
        };
        add(
            Terminal::literal(self.grouping.open.clone()),
            &mut terminals,
        );
        add(
            Terminal::literal(self.grouping.close.clone()),
            &mut terminals,
        );
        let declared: BTreeSet<String> = self.tokens.iter().map(|t| t.name.clone()).collect();
        // Keep declaration order, then literals in order of first use.
        for t in self.tokens {
            add(t, &mut terminals);
        }
        for p in &self.productions {
            for t in p.rhs.terminals() {
                if !declared.contains(t) {
                    add(Terminal::literal(t), &mut terminals);
                }
            }
        }
        LanguageDefinition {
            start: self.start,
            terminals,
            productions: self.productions,
            grouping: self.grouping,
            ungrouped: self.ungrouped,
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn running_example() -> LanguageDefinition {
        LanguageDefinition::builder("E")
            .token("I", "[0-9]+")
            .production(
                "E",
                "l",
                Rhs::seq([
                    Rhs::t("["),
                    Rhs::opt(Rhs::seq([
                        Rhs::nt("E"),
                        Rhs::star(Rhs::seq([Rhs::t(";"), Rhs::nt("E")])),
                    ])),
                    Rhs::t("]"),
                ]),
            )
            .production(
                "E",
                "a",
                Rhs::seq([Rhs::nt("E"), Rhs::t("+"), Rhs::nt("E")]),
            )
            .production(
                "E",
                "m",
                Rhs::seq([
                    Rhs::marked("E", ["a"]),
                    Rhs::t("*"),
                    Rhs::marked("E", ["a"]),
                ]),
            )
            .production("E", "n", Rhs::t("I"))
            .build()
    }

    fn single(rhs: Rhs) -> LanguageDefinition {
        LanguageDefinition::builder("E")
            .production("E", "p", rhs)
            .production("E", "q", Rhs::t("x"))
            .build()
    }

    #[test]
    fn forbidding_grouping_is_reported() {
        let d = LanguageDefinition::builder("E")
            .production(
                "E",
                "p",
                Rhs::seq([Rhs::marked("E", ["g"]), Rhs::t("+"), Rhs::nt("E")]),
            )
            .production("E", "q", Rhs::t("x"))
            .build();
        let issues = d.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "mark-forbids-grouping");
    }

    #[test]
    fn running_example_is_valid() {
        assert_eq!(running_example().validate(), vec![]);
    }

    #[test]
    fn duplicate_label_is_reported_once() {
        let d = LanguageDefinition::builder("E")
            .production("E", "a", Rhs::t("x"))
            .production("E", "a", Rhs::t("y"))
            .build();
        let issues = d.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "duplicate-label");
    }

    #[test]
    fn dangling_nonterminal_is_reported() {
        let d = LanguageDefinition::builder("E")
            .production("E", "a", Rhs::nt("F"))
            .build();
        let issues = d.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "unknown-nonterminal");
    }

    #[test]
    fn cross_nonterminal_mark_is_a_warning() {
        let d = LanguageDefinition::builder("S")
            .production("S", "s", Rhs::marked("E", ["s"]))
            .production("E", "e", Rhs::t("x"))
            .build();
        let issues = d.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
        assert_eq!(issues[0].code, "vacuous-mark");
    }

    #[test]
    fn balanced_examples() {
        assert!(single(Rhs::seq([Rhs::t("("), Rhs::t(")")])).check_balanced());
        assert!(
            !single(Rhs::seq([Rhs::star(Rhs::t("(")), Rhs::star(Rhs::t(")"))])).check_balanced()
        );
        assert!(running_example().check_balanced());
        assert!(!single(Rhs::seq([Rhs::t(")"), Rhs::t("(")])).check_balanced());
        assert!(!single(Rhs::opt(Rhs::t("("))).check_balanced());
        assert!(single(Rhs::star(Rhs::seq([
            Rhs::t("("),
            Rhs::nt("E"),
            Rhs::t(")")
        ])))
        .check_balanced());
    }

    #[test]
    fn unit_cycles() {
        assert!(running_example().check_unit_cycles().is_empty());

        let mut d = running_example();
        d.productions.push(Production {
            lhs: "E".into(),
            label: "x".into(),
            rhs: Rhs::nt("E"),
        });
        assert_eq!(d.check_unit_cycles(), BTreeSet::from(["E".to_string()]));

        let abc = LanguageDefinition::builder("S")
            .production("S", "a", Rhs::seq([Rhs::nt("E"), Rhs::opt(Rhs::t(";"))]))
            .production("E", "b", Rhs::seq([Rhs::nt("E"), Rhs::t("s")]))
            .production("E", "c", Rhs::t("z"))
            .build();
        assert!(abc.check_unit_cycles().is_empty());
        assert_eq!(abc.unit_graph()["S"], BTreeSet::from(["E"]));
    }

    #[test]
    fn two_cycle_through_alternation() {
        let d = LanguageDefinition::builder("A")
            .production("A", "a", Rhs::alt([Rhs::nt("B"), Rhs::t("x")]))
            .production("B", "b", Rhs::seq([Rhs::star(Rhs::t("y")), Rhs::nt("A")]))
            .build();
        assert_eq!(
            d.check_unit_cycles(),
            BTreeSet::from(["A".to_string(), "B".to_string()])
        );
    }
}
