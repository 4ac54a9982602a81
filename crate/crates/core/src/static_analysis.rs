//! Language-level resolvability. Builds `A_[]`, whose runs are in bijection
//! with trees and which accepts exactly their canonical encodings, and `A'_[]`,
//! which additionally accepts extra bracket pairs anywhere. Two different runs
//! of the two automata on one word give a tree whose words are all shared with
//! another tree.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::{json, Value};

use crate::dfa::{regex_to_dfa, Dfa, RhsSymbol};
use crate::dynamic::{analyze_trees, DynamicOptions};
use crate::encoding::{encode, LinearEncoding};
use crate::error::{Error, Result};
use crate::grammar::LanguageDefinition;
use crate::lexer::Token;
use crate::parser::Parser;
use crate::tree::ParseTree;
use crate::vpda::{product_with_states, Alphabet, Kind, Step, Vpda};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subclass {
    NoMarksNoParens,
    MarksOnly,
    Unsupported,
}

impl Subclass {
    pub fn name(self) -> &'static str {
        match self {
            Subclass::NoMarksNoParens => "no-marks-no-parens",
            Subclass::MarksOnly => "marks-only",
            Subclass::Unsupported => "unsupported",
        }
    }
}

/// Productions may not use the grouping parentheses as terminals, and every
/// non-terminal must be groupable. Marks move the language to `MarksOnly`.
pub fn classify(defn: &LanguageDefinition) -> Subclass {
    if defn.uses_grouping_terminals() || !defn.ungrouped.is_empty() {
        Subclass::Unsupported
    } else if defn.has_marks() {
        Subclass::MarksOnly
    } else {
        Subclass::NoMarksNoParens
    }
}

/// `(N, w, N')`: from `N`, the chain of single-non-terminal productions `w`
/// reaches `N'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitRelation {
    pub triples: BTreeSet<(String, Vec<String>, String)>,
}

impl UnitRelation {
    pub fn contains(&self, from: &str, labels: &[&str], to: &str) -> bool {
        self.triples.iter().any(|(a, w, b)| {
            a == from && b == to && w.iter().map(String::as_str).eq(labels.iter().copied())
        })
    }

    /// Triples starting at `from`.
    pub fn from<'a>(
        &'a self,
        from: &'a str,
    ) -> impl Iterator<Item = &'a (String, Vec<String>, String)> + 'a {
        self.triples.iter().filter(move |(a, _, _)| a == from)
    }
}

/// Closure of the single-step unit derivations. Fails with
/// `InfiniteAmbiguity` listing the non-terminals on unit cycles.
pub fn unit_relation(defn: &LanguageDefinition) -> Result<UnitRelation> {
    let cycles = defn.check_unit_cycles();
    if !cycles.is_empty() {
        return Err(Error::InfiniteAmbiguity(cycles.into_iter().collect()));
    }
    let nts = defn.nonterminals();
    let mut steps: Vec<(String, String, String)> = Vec::new();
    for p in &defn.productions {
        for n in &nts {
            if p.rhs.matches_single_nt(n) {
                steps.push((p.lhs.clone(), p.label.clone(), n.clone()));
            }
        }
    }
    let mut triples: BTreeSet<(String, Vec<String>, String)> = nts
        .iter()
        .map(|n| (n.clone(), Vec::new(), n.clone()))
        .collect();
    let mut frontier: Vec<(String, Vec<String>, String)> = triples.iter().cloned().collect();
    // Without cycles every chain is at most |steps| long, so this terminates.
    while let Some((a, w, b)) = frontier.pop() {
        for (lhs, label, to) in &steps {
            if *lhs == b {
                let mut w2 = w.clone();
                w2.push(label.clone());
                let t = (a.clone(), w2, to.clone());
                if triples.insert(t.clone()) {
                    frontier.push(t);
                }
            }
        }
    }
    Ok(UnitRelation { triples })
}

fn rhs_alphabet(defn: &LanguageDefinition) -> Vec<RhsSymbol> {
    let mut syms: BTreeSet<RhsSymbol> = defn
        .terminals
        .iter()
        .map(|t| RhsSymbol::Terminal(t.name.clone()))
        .collect();
    for p in &defn.productions {
        syms.extend(
            p.rhs
                .terminals()
                .into_iter()
                .map(|t| RhsSymbol::Terminal(t.to_string())),
        );
    }
    syms.extend(defn.nonterminals().into_iter().map(RhsSymbol::NonTerminal));
    syms.into_iter().collect()
}

/// `dfa(l)` for every label: the production's language without the words
/// consisting of a single non-terminal.
pub fn production_dfas(defn: &LanguageDefinition) -> BTreeMap<String, Dfa> {
    let alphabet = rhs_alphabet(defn);
    let nts: Vec<RhsSymbol> = defn
        .nonterminals()
        .into_iter()
        .map(RhsSymbol::NonTerminal)
        .collect();
    defn.productions
        .iter()
        .map(|p| {
            (
                p.label.clone(),
                regex_to_dfa(&p.rhs, &alphabet).without_single_symbols(&nts),
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateInfo {
    Start,
    Final,
    Production { label: String, dfa_state: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StackInfo {
    /// `(p, q, w)`: return to `q`, the target of the non-terminal edge leaving
    /// `p`, after the unit chain `w`.
    Frame {
        from: usize,
        to: usize,
        chain: Vec<String>,
    },
    /// The extra bracket pair of `A'_[]`.
    Gamma,
}

/// `A_[]` or `A'_[]` together with the meaning of its states and stack symbols.
#[derive(Clone, Debug)]
pub struct StaticAutomaton {
    pub vpda: Vpda,
    pub states: Vec<StateInfo>,
    pub stacks: Vec<StackInfo>,
    open: usize,
    close: usize,
}

impl StaticAutomaton {
    pub fn open_letter(&self) -> usize {
        self.open
    }

    pub fn close_letter(&self) -> usize {
        self.close
    }

    /// Reads bracket notation such as `[[z]s]`: `[` and `]` are the
    /// encoding brackets, anything else is a sequence of terminal names.
    pub fn word(&self, notation: &str) -> Option<Vec<usize>> {
        let mut names: Vec<(String, usize)> = (0..self.vpda.alphabet.len())
            .filter(|&a| self.vpda.alphabet.kind(a) == Kind::Internal)
            .map(|a| (self.vpda.alphabet.token(a).terminal.clone(), a))
            .collect();
        names.sort_by_key(|(n, _)| std::cmp::Reverse(n.len()));
        let mut out = Vec::new();
        let mut rest = notation.trim_start();
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix('[') {
                out.push(self.open);
                rest = r;
            } else if let Some(r) = rest.strip_prefix(']') {
                out.push(self.close);
                rest = r;
            } else {
                let (n, a) = names.iter().find(|(n, _)| rest.starts_with(n.as_str()))?;
                out.push(*a);
                rest = &rest[n.len()..];
            }
            rest = rest.trim_start();
        }
        Some(out)
    }

    pub fn accepts_notation(&self, notation: &str) -> bool {
        self.word(notation)
            .is_some_and(|w| self.vpda.accepts_symbols(&w))
    }

    /// The word of a canonical encoding, `None` when it has required brackets.
    pub fn encoding_word(&self, enc: &LinearEncoding) -> Option<Vec<usize>> {
        use crate::encoding::EncSym;
        enc.symbols
            .iter()
            .map(|s| match s {
                EncSym::OptOpen => Some(self.open),
                EncSym::OptClose => Some(self.close),
                EncSym::Leaf(t) => self.vpda.alphabet.index_of(&static_token(&t.terminal)),
                EncSym::ReqOpen | EncSym::ReqClose => None,
            })
            .collect()
    }

    /// Drops every step that pushes or pops the extra bracket symbol.
    pub fn normal_run(&self, run: &[Step]) -> Vec<Step> {
        run.iter()
            .filter(|s| !s.stack.is_some_and(|g| self.stacks[g] == StackInfo::Gamma))
            .copied()
            .collect()
    }

    /// The tree of a successful run. Runs using the extra bracket symbol must
    /// be normalized first.
    pub fn run_to_tree(&self, run: &[Step]) -> Option<ParseTree> {
        let (t, next) = self.node_at(run, 0)?;
        (next == run.len()).then_some(t)
    }

    fn node_at(&self, run: &[Step], i: usize) -> Option<(ParseTree, usize)> {
        let call = run.get(i)?;
        let g = call.stack?;
        let StackInfo::Frame { chain, .. } = &self.stacks[g] else {
            return None;
        };
        let StateInfo::Production { label, .. } = &self.states[call.to] else {
            return None;
        };
        let mut children = Vec::new();
        let mut j = i + 1;
        loop {
            let s = run.get(j)?;
            match self.vpda.alphabet.kind(s.letter) {
                Kind::Internal => {
                    let tok = self.vpda.alphabet.token(s.letter);
                    children.push(ParseTree::Leaf(tok.clone()));
                    j += 1;
                }
                Kind::Call => {
                    let (t, next) = self.node_at(run, j)?;
                    children.push(t);
                    j = next;
                }
                Kind::Return => {
                    if s.stack != Some(g) {
                        return None;
                    }
                    j += 1;
                    break;
                }
            }
        }
        let mut t = ParseTree::node(label.clone(), children);
        for l in chain.iter().rev() {
            t = ParseTree::node(l.clone(), vec![t]);
        }
        Some((t, j))
    }

    /// The unique run accepting `word`, if there is exactly one.
    pub fn unique_run(&self, word: &[usize]) -> Option<Vec<Step>> {
        let mut runs = self.vpda.accepting_runs(word);
        (runs.len() == 1).then(|| runs.pop().expect("one run"))
    }
}

/// Leaves in statically built trees are spelled as their terminal name.
fn static_token(terminal: &str) -> Token {
    Token::new(terminal, terminal)
}

fn static_alphabet(defn: &LanguageDefinition) -> Alphabet {
    let tokens: Vec<Token> = rhs_alphabet(defn)
        .into_iter()
        .filter_map(|s| match s {
            RhsSymbol::Terminal(t) if t != defn.grouping.open && t != defn.grouping.close => {
                Some(static_token(&t))
            }
            _ => None,
        })
        .collect();
    Alphabet::for_definition(defn, &tokens)
}

/// `A_[]`. Marks are ignored; strip them first when they matter.
pub fn build_a_opt(defn: &LanguageDefinition) -> Result<StaticAutomaton> {
    if defn.uses_grouping_terminals() {
        return Err(Error::PreconditionViolation(
            "productions use the grouping parentheses as terminals".into(),
        ));
    }
    let rel = unit_relation(defn)?;
    let dfas = production_dfas(defn);
    let alphabet = static_alphabet(defn);
    let open = alphabet
        .index_of(&static_token(&defn.grouping.open))
        .expect("grouping letter");
    let close = alphabet
        .index_of(&static_token(&defn.grouping.close))
        .expect("grouping letter");

    let mut states = vec![StateInfo::Start, StateInfo::Final];
    let mut ids: HashMap<(&str, usize), usize> = HashMap::new();
    for p in &defn.productions {
        let d = &dfas[&p.label];
        let dead = d.dead_states();
        for q in 0..d.len() {
            if !dead[q] {
                ids.insert((p.label.as_str(), q), states.len());
                states.push(StateInfo::Production {
                    label: p.label.clone(),
                    dfa_state: q,
                });
            }
        }
    }
    let mut v = Vpda::new(alphabet.clone(), states.len(), 0);
    v.accepting[1] = true;
    v.state_names = states
        .iter()
        .map(|s| match s {
            StateInfo::Start => "s".to_string(),
            StateInfo::Final => "f".to_string(),
            StateInfo::Production { label, dfa_state } => format!("{label}.{dfa_state}"),
        })
        .collect();

    // Non-terminal edges p -N-> q, including s -S-> f.
    let mut nt_edges: Vec<(usize, String, usize)> = vec![(0, defn.start.clone(), 1)];
    for p in &defn.productions {
        let d = &dfas[&p.label];
        for (i, sym) in d.alphabet.iter().enumerate() {
            for q in 0..d.len() {
                let (Some(&from), Some(&to)) = (
                    ids.get(&(p.label.as_str(), q)),
                    ids.get(&(p.label.as_str(), d.delta[q][i])),
                ) else {
                    continue;
                };
                match sym {
                    RhsSymbol::Terminal(t) => {
                        if let Some(a) = alphabet.index_of(&static_token(t)) {
                            if alphabet.kind(a) == Kind::Internal {
                                v.add_internal(from, a, to);
                            }
                        }
                    }
                    RhsSymbol::NonTerminal(n) => nt_edges.push((from, n.clone(), to)),
                }
            }
        }
    }

    let entry = |label: &str| ids.get(&(label, dfas[label].initial)).copied();
    let finals = |label: &str| -> Vec<usize> {
        let d = &dfas[label];
        (0..d.len())
            .filter(|&q| d.accepting[q])
            .filter_map(|q| ids.get(&(label, q)).copied())
            .collect()
    };
    let mut stacks = Vec::new();
    let mut stack_ids: HashMap<(usize, usize, Vec<String>), usize> = HashMap::new();
    for (p, n, q) in &nt_edges {
        for (_, w, n2) in rel.from(n) {
            let key = (*p, *q, w.clone());
            let g = *stack_ids.entry(key).or_insert_with(|| {
                stacks.push(StackInfo::Frame {
                    from: *p,
                    to: *q,
                    chain: w.clone(),
                });
                stacks.len() - 1
            });
            for l in defn.productions_of(n2) {
                if let Some(e) = entry(&l.label) {
                    v.add_call(*p, open, e, g);
                }
                for qf in finals(&l.label) {
                    v.add_return(qf, close, g, *q);
                }
            }
        }
    }
    v.stack_symbols = stacks.len();
    v.stack_names = stacks
        .iter()
        .map(|s| match s {
            StackInfo::Frame { from, to, chain } => {
                format!(
                    "({},{},{})",
                    v.state_names[*from],
                    v.state_names[*to],
                    if chain.is_empty() {
                        "ε".to_string()
                    } else {
                        chain.join("")
                    }
                )
            }
            StackInfo::Gamma => "γ".to_string(),
        })
        .collect();
    v.normalize();
    Ok(StaticAutomaton {
        vpda: v,
        states,
        stacks,
        open,
        close,
    })
}

/// `A'_[]`: `A_[]` with a bracket pair that can open and close at any state.
pub fn build_a_opt_prime(defn: &LanguageDefinition) -> Result<StaticAutomaton> {
    let mut a = build_a_opt(defn)?;
    let gamma = a.stacks.len();
    a.stacks.push(StackInfo::Gamma);
    a.vpda.stack_names.push("γ".into());
    for p in 0..a.vpda.states {
        a.vpda.add_call(p, a.open, p, gamma);
        a.vpda.add_return(p, a.close, gamma, p);
    }
    a.vpda.normalize();
    Ok(a)
}

/// Two trees where every word of `subsumed` is also a word of `subsuming`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessPair {
    pub subsumed: ParseTree,
    pub subsuming: ParseTree,
    pub subsumed_encoding: LinearEncoding,
    pub subsuming_encoding: LinearEncoding,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Trees(WitnessPair),
    /// Non-terminals on a unit cycle; every word using them has infinitely many trees.
    UnitCycle(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StaticOutcome {
    Resolvable,
    Unresolvable(Box<Evidence>),
    ConservativeUnknown {
        reason: String,
        candidate: Option<Box<WitnessPair>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticVerdict {
    pub outcome: StaticOutcome,
    pub subclass: Subclass,
}

impl StaticVerdict {
    pub fn is_resolvable(&self) -> bool {
        self.outcome == StaticOutcome::Resolvable
    }

    pub fn is_unresolvable(&self) -> bool {
        matches!(self.outcome, StaticOutcome::Unresolvable(_))
    }

    pub fn witness(&self) -> Option<&WitnessPair> {
        match &self.outcome {
            StaticOutcome::Unresolvable(e) => match e.as_ref() {
                Evidence::Trees(w) => Some(w),
                Evidence::UnitCycle(_) => None,
            },
            StaticOutcome::ConservativeUnknown { candidate, .. } => candidate.as_deref(),
            StaticOutcome::Resolvable => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let pair = |w: &WitnessPair| {
            json!({
                "subsumed": w.subsumed.render(),
                "subsuming": w.subsuming.render(),
                "encodings": [w.subsumed_encoding.to_string(), w.subsuming_encoding.to_string()],
            })
        };
        let (outcome, detail) = match &self.outcome {
            StaticOutcome::Resolvable => ("resolvable", Value::Null),
            StaticOutcome::Unresolvable(e) => match e.as_ref() {
                Evidence::Trees(w) => ("unresolvable", pair(w)),
                Evidence::UnitCycle(n) => ("unresolvable", json!({ "unit_cycle": n })),
            },
            StaticOutcome::ConservativeUnknown { reason, candidate } => (
                "unknown",
                json!({ "reason": reason, "candidate": candidate.as_deref().map(pair) }),
            ),
        };
        json!({ "subclass": self.subclass.name(), "outcome": outcome, "witness": detail })
    }
}

/// Searches the trimmed product of `A_[]` and `A'_[]` for a run that leaves
/// the diagonal; `None` means the language is resolvably ambiguous.
pub fn find_subsumption(defn: &LanguageDefinition) -> Result<Option<WitnessPair>> {
    let a = build_a_opt(defn)?;
    let a2 = build_a_opt_prime(defn)?;
    let (prod, pairs, stack_pairs) = product_with_states(&a.vpda, &a2.vpda)?;
    let (trimmed, map) = prod.trim_with_map();
    let mut back = vec![0; trimmed.states];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            back[*n] = old;
        }
    }
    let off_state: Vec<bool> = back.iter().map(|&o| pairs[o].0 != pairs[o].1).collect();
    // The second component numbers A's stack symbols identically, plus γ.
    let off_stack = |g: usize| stack_pairs[g].0 != stack_pairs[g].1;
    let found =
        off_state.iter().any(|&x| x) || trimmed.calls.iter().any(|&(_, _, _, g)| off_stack(g));
    if !found {
        return Ok(None);
    }

    // Same automaton, with a flag recording that the run left the diagonal.
    let n = trimmed.states;
    let flagged_state = |q: usize, f: bool| 2 * q + f as usize;
    let mut f = Vpda::new(
        trimmed.alphabet.clone(),
        2 * n,
        flagged_state(trimmed.initial, off_state[trimmed.initial]),
    );
    for q in 0..n {
        f.accepting[flagged_state(q, true)] = trimmed.accepting[q];
    }
    for flag in [false, true] {
        for &(p, x, q) in &trimmed.internals {
            f.add_internal(
                flagged_state(p, flag),
                x,
                flagged_state(q, flag || off_state[q]),
            );
        }
        for &(p, x, q, g) in &trimmed.calls {
            f.add_call(
                flagged_state(p, flag),
                x,
                flagged_state(q, flag || off_state[q] || off_stack(g)),
                g,
            );
        }
        for &(p, x, g, q) in &trimmed.returns {
            f.add_return(
                flagged_state(p, flag),
                x,
                g,
                flagged_state(q, flag || off_state[q]),
            );
        }
    }
    f.stack_symbols = trimmed.stack_symbols;
    let (_, run) = f
        .shortest_run()
        .ok_or_else(|| Error::Invalid("off-diagonal state without a run".into()))?;
    let project = |second: bool| -> Vec<Step> {
        run.iter()
            .map(|s| {
                let pick = |p: (usize, usize)| if second { p.1 } else { p.0 };
                Step {
                    from: pick(pairs[back[s.from / 2]]),
                    letter: s.letter,
                    to: pick(pairs[back[s.to / 2]]),
                    stack: s.stack.map(|g| pick(stack_pairs[g])),
                }
            })
            .collect()
    };
    let run_a = project(false);
    let run_a2 = a2.normal_run(&project(true));
    let subsuming = a
        .run_to_tree(&run_a)
        .ok_or_else(|| Error::Invalid("malformed run of A_[]".into()))?;
    let subsumed = a
        .run_to_tree(&run_a2)
        .ok_or_else(|| Error::Invalid("malformed normalized run of A'_[]".into()))?;
    Ok(Some(WitnessPair {
        subsumed_encoding: encode(defn, &subsumed)?,
        subsuming_encoding: encode(defn, &subsuming)?,
        subsumed,
        subsuming,
    }))
}

/// Decides resolvability for marks- and parenthesis-free definitions, and
/// gives a sound answer for definitions with marks.
pub fn check_static(defn: &LanguageDefinition) -> Result<StaticVerdict> {
    let subclass = classify(defn);
    let verdict = |outcome| Ok(StaticVerdict { outcome, subclass });
    match subclass {
        Subclass::Unsupported => verdict(StaticOutcome::ConservativeUnknown {
            reason: "productions use grouping parentheses or a non-terminal cannot be grouped"
                .into(),
            candidate: None,
        }),
        Subclass::NoMarksNoParens => {
            let cycles = defn.check_unit_cycles();
            if !cycles.is_empty() {
                return verdict(StaticOutcome::Unresolvable(Box::new(Evidence::UnitCycle(
                    cycles.into_iter().collect(),
                ))));
            }
            match find_subsumption(defn)? {
                None => verdict(StaticOutcome::Resolvable),
                Some(w) => verdict(StaticOutcome::Unresolvable(Box::new(Evidence::Trees(w)))),
            }
        }
        Subclass::MarksOnly => {
            let cycles = defn.check_unit_cycles();
            if !cycles.is_empty() {
                return verdict(StaticOutcome::Unresolvable(Box::new(Evidence::UnitCycle(
                    cycles.into_iter().collect(),
                ))));
            }
            let stripped = defn.without_marks();
            if !stripped.check_unit_cycles().is_empty() {
                return verdict(StaticOutcome::ConservativeUnknown {
                    reason: "unit cycle once marks are removed".into(),
                    candidate: None,
                });
            }
            match find_subsumption(&stripped)? {
                None => verdict(StaticOutcome::Resolvable),
                Some(w) => {
                    if confirmed_dynamically(defn, &w)? {
                        let pair = WitnessPair {
                            subsumed_encoding: encode(defn, &w.subsumed)?,
                            subsuming_encoding: encode(defn, &w.subsuming)?,
                            ..w
                        };
                        verdict(StaticOutcome::Unresolvable(Box::new(Evidence::Trees(pair))))
                    } else {
                        verdict(StaticOutcome::ConservativeUnknown {
                            reason: "the unmarked language is unresolvable; the marks may remove the ambiguity".into(),
                            candidate: Some(Box::new(w)),
                        })
                    }
                }
            }
        }
    }
}

/// Whether the subsumed tree is still a tree of the marked language and
/// dynamic analysis of its bare word finds it unresolvable.
fn confirmed_dynamically(defn: &LanguageDefinition, w: &WitnessPair) -> Result<bool> {
    if w.subsumed.check(defn, true).is_err() || w.subsuming.check(defn, true).is_err() {
        return Ok(false);
    }
    let parser = Parser::new(defn)?;
    let trees = match parser.trees(&w.subsumed.tokens()) {
        Ok(t) => t,
        Err(Error::TooManyTrees { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    if trees.len() < 2 || !trees.contains(&w.subsumed) {
        return Ok(false);
    }
    let report = analyze_trees(&parser, &trees, &DynamicOptions::default())?;
    Ok(report.unresolvable.contains(&w.subsumed))
}
