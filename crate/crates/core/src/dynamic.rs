//! Per-word resolvability: for every tree of an ambiguous word, find a
//! shortest word that parses to that tree alone, or show that none exists.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::encoding::words_automaton_over;
use crate::error::{Error, Result};
use crate::lexer::{render_word, Token};
use crate::parser::Parser;
use crate::tree::ParseTree;
use crate::vpda::{difference, Alphabet, Vpda};

#[derive(Clone, Debug, Default)]
pub struct DynamicOptions {
    /// Wall-clock budget per tree; exceeding it makes that tree inconclusive.
    pub budget: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub tree: ParseTree,
    pub word: Vec<Token>,
}

impl Witness {
    pub fn render(&self) -> String {
        render_word(&self.word)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicStats {
    /// Largest number of refinement rounds needed for a single tree.
    pub max_iterations: usize,
    pub total_iterations: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicReport {
    /// Trees with a unique word, ordered by that word.
    pub resolved: Vec<Witness>,
    pub unresolvable: Vec<ParseTree>,
    /// Trees whose analysis ran out of budget.
    pub inconclusive: Vec<ParseTree>,
    pub stats: DynamicStats,
}

impl DynamicReport {
    pub fn witness(&self, t: &ParseTree) -> Option<&Witness> {
        self.resolved.iter().find(|w| &w.tree == t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordVerdict {
    Unambiguous(ParseTree),
    Resolvable(DynamicReport),
    Unresolvable(DynamicReport),
    Inconclusive(DynamicReport),
}

enum Outcome {
    Resolved(Vec<usize>, Vec<Token>),
    Unresolvable,
    Inconclusive,
}

/// Runs the refinement loop for every tree of `trees`, which are assumed to
/// share one word.
pub fn analyze_trees(
    parser: &Parser,
    trees: &[ParseTree],
    opts: &DynamicOptions,
) -> Result<DynamicReport> {
    let defn = parser.definition();
    if !defn.check_balanced() {
        return Err(Error::PreconditionViolation(
            "productions must only derive balanced parentheses".into(),
        ));
    }
    let start = Instant::now();
    let tokens: Vec<Token> = trees.iter().flat_map(|t| t.tokens()).collect();
    let alphabet = Alphabet::for_definition(defn, &tokens);
    let automata: Vec<Vpda> = trees
        .par_iter()
        .map(|t| words_automaton_over(defn, t, &alphabet))
        .collect::<Result<_>>()?;
    let results: Vec<Result<(Outcome, usize)>> = (0..trees.len())
        .into_par_iter()
        .map(|i| analyze_one(parser, &alphabet, i, trees, &automata, opts))
        .collect();
    let mut report = DynamicReport::default();
    let mut keyed = Vec::new();
    for (t, r) in trees.iter().zip(results) {
        let (outcome, iterations) = r?;
        report.stats.max_iterations = report.stats.max_iterations.max(iterations);
        report.stats.total_iterations += iterations;
        match outcome {
            Outcome::Resolved(key, word) => keyed.push((
                key,
                Witness {
                    tree: t.clone(),
                    word,
                },
            )),
            Outcome::Unresolvable => report.unresolvable.push(t.clone()),
            Outcome::Inconclusive => report.inconclusive.push(t.clone()),
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.tree.cmp(&b.1.tree)));
    report.resolved = keyed.into_iter().map(|(_, w)| w).collect();
    report.unresolvable.sort();
    report.inconclusive.sort();
    report.stats.elapsed = start.elapsed();
    Ok(report)
}

fn analyze_one(
    parser: &Parser,
    alphabet: &Alphabet,
    i: usize,
    trees: &[ParseTree],
    automata: &[Vpda],
    opts: &DynamicOptions,
) -> Result<(Outcome, usize)> {
    let defn = parser.definition();
    let start = Instant::now();
    let t = &trees[i];
    let mut a = automata[i].clone();
    let mut known: Vec<ParseTree> = vec![t.clone()];
    let mut pending: Vec<ParseTree> = trees.iter().filter(|x| *x != t).cloned().collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        for other in pending.drain(..) {
            if known.contains(&other) {
                continue;
            }
            a = match trees.iter().position(|x| *x == other) {
                Some(j) => difference(&a, &automata[j])?,
                None => difference(&a, &words_automaton_over(defn, &other, alphabet)?)?,
            }
            .trim();
            known.push(other);
        }
        if opts.budget.is_some_and(|b| start.elapsed() > b) {
            return Ok((Outcome::Inconclusive, iterations));
        }
        let Some(w) = a.shortest_word() else {
            return Ok((Outcome::Unresolvable, iterations));
        };
        let word = alphabet.decode(&w);
        let parsed = parser.trees(&word)?;
        if parsed.len() == 1 && &parsed[0] == t {
            return Ok((Outcome::Resolved(w, word), iterations));
        }
        pending = parsed.into_iter().filter(|x| !known.contains(x)).collect();
        if pending.is_empty() {
            return Err(Error::Invalid(format!(
                "word {} was expected to parse to {}",
                render_word(&word),
                t.render()
            )));
        }
    }
}

/// Tokenizes, parses and classifies one input.
pub fn resolve_word(parser: &Parser, input: &str, opts: &DynamicOptions) -> Result<WordVerdict> {
    let tokens = parser.tokenize(input)?;
    resolve_tokens(parser, &tokens, opts)
}

pub fn resolve_tokens(
    parser: &Parser,
    tokens: &[Token],
    opts: &DynamicOptions,
) -> Result<WordVerdict> {
    let mut result = parser.parse_tokens(tokens)?;
    if result.trees.len() == 1 {
        return Ok(WordVerdict::Unambiguous(
            result.trees.pop().expect("one tree"),
        ));
    }
    let report = analyze_trees(parser, &result.trees, opts)?;
    Ok(if !report.unresolvable.is_empty() {
        WordVerdict::Unresolvable(report)
    } else if !report.inconclusive.is_empty() {
        WordVerdict::Inconclusive(report)
    } else {
        WordVerdict::Resolvable(report)
    })
}
