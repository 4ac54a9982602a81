//! The `check`, `parse` and `analyze` commands. Every command produces a list
//! of [`Diagnostic`] records; text output is rendered from those records, so
//! the JSON and text forms carry the same information.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser as ClapParser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl;
use crate::dynamic::{analyze_trees, DynamicOptions, DynamicReport};
use crate::error::Error;
use crate::grammar::{self, LanguageDefinition};
use crate::lexer::{line_col, Span};
use crate::parser::Parser;
use crate::static_analysis::{
    check_static, classify, Evidence, StaticOutcome, Subclass, WitnessPair,
};
use crate::tree::{child_slots, ParseTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

/// `file:line:start-end`, columns 1-based with an exclusive end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Location {
    pub fn of(file: &str, source: &str, span: Span) -> Location {
        let (line, start_col) = line_col(source, span.start);
        let (end_line, end_col) = line_col(source, span.end);
        Location {
            file: file.to_string(),
            line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn render(&self) -> String {
        if self.end_line == self.line {
            format!(
                "{}:{}:{}-{}",
                self.file, self.line, self.start_col, self.end_col
            )
        } else {
            format!(
                "{}:{}:{}-{}:{}",
                self.file, self.line, self.start_col, self.end_line, self.end_col
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildSite {
    pub label: String,
    pub location: Option<Location>,
}

/// An unresolvable tree, summarized by its root and non-leaf children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub label: String,
    pub tree: String,
    pub children: Vec<ChildSite>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub key: String,
    pub verdict: String,
    pub occurrences: Vec<Location>,
    pub suggestions: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub files: usize,
    pub clean: usize,
    pub resolvable: usize,
    pub unresolvable: usize,
    pub inconclusive: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Message,
    Tree {
        tree: String,
    },
    Ambiguity {
        alternatives: Vec<String>,
    },
    Unresolvable {
        resolvable: Vec<String>,
        unresolvable: Vec<TreeSummary>,
    },
    Inconclusive {
        resolvable: Vec<String>,
        inconclusive: Vec<String>,
    },
    Static {
        subclass: String,
        outcome: String,
        subsumed: Option<String>,
        subsuming: Option<String>,
        encodings: Vec<String>,
    },
    Summary {
        counts: Counts,
        sites: Vec<Site>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub spans: Vec<Location>,
    pub payload: Payload,
}

impl Diagnostic {
    fn message(
        severity: Severity,
        code: &str,
        message: impl Into<String>,
        spans: Vec<Location>,
    ) -> Diagnostic {
        Diagnostic {
            severity,
            code: code.into(),
            message: message.into(),
            spans,
            payload: Payload::Message,
        }
    }

    /// Human-readable form, one or more newline-terminated lines.
    pub fn render(&self) -> String {
        let mut s = String::new();
        match &self.payload {
            Payload::Message => {
                let prefix = match self.severity {
                    Severity::Error => "error: ",
                    Severity::Warning => "warning: ",
                    Severity::Info => "",
                };
                s.push_str(prefix);
                if let Some(l) = self.spans.first() {
                    let _ = write!(s, "{}: ", l.render());
                }
                let _ = writeln!(s, "{}", self.message);
            }
            Payload::Tree { tree } => {
                let _ = writeln!(s, "{tree}");
            }
            Payload::Ambiguity { alternatives } => {
                let _ = writeln!(
                    s,
                    "Ambiguity error with {} alternatives:",
                    alternatives.len()
                );
                for a in alternatives {
                    let _ = writeln!(s, "  {a}");
                }
            }
            Payload::Unresolvable {
                resolvable,
                unresolvable,
            } => {
                let _ = writeln!(
                    s,
                    "Unresolvable ambiguity error with {} alternatives.",
                    resolvable.len()
                );
                if !resolvable.is_empty() {
                    s.push_str("Resolvable alternatives:\n");
                    for a in resolvable {
                        let _ = writeln!(s, "  {a}");
                    }
                }
                s.push_str("Unresolvable alternatives:\n");
                for t in unresolvable {
                    let _ = writeln!(s, "  {}", t.label);
                    for c in &t.children {
                        let loc = c
                            .location
                            .as_ref()
                            .map(Location::render)
                            .unwrap_or_default();
                        let _ = writeln!(s, "   - {:<11}{loc}", c.label);
                    }
                }
            }
            Payload::Inconclusive {
                resolvable,
                inconclusive,
            } => {
                let _ = writeln!(
                    s,
                    "Inconclusive ambiguity with {} alternatives (budget exhausted).",
                    resolvable.len() + inconclusive.len()
                );
                if !resolvable.is_empty() {
                    s.push_str("Resolvable alternatives:\n");
                    for a in resolvable {
                        let _ = writeln!(s, "  {a}");
                    }
                }
                s.push_str("Undecided alternatives:\n");
                for t in inconclusive {
                    let _ = writeln!(s, "  {t}");
                }
            }
            Payload::Static {
                subclass,
                subsumed,
                subsuming,
                encodings,
                ..
            } => {
                let _ = writeln!(s, "{} ({subclass})", self.message);
                if let (Some(a), Some(b)) = (subsumed, subsuming) {
                    let _ = writeln!(s, "  every word of     {a}");
                    let _ = writeln!(s, "  is also a word of {b}");
                    if let [x, y] = encodings.as_slice() {
                        let _ = writeln!(s, "  encodings: {x} and {y}");
                    }
                }
            }
            Payload::Summary { counts, sites } => {
                let _ = writeln!(s, "files: {}", counts.files);
                let _ = writeln!(s, "clean: {}", counts.clean);
                let _ = writeln!(s, "resolvable: {}", counts.resolvable);
                let _ = writeln!(s, "unresolvable: {}", counts.unresolvable);
                let _ = writeln!(s, "inconclusive: {}", counts.inconclusive);
                let _ = writeln!(s, "errors: {}", counts.errors);
                let _ = writeln!(s, "distinct ambiguity sites: {}", sites.len());
                for site in sites {
                    let _ = writeln!(
                        s,
                        "site {} ({}, {} occurrences)",
                        site.key,
                        site.verdict,
                        site.occurrences.len()
                    );
                    for l in &site.occurrences {
                        let _ = writeln!(s, "  {}", l.render());
                    }
                    for f in &site.suggestions {
                        let _ = writeln!(s, "  suggestion: {f}");
                    }
                }
            }
        }
        s
    }
}

/// Result of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub diagnostics: Vec<Diagnostic>,
    pub exit: i32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl CommandOutput {
    pub fn text(&self) -> String {
        render_text(&self.diagnostics)
    }

    /// One JSON record per line.
    pub fn json(&self) -> String {
        self.diagnostics
            .iter()
            .map(|d| serde_json::to_string(d).expect("serializable") + "\n")
            .collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Json => self.json(),
        }
    }
}

pub fn render_text(diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(Diagnostic::render).collect()
}

/// Reads records written by [`CommandOutput::json`].
pub fn parse_records(json_lines: &str) -> serde_json::Result<Vec<Diagnostic>> {
    json_lines
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub budget: Option<Duration>,
    /// Treat an unknown static verdict as success in `check`.
    pub allow_unknown: bool,
}

fn fail(code: &str, message: impl Into<String>) -> CommandOutput {
    CommandOutput {
        diagnostics: vec![Diagnostic::message(
            Severity::Error,
            code,
            message,
            Vec::new(),
        )],
        exit: 1,
    }
}

/// Elaborates `.syn` sources given as `(name, text)`.
pub fn load_grammar(sources: &[(String, String)]) -> Result<LanguageDefinition, CommandOutput> {
    dsl::load(sources).map_err(|e| fail("grammar", e.to_string()))
}

pub fn cmd_check(sources: &[(String, String)], opts: &Options) -> CommandOutput {
    let defn = match load_grammar(sources) {
        Ok(d) => d,
        Err(out) => return out,
    };
    check_definition(&defn, opts)
}

pub fn check_definition(defn: &LanguageDefinition, opts: &Options) -> CommandOutput {
    let mut diags = Vec::new();
    let mut failed = false;
    for issue in defn.validate() {
        let sev = match issue.severity {
            grammar::Severity::Error => {
                failed = true;
                Severity::Error
            }
            grammar::Severity::Warning => Severity::Warning,
            grammar::Severity::Info => Severity::Info,
        };
        diags.push(Diagnostic::message(
            sev,
            &issue.code,
            issue.message,
            Vec::new(),
        ));
    }
    if failed {
        return CommandOutput {
            diagnostics: diags,
            exit: 1,
        };
    }
    if !defn.check_balanced() {
        diags.push(Diagnostic::message(
            Severity::Error,
            "unbalanced",
            "some production derives unbalanced grouping parentheses",
            Vec::new(),
        ));
        return CommandOutput {
            diagnostics: diags,
            exit: 1,
        };
    }
    let cycles = defn.check_unit_cycles();
    if !cycles.is_empty() {
        let names: Vec<String> = cycles.into_iter().collect();
        diags.push(Diagnostic::message(
            Severity::Error,
            "unit-cycle",
            format!(
                "infinitely ambiguous (unit cycle through {})",
                names.join(", ")
            ),
            Vec::new(),
        ));
        return CommandOutput {
            diagnostics: diags,
            exit: 1,
        };
    }
    let subclass = classify(defn);
    let verdict = match check_static(defn) {
        Ok(v) => v,
        Err(e) => {
            diags.push(Diagnostic::message(
                Severity::Error,
                "static",
                e.to_string(),
                Vec::new(),
            ));
            return CommandOutput {
                diagnostics: diags,
                exit: 1,
            };
        }
    };
    let pair = |w: Option<&WitnessPair>| match w {
        Some(w) => (
            Some(w.subsumed.render()),
            Some(w.subsuming.render()),
            vec![
                w.subsumed_encoding.to_string(),
                w.subsuming_encoding.to_string(),
            ],
        ),
        None => (None, None, Vec::new()),
    };
    let (severity, code, message, outcome, exit) = match &verdict.outcome {
        StaticOutcome::Resolvable => (
            Severity::Info,
            "resolvable",
            "statically resolvable".to_string(),
            "resolvable",
            0,
        ),
        StaticOutcome::Unresolvable(e) => {
            let msg = match e.as_ref() {
                Evidence::UnitCycle(n) => {
                    format!("infinitely ambiguous (unit cycle through {})", n.join(", "))
                }
                Evidence::Trees(_) => "unresolvable".to_string(),
            };
            (Severity::Error, "unresolvable", msg, "unresolvable", 1)
        }
        StaticOutcome::ConservativeUnknown { reason, .. } => {
            let mut msg = format!("resolvability unknown: {reason}");
            if subclass == Subclass::Unsupported {
                msg.push_str("; run `parse` or `analyze` on programs instead");
            }
            (
                Severity::Warning,
                "unknown",
                msg,
                "unknown",
                if opts.allow_unknown { 0 } else { 1 },
            )
        }
    };
    let (subsumed, subsuming, encodings) = pair(verdict.witness());
    diags.push(Diagnostic {
        severity,
        code: code.into(),
        message,
        spans: Vec::new(),
        payload: Payload::Static {
            subclass: subclass.name().into(),
            outcome: outcome.into(),
            subsumed,
            subsuming,
            encodings,
        },
    });
    CommandOutput {
        diagnostics: diags,
        exit,
    }
}

/// How one program fared.
#[derive(Clone, Debug)]
enum FileVerdict {
    Clean(ParseTree),
    Ambiguous {
        trees: Vec<ParseTree>,
        report: DynamicReport,
    },
    Error(Diagnostic),
}

fn error_at(
    file: &str,
    source: &str,
    code: &str,
    offset: Option<usize>,
    message: String,
) -> Diagnostic {
    let spans = offset
        .map(|o| vec![Location::of(file, source, Span::new(o, o + 1))])
        .unwrap_or_default();
    Diagnostic::message(Severity::Error, code, message, spans)
}

fn judge(parser: &Parser, file: &str, source: &str, opts: &Options) -> FileVerdict {
    let tokens = match parser.tokenize(source) {
        Ok(t) => t,
        Err(Error::Lex(e)) => {
            let c = source[e.offset..].chars().next().unwrap_or(' ');
            return FileVerdict::Error(error_at(
                file,
                source,
                "lex",
                Some(e.offset),
                format!("unexpected character `{c}`"),
            ));
        }
        Err(e) => return FileVerdict::Error(error_at(file, source, "lex", None, e.to_string())),
    };
    let result = match parser.parse_tokens(&tokens) {
        Ok(r) => r,
        Err(Error::NoParse { offset }) => {
            let msg = match offset.filter(|&o| o < source.len()) {
                Some(o) => format!(
                    "no parse: unexpected `{}`",
                    tokens
                        .iter()
                        .find(|t| t.span.is_some_and(|s| s.start == o))
                        .map_or("", |t| t.lexeme.as_str())
                ),
                None => "no parse: unexpected end of input".to_string(),
            };
            return FileVerdict::Error(error_at(file, source, "parse", offset, msg));
        }
        Err(e) => return FileVerdict::Error(error_at(file, source, "parse", None, e.to_string())),
    };
    if result.trees.len() == 1 {
        return FileVerdict::Clean(result.trees.into_iter().next().expect("one tree"));
    }
    match analyze_trees(
        parser,
        &result.trees,
        &DynamicOptions {
            budget: opts.budget,
        },
    ) {
        Ok(report) => FileVerdict::Ambiguous {
            trees: result.trees,
            report,
        },
        Err(e) => FileVerdict::Error(error_at(file, source, "analysis", None, e.to_string())),
    }
}

fn summarize(t: &ParseTree, file: &str, source: &str) -> TreeSummary {
    TreeSummary {
        label: t.label().unwrap_or_default().to_string(),
        tree: t.render(),
        children: t
            .children()
            .into_iter()
            .filter(|c| !c.is_leaf())
            .map(|c| ChildSite {
                label: c.label().unwrap_or_default().to_string(),
                location: c.span().map(|s| Location::of(file, source, s)),
            })
            .collect(),
    }
}

fn ambiguity_diagnostic(report: &DynamicReport, file: &str, source: &str) -> (Diagnostic, i32) {
    let resolvable: Vec<String> = report.resolved.iter().map(|w| w.render()).collect();
    let spans: Vec<Location> = report
        .unresolvable
        .iter()
        .chain(&report.inconclusive)
        .chain(report.resolved.iter().map(|w| &w.tree))
        .filter_map(|t| t.span())
        .reduce(Span::join)
        .map(|s| vec![Location::of(file, source, s)])
        .unwrap_or_default();
    if !report.unresolvable.is_empty() {
        let unresolvable = report
            .unresolvable
            .iter()
            .map(|t| summarize(t, file, source))
            .collect();
        let d = Diagnostic {
            severity: Severity::Error,
            code: "unresolvable-ambiguity".into(),
            message: "unresolvable ambiguity".into(),
            spans,
            payload: Payload::Unresolvable {
                resolvable,
                unresolvable,
            },
        };
        (d, 2)
    } else if !report.inconclusive.is_empty() {
        let d = Diagnostic {
            severity: Severity::Error,
            code: "inconclusive-ambiguity".into(),
            message: "ambiguity analysis ran out of budget".into(),
            spans,
            payload: Payload::Inconclusive {
                resolvable,
                inconclusive: report.inconclusive.iter().map(ParseTree::render).collect(),
            },
        };
        (d, 1)
    } else {
        let d = Diagnostic {
            severity: Severity::Error,
            code: "ambiguity".into(),
            message: "ambiguity".into(),
            spans,
            payload: Payload::Ambiguity {
                alternatives: resolvable,
            },
        };
        (d, 1)
    }
}

/// Parses one program; `file` names it in locations.
pub fn cmd_parse(
    sources: &[(String, String)],
    file: &str,
    program: &str,
    opts: &Options,
) -> CommandOutput {
    let defn = match load_grammar(sources) {
        Ok(d) => d,
        Err(out) => return out,
    };
    parse_with(&defn, file, program, opts)
}

pub fn parse_with(
    defn: &LanguageDefinition,
    file: &str,
    program: &str,
    opts: &Options,
) -> CommandOutput {
    let parser = match Parser::new(defn) {
        Ok(p) => p,
        Err(e) => return fail("grammar", e.to_string()),
    };
    match judge(&parser, file, program, opts) {
        FileVerdict::Clean(t) => CommandOutput {
            diagnostics: vec![Diagnostic {
                severity: Severity::Info,
                code: "parse".into(),
                message: "unambiguous".into(),
                spans: Vec::new(),
                payload: Payload::Tree { tree: t.render() },
            }],
            exit: 0,
        },
        FileVerdict::Ambiguous { report, .. } => {
            let (d, exit) = ambiguity_diagnostic(&report, file, program);
            CommandOutput {
                diagnostics: vec![d],
                exit,
            }
        }
        FileVerdict::Error(d) => CommandOutput {
            diagnostics: vec![d],
            exit: 1,
        },
    }
}

/// The subtrees where the alternatives stop agreeing: descend while every
/// tree has the same label and exactly one child position differs.
fn divergence(trees: &[ParseTree]) -> Vec<&ParseTree> {
    let mut cur: Vec<&ParseTree> = trees.iter().collect();
    loop {
        let first = cur[0];
        let same_shape = cur.iter().all(|t| {
            t.label() == first.label()
                && t.children().len() == first.children().len()
                && t.children()
                    .iter()
                    .zip(first.children())
                    .all(|(a, b)| a.tokens().len() == b.tokens().len())
        });
        if !same_shape || first.is_leaf() {
            return cur;
        }
        let n = first.children().len();
        let differing: Vec<usize> = (0..n)
            .filter(|&i| cur.iter().any(|t| t.children()[i] != first.children()[i]))
            .collect();
        match differing.as_slice() {
            [i] => cur = cur.iter().map(|t| t.children()[*i]).collect(),
            _ => return cur,
        }
    }
}

fn labels(t: &ParseTree, out: &mut BTreeMap<String, usize>) {
    if let Some(l) = t.label() {
        if !t.is_leaf() {
            *out.entry(l.to_string()).or_default() += 1;
        }
    }
    for c in t.children() {
        labels(c, out);
    }
}

/// Labels of `t` beyond those every alternative has.
fn extra_labels(t: &ParseTree, common: &BTreeMap<String, usize>) -> BTreeSet<String> {
    let mut m = BTreeMap::new();
    labels(t, &mut m);
    m.into_iter()
        .filter(|(l, n)| common.get(l).map_or(true, |c| n > c))
        .map(|(l, _)| l)
        .collect()
}

fn common_labels(sites: &[&ParseTree]) -> BTreeMap<String, usize> {
    let mut common: Option<BTreeMap<String, usize>> = None;
    for t in sites {
        let mut m = BTreeMap::new();
        labels(t, &mut m);
        common = Some(match common {
            None => m,
            Some(c) => c
                .into_iter()
                .filter_map(|(l, n)| m.get(&l).map(|k| (l, n.min(*k))))
                .collect(),
        });
    }
    common.unwrap_or_default()
}

/// Deduplication key: for each alternative at the divergence site, its root
/// label and the labels only it uses, sorted.
fn site_key(sites: &[&ParseTree]) -> String {
    let common = common_labels(sites);
    let mut parts: Vec<String> = sites
        .iter()
        .map(|t| {
            let extra = extra_labels(t, &common);
            let root = t.label().unwrap_or("?");
            if extra.is_empty() {
                root.to_string()
            } else {
                format!(
                    "{root}[{}]",
                    extra.into_iter().collect::<Vec<_>>().join(",")
                )
            }
        })
        .collect();
    parts.sort();
    parts.join(" / ")
}

/// `forbid parent.slot = label` for every place where a competitor uses a
/// production the unresolvable tree does not.
fn suggestions(
    defn: &LanguageDefinition,
    sites: &[&ParseTree],
    unresolvable: &[ParseTree],
) -> BTreeSet<String> {
    let common = common_labels(sites);
    let mut out = BTreeSet::new();
    let bad: Vec<&ParseTree> = sites
        .iter()
        .copied()
        .filter(|s| unresolvable.iter().any(|u| contains(u, s)))
        .collect();
    for s in sites {
        if bad.contains(s) {
            continue;
        }
        let extra = extra_labels(s, &common);
        fn walk(
            defn: &LanguageDefinition,
            t: &ParseTree,
            extra: &BTreeSet<String>,
            out: &mut BTreeSet<String>,
        ) {
            let slots = child_slots(defn, t);
            for (i, c) in t.children().into_iter().enumerate() {
                if let (Some(l), Some(Some(slot))) = (c.label(), slots.get(i)) {
                    if !c.is_leaf() && extra.contains(l) {
                        out.insert(format!("forbid {}.{slot} = {l}", t.label().unwrap_or("?")));
                    }
                }
                walk(defn, c, extra, out);
            }
        }
        walk(defn, s, &extra, &mut out);
    }
    out
}

fn contains(t: &ParseTree, sub: &ParseTree) -> bool {
    t == sub || t.children().into_iter().any(|c| contains(c, sub))
}

/// Parses every file of a corpus, given as `(name, text)` pairs.
pub fn cmd_analyze(
    sources: &[(String, String)],
    corpus: &[(String, String)],
    opts: &Options,
) -> CommandOutput {
    let defn = match load_grammar(sources) {
        Ok(d) => d,
        Err(out) => return out,
    };
    analyze_with(&defn, corpus, opts)
}

pub fn analyze_with(
    defn: &LanguageDefinition,
    corpus: &[(String, String)],
    opts: &Options,
) -> CommandOutput {
    let parser = match Parser::new(defn) {
        Ok(p) => p,
        Err(e) => return fail("grammar", e.to_string()),
    };
    let mut files: Vec<&(String, String)> = corpus.iter().collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    let verdicts: Vec<FileVerdict> = files
        .par_iter()
        .map(|(n, s)| judge(&parser, n, s, opts))
        .collect();

    let mut counts = Counts {
        files: files.len(),
        ..Counts::default()
    };
    let mut diags = Vec::new();
    let mut sites: BTreeMap<String, Site> = BTreeMap::new();
    let mut exit = 0;
    for ((name, source), v) in files.iter().zip(verdicts) {
        match v {
            FileVerdict::Clean(_) => counts.clean += 1,
            FileVerdict::Error(d) => {
                counts.errors += 1;
                exit = exit.max(1);
                diags.push(d);
            }
            FileVerdict::Ambiguous { trees, report } => {
                let verdict = if !report.unresolvable.is_empty() {
                    counts.unresolvable += 1;
                    exit = 2;
                    "unresolvable"
                } else if !report.inconclusive.is_empty() {
                    counts.inconclusive += 1;
                    exit = exit.max(1);
                    "inconclusive"
                } else {
                    counts.resolvable += 1;
                    exit = exit.max(1);
                    "resolvable"
                };
                let at = divergence(&trees);
                let key = site_key(&at);
                let loc = at
                    .iter()
                    .filter_map(|t| t.span())
                    .reduce(Span::join)
                    .map(|s| Location::of(name, source, s));
                let site = sites.entry(key.clone()).or_insert_with(|| Site {
                    key,
                    verdict: verdict.into(),
                    occurrences: Vec::new(),
                    suggestions: Vec::new(),
                });
                if verdict == "unresolvable" {
                    site.verdict = verdict.into();
                    let mut s: BTreeSet<String> = site.suggestions.iter().cloned().collect();
                    s.extend(suggestions(defn, &at, &report.unresolvable));
                    site.suggestions = s.into_iter().collect();
                }
                site.occurrences.extend(loc);
            }
        }
    }
    diags.push(Diagnostic {
        severity: Severity::Info,
        code: "summary".into(),
        message: "corpus summary".into(),
        spans: Vec::new(),
        payload: Payload::Summary {
            counts,
            sites: sites.into_values().collect(),
        },
    });
    CommandOutput {
        diagnostics: diags,
        exit,
    }
}

#[derive(ClapParser, Debug)]
#[command(
    name = "resolvable",
    version,
    about = "Parse with ambiguous syntax definitions and analyse their ambiguities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Per-tree budget for dynamic analysis, in milliseconds.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check grammar files and decide resolvability statically when possible.
    Check {
        #[command(flatten)]
        common: Common,
        /// Exit successfully when the static verdict is unknown.
        #[arg(long)]
        allow_unknown: bool,
        #[arg(required = true)]
        grammars: Vec<PathBuf>,
    },
    /// Parse one program and report ambiguities.
    Parse {
        #[command(flatten)]
        common: Common,
        /// Grammar file; repeat to compose several.
        #[arg(short, long = "grammar", required = true)]
        grammars: Vec<PathBuf>,
        /// Parse this text instead of a file.
        #[arg(short, long, conflicts_with = "program")]
        expr: Option<String>,
        program: Option<PathBuf>,
    },
    /// Parse every file under a directory and summarize the ambiguities.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(short, long = "grammar", required = true)]
        grammars: Vec<PathBuf>,
        corpus: PathBuf,
    },
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<(String, String)>, CommandOutput> {
    paths
        .iter()
        .map(|p| {
            std::fs::read_to_string(p)
                .map(|s| (p.display().to_string(), s))
                .map_err(|e| fail("io", format!("{}: {e}", p.display())))
        })
        .collect()
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Runs a parsed command line, returning the output text and exit status.
pub fn execute(cli: Cli) -> (String, i32) {
    let (out, format) = match cli.command {
        Command::Check {
            common,
            allow_unknown,
            grammars,
        } => {
            let opts = Options {
                budget: common.budget.map(Duration::from_millis),
                allow_unknown,
            };
            let out = read_all(&grammars).map_or_else(|e| e, |g| cmd_check(&g, &opts));
            (out, common.format)
        }
        Command::Parse {
            common,
            grammars,
            expr,
            program,
        } => {
            let opts = Options {
                budget: common.budget.map(Duration::from_millis),
                allow_unknown: false,
            };
            let out = read_all(&grammars).map_or_else(
                |e| e,
                |g| match (expr, program) {
                    (Some(text), _) => cmd_parse(&g, "<expr>", &text, &opts),
                    (None, Some(p)) => match read_all(std::slice::from_ref(&p)) {
                        Ok(mut prog) => {
                            let (name, text) = prog.pop().expect("one file");
                            cmd_parse(&g, &name, &text, &opts)
                        }
                        Err(e) => e,
                    },
                    (None, None) => fail("usage", "give a program file or --expr"),
                },
            );
            (out, common.format)
        }
        Command::Analyze {
            common,
            grammars,
            corpus,
        } => {
            let opts = Options {
                budget: common.budget.map(Duration::from_millis),
                allow_unknown: false,
            };
            let out = read_all(&grammars).map_or_else(
                |e| e,
                |g| {
                    let mut paths = Vec::new();
                    match collect_files(&corpus, &mut paths) {
                        Ok(()) => match read_all(&paths) {
                            Ok(files) => cmd_analyze(&g, &files, &opts),
                            Err(e) => e,
                        },
                        Err(e) => fail("io", format!("{}: {e}", corpus.display())),
                    }
                },
            );
            (out, common.format)
        }
    };
    (out.render(format), out.exit)
}
