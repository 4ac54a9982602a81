//! The `.syn` frontend: syntax types, tokens, syncons, operators, precedence
//! and forbid declarations, elaborated into a [`LanguageDefinition`].
//!
//! ```text
//! type Exp
//! grouping "(" Exp ")"
//! precedence { mul; add; }
//! token Integer = "[0-9]+"
//! syncon literal: Exp = n:Integer
//! infix add: Exp = "+"
//! infix mul: Exp = "*"
//! forbid mul.left = add
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::grammar::{
    Grouping, LanguageDefinition, NtRef, Production, Rhs, Terminal, TokenPattern,
};
use crate::lexer::{line_col, Span};

const KEYWORDS: &[&str] = &[
    "type",
    "start",
    "token",
    "grouping",
    "syncon",
    "infix",
    "infixl",
    "infixr",
    "prefix",
    "postfix",
    "precedence",
    "forbid",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixity {
    Infix,
    InfixLeft,
    InfixRight,
    Prefix,
    Postfix,
}

impl Fixity {
    pub fn keyword(self) -> &'static str {
        match self {
            Fixity::Infix => "infix",
            Fixity::InfixLeft => "infixl",
            Fixity::InfixRight => "infixr",
            Fixity::Prefix => "prefix",
            Fixity::Postfix => "postfix",
        }
    }
}

/// Right-hand side as written: names are resolved during elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynRhs {
    Literal(String),
    /// `field:Name` or a bare `Name`.
    Ref {
        field: Option<String>,
        name: String,
    },
    Seq(Vec<SynRhs>),
    Alt(Vec<SynRhs>),
    Star(Box<SynRhs>),
    Plus(Box<SynRhs>),
    Opt(Box<SynRhs>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Type(String),
    Start(String),
    Token {
        name: String,
        pattern: String,
    },
    /// A literal token declared on its own.
    Literal(String),
    Grouping {
        open: String,
        ty: String,
        close: String,
    },
    Syncon {
        label: String,
        ty: String,
        rhs: SynRhs,
    },
    Operator {
        fixity: Fixity,
        label: String,
        ty: String,
        body: SynRhs,
    },
    /// Levels from highest to lowest; labels within a level are unordered.
    Precedence(Vec<Vec<String>>),
    Forbid {
        label: String,
        slot: String,
        forbidden: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DslFile {
    pub name: String,
    pub declarations: Vec<Declaration>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(char),
}

struct Lexed {
    toks: Vec<(Tok, Span)>,
}

fn syntax_error(file: &str, source: &str, offset: usize, msg: impl fmt::Display) -> Error {
    let (line, col) = line_col(source, offset);
    Error::Dsl(format!("{file}:{line}:{col}: {msg}"))
}

fn lex(file: &str, src: &str) -> Result<Lexed> {
    let mut toks = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (at, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && bytes.get(i + 1).is_some_and(|&(_, d)| d == '/') {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = at;
            while i < bytes.len()
                && (bytes[i].1.is_alphanumeric() || bytes[i].1 == '_' || bytes[i].1 == '\'')
            {
                i += 1;
            }
            let end = bytes.get(i).map_or(src.len(), |&(o, _)| o);
            toks.push((
                Tok::Ident(src[start..end].to_string()),
                Span::new(start, end),
            ));
        } else if c == '"' {
            let start = at;
            let mut s = String::new();
            i += 1;
            loop {
                let Some(&(_, d)) = bytes.get(i) else {
                    return Err(syntax_error(file, src, start, "unterminated string"));
                };
                i += 1;
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&(_, e)) = bytes.get(i) else {
                            return Err(syntax_error(file, src, start, "unterminated string"));
                        };
                        i += 1;
                        match e {
                            '"' | '\\' => s.push(e),
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            // Regex escapes pass through untouched.
                            other => {
                                s.push('\\');
                                s.push(other);
                            }
                        }
                    }
                    '\n' => return Err(syntax_error(file, src, start, "unterminated string")),
                    other => s.push(other),
                }
            }
            let end = bytes.get(i).map_or(src.len(), |&(o, _)| o);
            toks.push((Tok::Str(s), Span::new(start, end)));
        } else if ":={};.|*+?(),".contains(c) {
            toks.push((Tok::Punct(c), Span::new(at, at + c.len_utf8())));
            i += 1;
        } else {
            return Err(syntax_error(
                file,
                src,
                at,
                format!("unexpected character `{c}`"),
            ));
        }
    }
    Ok(Lexed { toks })
}

struct DslParser<'a> {
    file: &'a str,
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl DslParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.src.len(), |(_, s)| s.start)
    }

    fn last_end(&self) -> usize {
        self.pos.checked_sub(1).map_or(0, |p| self.toks[p].1.end)
    }

    fn error(&self, msg: impl fmt::Display) -> Error {
        syntax_error(self.file, self.src, self.offset(), msg)
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of file".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Str(s)) => format!("\"{s}\""),
            Some(Tok::Punct(c)) => format!("`{c}`"),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected a name, found {}", self.describe()))),
        }
    }

    fn string(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected a string, found {}", self.describe()))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", self.describe())))
        }
    }

    fn declaration(&mut self) -> Result<Declaration> {
        let start = self.offset();
        let kw = match self.peek() {
            Some(Tok::Ident(s)) if KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => {
                return Err(self.error(format!("expected a declaration, found {}", self.describe())))
            }
        };
        self.pos += 1;
        let kind = match kw.as_str() {
            "type" => DeclKind::Type(self.ident()?),
            "start" => DeclKind::Start(self.ident()?),
            "token" => {
                if let Some(Tok::Str(_)) = self.peek() {
                    DeclKind::Literal(self.string()?)
                } else {
                    let name = self.ident()?;
                    self.expect('=')?;
                    DeclKind::Token {
                        name,
                        pattern: self.string()?,
                    }
                }
            }
            "grouping" => {
                let open = self.string()?;
                let ty = self.ident()?;
                DeclKind::Grouping {
                    open,
                    ty,
                    close: self.string()?,
                }
            }
            "syncon" => {
                let label = self.ident()?;
                self.expect(':')?;
                let ty = self.ident()?;
                self.expect('=')?;
                DeclKind::Syncon {
                    label,
                    ty,
                    rhs: self.alt()?,
                }
            }
            "infix" | "infixl" | "infixr" | "prefix" | "postfix" => {
                let fixity = match kw.as_str() {
                    "infix" => Fixity::Infix,
                    "infixl" => Fixity::InfixLeft,
                    "infixr" => Fixity::InfixRight,
                    "prefix" => Fixity::Prefix,
                    _ => Fixity::Postfix,
                };
                let label = self.ident()?;
                self.expect(':')?;
                let ty = self.ident()?;
                self.expect('=')?;
                DeclKind::Operator {
                    fixity,
                    label,
                    ty,
                    body: self.alt()?,
                }
            }
            "precedence" => {
                self.expect('{')?;
                let mut levels = Vec::new();
                let mut level = Vec::new();
                loop {
                    if self.eat('}') {
                        break;
                    } else if self.eat(';') {
                        if !level.is_empty() {
                            levels.push(std::mem::take(&mut level));
                        }
                    } else {
                        level.push(self.ident()?);
                    }
                }
                if !level.is_empty() {
                    levels.push(level);
                }
                DeclKind::Precedence(levels)
            }
            "forbid" => {
                let label = self.ident()?;
                self.expect('.')?;
                let slot = self.ident()?;
                self.expect('=')?;
                let mut forbidden = vec![self.ident()?];
                while self.eat(',') {
                    forbidden.push(self.ident()?);
                }
                DeclKind::Forbid {
                    label,
                    slot,
                    forbidden,
                }
            }
            _ => unreachable!("keyword list"),
        };
        Ok(Declaration {
            kind,
            span: Span::new(start, self.last_end()),
        })
    }

    fn alt(&mut self) -> Result<SynRhs> {
        let mut items = vec![self.seq()?];
        while self.eat('|') {
            items.push(self.seq()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one")
        } else {
            SynRhs::Alt(items)
        })
    }

    fn at_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => !KEYWORDS.contains(&s.as_str()),
            Some(Tok::Str(_)) | Some(Tok::Punct('(')) => true,
            _ => false,
        }
    }

    fn seq(&mut self) -> Result<SynRhs> {
        let mut items = Vec::new();
        while self.at_atom() {
            items.push(self.postfix()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one")
        } else {
            SynRhs::Seq(items)
        })
    }

    fn postfix(&mut self) -> Result<SynRhs> {
        let mut a = self.atom()?;
        loop {
            a = if self.eat('*') {
                SynRhs::Star(Box::new(a))
            } else if self.eat('+') {
                SynRhs::Plus(Box::new(a))
            } else if self.eat('?') {
                SynRhs::Opt(Box::new(a))
            } else {
                return Ok(a);
            };
        }
    }

    fn atom(&mut self) -> Result<SynRhs> {
        if self.eat('(') {
            let inner = self.alt()?;
            self.expect(')')?;
            return Ok(inner);
        }
        if let Some(Tok::Str(_)) = self.peek() {
            return Ok(SynRhs::Literal(self.string()?));
        }
        let name = self.ident()?;
        if self.eat(':') {
            let target = self.ident()?;
            Ok(SynRhs::Ref {
                field: Some(name),
                name: target,
            })
        } else {
            Ok(SynRhs::Ref { field: None, name })
        }
    }
}

/// Parses one `.syn` source; `file` is used in error locations.
pub fn parse_dsl_named(file: &str, source: &str) -> Result<DslFile> {
    let Lexed { toks } = lex(file, source)?;
    let mut p = DslParser {
        file,
        src: source,
        toks,
        pos: 0,
    };
    let mut declarations = Vec::new();
    while p.peek().is_some() {
        declarations.push(p.declaration()?);
    }
    Ok(DslFile {
        name: file.to_string(),
        declarations,
    })
}

pub fn parse_dsl(source: &str) -> Result<DslFile> {
    parse_dsl_named("<input>", source)
}

struct Op {
    fixity: Fixity,
    ty: String,
}

/// Composes `files` by declaration union and compiles the result. The start
/// symbol is the one named by a `start` declaration, else the only declared type.
pub fn elaborate(files: &[DslFile]) -> Result<LanguageDefinition> {
    let mut types: BTreeSet<String> = BTreeSet::new();
    let mut start: Option<String> = None;
    let mut tokens: BTreeMap<String, String> = BTreeMap::new();
    let mut literals: BTreeSet<String> = BTreeSet::new();
    let mut grouping: Option<(String, String)> = None;
    let mut grouped: BTreeSet<String> = BTreeSet::new();
    let mut bodies: BTreeMap<String, (String, SynRhs, Option<Op>)> = BTreeMap::new();
    let mut blocks: Vec<Vec<Vec<String>>> = Vec::new();
    let mut forbids: Vec<(String, String, String)> = Vec::new();

    for f in files {
        for d in &f.declarations {
            match &d.kind {
                DeclKind::Type(t) => {
                    types.insert(t.clone());
                }
                DeclKind::Start(t) => {
                    if start.as_ref().is_some_and(|s| s != t) {
                        return Err(Error::Dsl(format!("{}: conflicting start symbols", f.name)));
                    }
                    start = Some(t.clone());
                }
                DeclKind::Token { name, pattern } => {
                    if let Some(old) = tokens.insert(name.clone(), pattern.clone()) {
                        if &old != pattern {
                            return Err(Error::Dsl(format!(
                                "token `{name}` declared with two different patterns"
                            )));
                        }
                    }
                }
                DeclKind::Literal(s) => {
                    literals.insert(s.clone());
                }
                DeclKind::Grouping { open, ty, close } => {
                    match &grouping {
                        Some((o, c)) if o != open || c != close => {
                            return Err(Error::Dsl(format!(
                                "grouping for `{ty}` uses \"{open}\" \"{close}\" but another uses \"{o}\" \"{c}\""
                            )))
                        }
                        _ => grouping = Some((open.clone(), close.clone())),
                    }
                    grouped.insert(ty.clone());
                }
                DeclKind::Syncon { label, ty, rhs } => {
                    if bodies
                        .insert(label.clone(), (ty.clone(), rhs.clone(), None))
                        .is_some()
                    {
                        return Err(Error::Dsl(format!("duplicate label `{label}`")));
                    }
                }
                DeclKind::Operator {
                    fixity,
                    label,
                    ty,
                    body,
                } => {
                    let op = Op {
                        fixity: *fixity,
                        ty: ty.clone(),
                    };
                    if bodies
                        .insert(label.clone(), (ty.clone(), body.clone(), Some(op)))
                        .is_some()
                    {
                        return Err(Error::Dsl(format!("duplicate label `{label}`")));
                    }
                }
                DeclKind::Precedence(ls) => blocks.push(ls.clone()),
                DeclKind::Forbid {
                    label,
                    slot,
                    forbidden,
                } => {
                    for b in forbidden {
                        forbids.push((label.clone(), slot.clone(), b.clone()));
                    }
                }
            }
        }
    }

    let start = match (start, types.len()) {
        (Some(s), _) => s,
        (None, 1) => types.first().cloned().expect("one type"),
        (None, 0) => return Err(Error::Dsl("no syntax type declared".into())),
        (None, _) => {
            return Err(Error::Dsl(
                "several syntax types: declare the start type with `start`".into(),
            ))
        }
    };
    for t in grouped.iter().chain(std::iter::once(&start)) {
        if !types.contains(t) {
            return Err(Error::Dsl(format!("unknown syntax type `{t}`")));
        }
    }
    let (open, close) = grouping.unwrap_or_else(|| ("(".into(), ")".into()));

    let mut productions = Vec::new();
    for (label, (ty, body, op)) in &bodies {
        if !types.contains(ty) {
            return Err(Error::Dsl(format!(
                "syncon `{label}` has unknown syntax type `{ty}`"
            )));
        }
        let body = resolve(body, &types, &tokens, &mut literals, label)?;
        let slot = |s: &str| {
            Rhs::NonTerminal(NtRef {
                name: ty.clone(),
                mark: BTreeSet::new(),
                slot: Some(s.into()),
            })
        };
        let rhs = match op.as_ref().map(|o| o.fixity) {
            None => body,
            Some(Fixity::Prefix) => Rhs::seq([body, slot("right")]),
            Some(Fixity::Postfix) => Rhs::seq([slot("left"), body]),
            Some(_) => Rhs::seq([slot("left"), body, slot("right")]),
        };
        productions.push(Production {
            lhs: ty.clone(),
            label: label.clone(),
            rhs: flatten(rhs),
        });
    }

    let ops: BTreeMap<&str, &Op> = bodies
        .iter()
        .filter_map(|(l, (_, _, o))| o.as_ref().map(|o| (l.as_str(), o)))
        .collect();
    let mut marks: Vec<(String, String, String)> = Vec::new();
    for l in blocks.iter().flatten().flatten() {
        if !bodies.contains_key(l) {
            return Err(Error::Dsl(format!("precedence names unknown label `{l}`")));
        }
        if !ops.contains_key(l.as_str()) {
            return Err(Error::Dsl(format!(
                "precedence names `{l}`, which is not an operator"
            )));
        }
    }
    // Shallow precedence: a higher operator's slots exclude every lower one
    // of the same block.
    for block in &blocks {
        for (i, hi) in block.iter().enumerate() {
            for lo in block.iter().skip(i + 1).flatten() {
                for h in hi {
                    if ops[h.as_str()].ty == ops[lo.as_str()].ty {
                        let slots: &[&str] = match ops[h.as_str()].fixity {
                            Fixity::Prefix => &["right"],
                            Fixity::Postfix => &["left"],
                            _ => &["left", "right"],
                        };
                        for s in slots {
                            marks.push((h.clone(), s.to_string(), lo.clone()));
                        }
                    }
                }
            }
        }
    }
    // Associativity within a level (or alone, for unlisted operators).
    for (label, op) in &ops {
        let peers: Vec<&str> = match blocks
            .iter()
            .flatten()
            .find(|lv| lv.iter().any(|l| l == label))
        {
            Some(lv) => lv.iter().map(String::as_str).collect(),
            None => vec![label],
        };
        let (slot, fix) = match op.fixity {
            Fixity::InfixLeft => ("right", Fixity::InfixLeft),
            Fixity::InfixRight => ("left", Fixity::InfixRight),
            _ => continue,
        };
        for p in peers {
            if ops[p].fixity == fix && ops[p].ty == op.ty {
                marks.push((label.to_string(), slot.into(), p.to_string()));
            }
        }
    }
    for (label, slot, b) in &forbids {
        if !bodies.contains_key(label) {
            return Err(Error::Dsl(format!("forbid names unknown label `{label}`")));
        }
        if !bodies.contains_key(b) {
            return Err(Error::Dsl(format!("forbid names unknown label `{b}`")));
        }
        marks.push((label.clone(), slot.clone(), b.clone()));
    }
    for (label, slot, b) in marks {
        let p = productions
            .iter_mut()
            .find(|p| p.label == label)
            .expect("known label");
        let mut hit = false;
        p.rhs.walk_mut(&mut |r| {
            if let Rhs::NonTerminal(n) = r {
                if n.slot.as_deref() == Some(slot.as_str()) {
                    n.mark.insert(b.clone());
                    hit = true;
                }
            }
        });
        if !hit {
            return Err(Error::Dsl(format!("`{label}` has no slot named `{slot}`")));
        }
    }

    let mut terminals = vec![
        Terminal::literal(open.clone()),
        Terminal::literal(close.clone()),
    ];
    terminals.extend(tokens.iter().map(|(n, p)| Terminal::regex(n, p)));
    for l in &literals {
        if *l != open && *l != close {
            terminals.push(Terminal::literal(l));
        }
    }
    let ungrouped = types
        .iter()
        .filter(|t| !grouped.contains(*t))
        .cloned()
        .collect();
    let defn = LanguageDefinition {
        start,
        terminals,
        productions,
        grouping: Grouping { open, close },
        ungrouped,
    };
    let errors: Vec<String> = defn
        .validate()
        .into_iter()
        .filter(|i| i.severity == crate::grammar::Severity::Error)
        .map(|i| i.message)
        .collect();
    if !errors.is_empty() {
        return Err(Error::Dsl(errors.join("; ")));
    }
    Ok(defn)
}

fn resolve(
    r: &SynRhs,
    types: &BTreeSet<String>,
    tokens: &BTreeMap<String, String>,
    literals: &mut BTreeSet<String>,
    label: &str,
) -> Result<Rhs> {
    let mut go = |x: &SynRhs| resolve(x, types, tokens, literals, label);
    Ok(match r {
        SynRhs::Literal(s) => {
            if s.is_empty() {
                return Err(Error::Dsl(format!("empty literal in `{label}`")));
            }
            literals.insert(s.clone());
            Rhs::t(s.clone())
        }
        SynRhs::Ref { field, name } => {
            if types.contains(name) {
                Rhs::NonTerminal(NtRef {
                    name: name.clone(),
                    mark: BTreeSet::new(),
                    slot: field.clone(),
                })
            } else if tokens.contains_key(name) {
                Rhs::t(name.clone())
            } else {
                return Err(Error::Dsl(format!(
                    "`{label}` refers to unknown type or token `{name}`"
                )));
            }
        }
        SynRhs::Seq(xs) => Rhs::Seq(xs.iter().map(&mut go).collect::<Result<_>>()?),
        SynRhs::Alt(xs) => Rhs::Alt(xs.iter().map(&mut go).collect::<Result<_>>()?),
        SynRhs::Star(x) => Rhs::star(go(x)?),
        SynRhs::Plus(x) => Rhs::plus(go(x)?),
        SynRhs::Opt(x) => Rhs::opt(go(x)?),
    })
}

/// Splices nested sequences so that printing and re-reading is stable.
fn flatten(r: Rhs) -> Rhs {
    match r {
        Rhs::Seq(xs) => {
            let mut out = Vec::new();
            for x in xs.into_iter().map(flatten) {
                match x {
                    Rhs::Seq(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            if out.len() == 1 {
                out.pop().expect("one")
            } else {
                Rhs::Seq(out)
            }
        }
        Rhs::Alt(xs) => Rhs::Alt(xs.into_iter().map(flatten).collect()),
        Rhs::Star(x) => Rhs::Star(Box::new(flatten(*x))),
        other => other,
    }
}

/// Parses and elaborates a set of sources given as `(file name, text)`.
pub fn load(sources: &[(String, String)]) -> Result<LanguageDefinition> {
    let files = sources
        .iter()
        .map(|(n, s)| parse_dsl_named(n, s))
        .collect::<Result<Vec<_>>>()?;
    elaborate(&files)
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn print_rhs(r: &Rhs, defn: &LanguageDefinition, out: &mut String, prec: u8) {
    // prec: 0 alternative, 1 sequence, 2 postfix operand
    match r {
        Rhs::Terminal(t) => match defn.terminal(t).map(|t| &t.pattern) {
            Some(TokenPattern::Regex(_)) => out.push_str(t),
            _ => out.push_str(&quote(t)),
        },
        Rhs::NonTerminal(n) => match &n.slot {
            Some(s) => {
                let _ = write!(out, "{s}:{}", n.name);
            }
            None => out.push_str(&n.name),
        },
        Rhs::Epsilon => out.push_str("()"),
        Rhs::Seq(xs) if xs.is_empty() => out.push_str("()"),
        Rhs::Seq(xs) => {
            if prec > 1 {
                out.push('(');
            }
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                print_rhs(x, defn, out, 2);
            }
            if prec > 1 {
                out.push(')');
            }
        }
        Rhs::Alt(xs) => {
            if let [x, Rhs::Epsilon] = xs.as_slice() {
                print_rhs(x, defn, out, 2);
                out.push('?');
                return;
            }
            if prec > 0 {
                out.push('(');
            }
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                print_rhs(x, defn, out, 1);
            }
            if prec > 0 {
                out.push(')');
            }
        }
        Rhs::Star(x) => {
            print_rhs(x, defn, out, 2);
            out.push('*');
        }
    }
}

/// Renders `defn` as a single `.syn` file. Marks become `forbid`
/// declarations, so every marked occurrence needs a slot name.
pub fn pretty_print(defn: &LanguageDefinition) -> Result<String> {
    let mut out = String::new();
    let mut types = defn.nonterminals();
    types.sort();
    let _ = writeln!(out, "start {}", defn.start);
    for t in &types {
        let _ = writeln!(out, "type {t}");
    }
    for t in &types {
        if defn.is_grouped(t) {
            let _ = writeln!(
                out,
                "grouping {} {t} {}",
                quote(&defn.grouping.open),
                quote(&defn.grouping.close)
            );
        }
    }
    let used: BTreeSet<&str> = defn
        .productions
        .iter()
        .flat_map(|p| p.rhs.terminals())
        .collect();
    for t in &defn.terminals {
        match &t.pattern {
            TokenPattern::Regex(p) => {
                let _ = writeln!(out, "token {} = {}", t.name, quote(p));
            }
            TokenPattern::Literal(s) => {
                if !used.contains(s.as_str())
                    && *s != defn.grouping.open
                    && *s != defn.grouping.close
                {
                    let _ = writeln!(out, "token {}", quote(s));
                }
            }
        }
    }
    let mut prods: Vec<&Production> = defn.productions.iter().collect();
    prods.sort_by(|a, b| a.label.cmp(&b.label));
    let mut forbids = Vec::new();
    for p in prods {
        let mut body = String::new();
        print_rhs(&p.rhs, defn, &mut body, 0);
        let _ = writeln!(out, "syncon {}: {} = {body}", p.label, p.lhs);
        let mut missing = None;
        let mut seen = BTreeSet::new();
        for n in p.rhs.nonterminals() {
            if n.mark.is_empty() {
                continue;
            }
            match &n.slot {
                Some(s) => {
                    for m in &n.mark {
                        if seen.insert((s.clone(), m.clone())) {
                            forbids.push(format!("forbid {}.{s} = {m}", p.label));
                        }
                    }
                }
                None => missing = Some(n.name.clone()),
            }
        }
        if let Some(n) = missing {
            return Err(Error::Dsl(format!(
                "production `{}` marks an unnamed occurrence of `{n}`",
                p.label
            )));
        }
    }
    for f in forbids {
        out.push_str(&f);
        out.push('\n');
    }
    Ok(out)
}
