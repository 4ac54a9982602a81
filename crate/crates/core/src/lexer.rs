//! Maximal-munch tokenizer driven by a definition's terminals.

use std::fmt;
use std::hash::{Hash, Hasher};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::grammar::{LanguageDefinition, TokenPattern};

/// Byte range `[start, end)` into the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// A classified piece of input. Equality, ordering and hashing ignore the span.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Token {
    pub terminal: String,
    pub lexeme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Token {
    pub fn new(terminal: impl Into<String>, lexeme: impl Into<String>) -> Self {
        Token {
            terminal: terminal.into(),
            lexeme: lexeme.into(),
            span: None,
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }
}

impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.terminal == other.terminal && self.lexeme == other.lexeme
    }
}

impl Eq for Token {}

impl Hash for Token {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terminal.hash(state);
        self.lexeme.hash(state);
    }
}

impl PartialOrd for Token {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Token {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.terminal, &self.lexeme).cmp(&(&other.terminal, &other.lexeme))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexeme)
    }
}

/// Space-separated lexemes, the rendering used for witness words.
pub fn render_word(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.lexeme.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no token matches at offset {offset}")]
pub struct LexError {
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid pattern for token {name}: {message}")]
pub struct PatternError {
    pub name: String,
    pub message: String,
}

enum Rule {
    Literal(String),
    Pattern(Regex),
}

/// Compiled tokenizer.
pub struct Lexer {
    rules: Vec<(String, Rule)>,
}

impl Lexer {
    pub fn new(defn: &LanguageDefinition) -> Result<Lexer, PatternError> {
        let mut rules = Vec::new();
        for t in &defn.terminals {
            let rule = match &t.pattern {
                TokenPattern::Literal(s) => Rule::Literal(s.clone()),
                TokenPattern::Regex(p) => {
                    Rule::Pattern(Regex::new(&format!("^(?:{p})")).map_err(|e| PatternError {
                        name: t.name.clone(),
                        message: e.to_string(),
                    })?)
                }
            };
            rules.push((t.name.clone(), rule));
        }
        Ok(Lexer { rules })
    }

    pub fn tokenize(&self, input: &str) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < input.len() {
            let rest = &input[pos..];
            let c = rest.chars().next().expect("non-empty");
            if c.is_whitespace() {
                pos += c.len_utf8();
                continue;
            }
            // (length, is_literal, rule index); literals win ties, then declaration order
            let mut best: Option<(usize, bool, usize)> = None;
            for (i, (_, rule)) in self.rules.iter().enumerate() {
                let (len, lit) = match rule {
                    Rule::Literal(s) if rest.starts_with(s.as_str()) => (s.len(), true),
                    Rule::Pattern(re) => match re.find(rest) {
                        Some(m) if m.end() > 0 => (m.end(), false),
                        _ => continue,
                    },
                    _ => continue,
                };
                let better = match best {
                    None => true,
                    Some((bl, blit, _)) => len > bl || (len == bl && lit && !blit),
                };
                if better {
                    best = Some((len, lit, i));
                }
            }
            let (len, _, i) = best.ok_or(LexError { offset: pos })?;
            out.push(
                Token::new(&self.rules[i].0, &rest[..len]).with_span(Span::new(pos, pos + len)),
            );
            pos += len;
        }
        Ok(out)
    }
}

/// Tokenizes `input` with the terminals of `defn`.
pub fn tokenize(defn: &LanguageDefinition, input: &str) -> Result<Vec<Token>, crate::Error> {
    let lexer = Lexer::new(defn)?;
    Ok(lexer.tokenize(input)?)
}

/// 1-based `(line, column)` of a byte offset; columns count characters.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::running_example;

    fn classes(ts: &[Token]) -> Vec<(String, String)> {
        ts.iter()
            .map(|t| (t.terminal.clone(), t.lexeme.clone()))
            .collect()
    }

    #[test]
    fn arithmetic() {
        let ts = tokenize(&running_example(), "1 + 2 * 3").unwrap();
        let expect: Vec<(String, String)> =
            [("I", "1"), ("+", "+"), ("I", "2"), ("*", "*"), ("I", "3")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        assert_eq!(classes(&ts), expect);
        assert_eq!(ts[2].span, Some(Span::new(4, 5)));
    }

    #[test]
    fn list_without_spaces() {
        let ts = tokenize(&running_example(), "[1;2]").unwrap();
        assert_eq!(render_word(&ts), "[ 1 ; 2 ]");
        assert_eq!(ts[1].terminal, "I");
    }

    #[test]
    fn unknown_character() {
        let err = tokenize(&running_example(), "1 +@ 2").unwrap_err();
        assert_eq!(err, crate::Error::Lex(LexError { offset: 3 }));
    }

    #[test]
    fn literal_beats_pattern_on_equal_length() {
        let d = LanguageDefinition::builder("E")
            .token("Ident", "[a-z]+")
            .production("E", "v", crate::grammar::Rhs::t("Ident"))
            .production("E", "k", crate::grammar::Rhs::t("let"))
            .build();
        let ts = tokenize(&d, "let lets").unwrap();
        assert_eq!(ts[0].terminal, "let");
        assert_eq!(ts[1].terminal, "Ident");
    }

    #[test]
    fn token_equality_ignores_spans() {
        let a = Token::new("I", "1").with_span(Span::new(0, 1));
        let b = Token::new("I", "1");
        assert_eq!(a, b);
    }

    #[test]
    fn line_and_column() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("42 >x>", 0), (1, 1));
    }
}
