use crate::lexer::{LexError, PatternError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("no parse: input is not in the language")]
    NoParse { offset: Option<usize> },
    #[error("infinitely ambiguous: unit cycle through {}", .0.join(", "))]
    InfiniteAmbiguity(Vec<String>),
    #[error("too many parse trees ({count} or more)")]
    TooManyTrees { count: usize },
    #[error("tree is not in the tree language: {0}")]
    NotInTreeLanguage(String),
    #[error("automata have different alphabet partitions")]
    PartitionMismatch,
    #[error("automaton exceeds the state limit of {0}")]
    SizeLimit(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("budget exceeded; result inconclusive")]
    BudgetExceeded,
    #[error("{0}")]
    Dsl(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
