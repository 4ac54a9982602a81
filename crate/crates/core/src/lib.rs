pub mod cli;
pub mod dfa;
pub mod dsl;
pub mod dynamic;
pub mod encoding;
pub mod error;
pub mod generate;
pub mod grammar;
pub mod lexer;
pub mod parser;
pub mod static_analysis;
pub mod tree;
pub mod vpda;

pub use error::{Error, Result};
