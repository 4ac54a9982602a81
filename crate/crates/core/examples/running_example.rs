//! Parses a few expressions of the small list/arithmetic language and
//! resolves the ambiguous ones.

use resolvable::dsl;
use resolvable::dynamic::{resolve_word, WordVerdict};
use resolvable::parser::Parser;

fn main() -> resolvable::Result<()> {
    let defn = dsl::load(&[(
        "running.syn".into(),
        include_str!("../grammars/running.syn").into(),
    )])?;
    let parser = Parser::new(&defn)?;
    for input in ["1 + 2 * 3", "1 + 2 + 3", "[1 ; 2 * 3]", "1 * 2 * 3 + 4"] {
        print!("{input:<16} ");
        match resolve_word(&parser, input, &Default::default())? {
            WordVerdict::Unambiguous(t) => println!("{}", t.render()),
            WordVerdict::Resolvable(r) => {
                let words: Vec<_> = r.resolved.iter().map(|w| w.render()).collect();
                println!("ambiguous, write one of: {}", words.join("  |  "));
            }
            WordVerdict::Unresolvable(r) => {
                println!("unresolvable ({} trees)", r.unresolvable.len())
            }
            WordVerdict::Inconclusive(_) => println!("inconclusive"),
        }
    }
    Ok(())
}
