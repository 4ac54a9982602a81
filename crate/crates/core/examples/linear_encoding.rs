//! The canonical encoding of all words that parse to a given tree, and the
//! words it stands for.

use resolvable::dsl;
use resolvable::encoding::encode;
use resolvable::lexer::{render_word, Token};
use resolvable::parser::Parser;

fn main() -> resolvable::Result<()> {
    let defn = dsl::load(&[(
        "running.syn".into(),
        include_str!("../grammars/running.syn").into(),
    )])?;
    let parser = Parser::new(&defn)?;
    let (open, close) = (Token::new("(", "("), Token::new(")", ")"));
    for input in ["1 + 2 * 3", "[1 ; 2]", "(1 + 2) * 3"] {
        let trees = parser.parse_str(input)?.trees;
        for t in &trees {
            let enc = encode(&defn, t)?;
            println!("{}", t.render());
            println!("  encoding {enc}");
            for w in enc.expand(&open, &close, 9).iter().take(4) {
                println!("  e.g.     {}", render_word(w));
            }
        }
    }
    Ok(())
}
