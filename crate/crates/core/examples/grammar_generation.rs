//! Prints the context-free and tree grammars generated from a definition
//! with marks.

use resolvable::dsl;
use resolvable::generate::dump;

fn main() -> resolvable::Result<()> {
    let defn = dsl::load(&[(
        "running.syn".into(),
        include_str!("../grammars/running.syn").into(),
    )])?;
    print!("{}", dump(&defn));
    Ok(())
}
