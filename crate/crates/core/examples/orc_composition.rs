//! Two grammar files composed into one language: Orc combinators on top of
//! arithmetic expressions.

use resolvable::cli::{cmd_parse, Options};

fn main() {
    let sources = vec![
        (
            "orc.syn".to_string(),
            include_str!("../grammars/orc.syn").to_string(),
        ),
        (
            "arith.syn".to_string(),
            include_str!("../grammars/arith.syn").to_string(),
        ),
    ];
    let opts = Options::default();
    for program in ["f(1) | g(2) > x > h(x)", "f(x) | g(x)", "a > x > b > y > c"] {
        println!("$ parse {program:?}");
        let out = cmd_parse(&sources, "<expr>", program, &opts);
        print!("{}", out.text());
        println!("(exit {})\n", out.exit);
    }
}
