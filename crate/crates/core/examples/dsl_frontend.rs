//! Elaborates a `.syn` file written inline and prints the resulting
//! productions, marks included.

use resolvable::dsl::{elaborate, parse_dsl_named, pretty_print};

const SOURCE: &str = r#"
type Exp
grouping "(" Exp ")"
token Num = "[0-9]+"
syncon num: Exp = n:Num
prefix neg: Exp = "-"
infixl sub: Exp = "-"
infixr pow: Exp = "^"
precedence {
  neg;
  pow;
  sub;
}
"#;

fn main() -> resolvable::Result<()> {
    let file = parse_dsl_named("calc.syn", SOURCE)?;
    println!("{} declarations", file.declarations.len());
    let defn = elaborate(&[file])?;
    print!("{}", pretty_print(&defn)?);
    Ok(())
}
