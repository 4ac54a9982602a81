//! Grammar-level resolvability: decides for every word at once whether
//! each ambiguity can be resolved by grouping.

use resolvable::grammar::{LanguageDefinition, Rhs};
use resolvable::static_analysis::{check_static, StaticOutcome};

fn report(name: &str, defn: &LanguageDefinition) -> resolvable::Result<()> {
    let v = check_static(defn)?;
    println!("{name} ({})", v.subclass.name());
    match &v.outcome {
        StaticOutcome::Resolvable => println!("  resolvable"),
        StaticOutcome::ConservativeUnknown { reason, .. } => println!("  unknown: {reason}"),
        StaticOutcome::Unresolvable(_) => {
            let w = v.witness().expect("tree witness");
            println!("  unresolvable");
            println!("  {} has no word of its own;", w.subsumed.render());
            println!("  every word also parses as {}", w.subsuming.render());
        }
    }
    Ok(())
}

fn main() -> resolvable::Result<()> {
    let expr = LanguageDefinition::builder("E")
        .token("I", "[0-9]+")
        .production(
            "E",
            "add",
            Rhs::seq([Rhs::nt("E"), Rhs::t("+"), Rhs::nt("E")]),
        )
        .production(
            "E",
            "mul",
            Rhs::seq([Rhs::nt("E"), Rhs::t("*"), Rhs::nt("E")]),
        )
        .production("E", "int", Rhs::t("I"))
        .build();
    report("arithmetic", &expr)?;

    let list = LanguageDefinition::builder("E")
        .token("I", "[0-9]+")
        .production(
            "E",
            "list",
            Rhs::seq([
                Rhs::t("["),
                Rhs::opt(Rhs::seq([
                    Rhs::nt("E"),
                    Rhs::star(Rhs::seq([Rhs::t(";"), Rhs::nt("E")])),
                ])),
                Rhs::t("]"),
            ]),
        )
        .production(
            "E",
            "seq",
            Rhs::seq([Rhs::nt("E"), Rhs::t(";"), Rhs::nt("E")]),
        )
        .production("E", "int", Rhs::t("I"))
        .build();
    report("lists with sequencing", &list)?;

    let fixed = LanguageDefinition::builder("E")
        .token("I", "[0-9]+")
        .production(
            "E",
            "list",
            Rhs::seq([
                Rhs::t("["),
                Rhs::opt(Rhs::seq([
                    Rhs::marked("E", ["seq"]),
                    Rhs::star(Rhs::seq([Rhs::t(";"), Rhs::marked("E", ["seq"])])),
                ])),
                Rhs::t("]"),
            ]),
        )
        .production(
            "E",
            "seq",
            Rhs::seq([Rhs::nt("E"), Rhs::t(";"), Rhs::nt("E")]),
        )
        .production("E", "int", Rhs::t("I"))
        .build();
    report("lists forbidding bare sequences", &fixed)
}
