mod common;

use common::{fully_grouped, grammar_source, load, random_plain, TreeEnumerator};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use resolvable::dsl::{elaborate, parse_dsl_named, pretty_print, DeclKind, DslFile};
use resolvable::parser::Parser;

const COMPOSITIONS: &[&[&str]] = &[
    &["running.syn"],
    &["running.syn", "sequence.syn", "list_forbids_seq.syn"],
    &["orc.syn", "arith.syn"],
    &["orc.syn", "arith.syn", "cmp.syn", "cmp_forbid.syn"],
    &["mini_ocaml.syn"],
    &["abc.syn"],
];

fn files(names: &[&str]) -> Vec<DslFile> {
    names
        .iter()
        .map(|n| {
            let (name, src) = grammar_source(n);
            parse_dsl_named(&name, &src).unwrap()
        })
        .collect()
}

/// Shuffles files, declarations, and labels within a precedence level.
fn shuffle(rng: &mut StdRng, mut fs: Vec<DslFile>) -> Vec<DslFile> {
    fs.shuffle(rng);
    for f in &mut fs {
        f.declarations.shuffle(rng);
        for d in &mut f.declarations {
            if let DeclKind::Precedence(levels) = &mut d.kind {
                for lv in levels {
                    lv.shuffle(rng);
                }
            }
        }
    }
    fs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn elaboration_ignores_order(seed in any::<u64>(), which in 0..COMPOSITIONS.len()) {
        let fs = files(COMPOSITIONS[which]);
        let base = elaborate(&fs).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        prop_assert_eq!(elaborate(&shuffle(&mut rng, fs)).unwrap(), base);
    }

    #[test]
    fn random_grammars_round_trip(seed in any::<u64>()) {
        let d = random_plain(&mut StdRng::seed_from_u64(seed));
        let text = pretty_print(&d).unwrap();
        let back = elaborate(&[parse_dsl_named("p.syn", &text).unwrap()]).unwrap();
        prop_assert_eq!(pretty_print(&back).unwrap(), text.clone());
        prop_assert_eq!(back.productions.len(), d.productions.len());
    }
}

#[test]
fn shipped_grammars_round_trip() {
    for names in COMPOSITIONS {
        let d = elaborate(&files(names)).unwrap();
        let text = pretty_print(&d).unwrap();
        let back = elaborate(&[parse_dsl_named("p.syn", &text).unwrap()]).unwrap();
        assert_eq!(back, d, "{names:?}\n{text}");
    }
}

#[test]
fn composing_keeps_arithmetic_words() {
    let arith = load(&["arith.syn"]);
    let base = Parser::new(&arith).unwrap();
    let mut en = TreeEnumerator::new(&arith, 0);
    let mut words: Vec<_> = en.trees(&arith.start, 7).into_iter().map(|(t, _)| t.tokens()).collect();
    words.extend(en.trees(&arith.start, 4).into_iter().map(|(t, _)| fully_grouped(&arith, &t)));
    assert!(words.len() > 50);
    for names in [&["arith.syn", "orc.syn"][..], &["arith.syn", "orc.syn", "cmp.syn"]] {
        let composed = Parser::new(&load(names)).unwrap().with_limit(1 << 12);
        for w in &words {
            let before = base.trees(w).unwrap().len();
            let after = composed.trees(w).unwrap().len();
            assert!(after >= before, "{names:?}: {w:?} has {before} trees alone, {after} composed");
        }
    }
}

#[test]
fn several_types_need_a_start() {
    let src = "type A\ntype B\nsyncon a: A = \"x\"\nsyncon b: B = \"y\"";
    let err = elaborate(&[parse_dsl_named("t.syn", src).unwrap()]).unwrap_err();
    assert!(err.to_string().contains("start"), "{err}");
    let with_start = format!("start B\n{src}");
    assert_eq!(elaborate(&[parse_dsl_named("t.syn", &with_start).unwrap()]).unwrap().start, "B");
}
