mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{load, random_plain, rhs_words, TreeEnumerator};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use resolvable::dfa::{regex_to_dfa, RhsSymbol};
use resolvable::dsl;
use resolvable::generate::{gen_abstract, gen_concrete, Cfg, Symbol};
use resolvable::grammar::{LanguageDefinition, Rhs};

const COMPOSITIONS: &[&[&str]] = &[
    &["running.syn"],
    &["running.syn", "sequence.syn", "list_forbids_seq.syn"],
    &["orc.syn", "arith.syn"],
    &["orc.syn", "arith.syn", "cmp.syn", "cmp_forbid.syn"],
    &["abc.syn"],
    &["mini_ocaml.syn"],
];

fn sigma() -> Vec<RhsSymbol> {
    vec![RhsSymbol::Terminal("a".into()), RhsSymbol::Terminal("b".into()), RhsSymbol::NonTerminal("C".into())]
}

fn regex() -> impl Strategy<Value = Rhs> {
    let leaf = prop_oneof![Just(Rhs::t("a")), Just(Rhs::t("b")), Just(Rhs::nt("C")), Just(Rhs::Epsilon)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Rhs::Seq),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Rhs::Alt),
            inner.prop_map(|r| Rhs::Star(Box::new(r))),
        ]
    })
}

fn all_words(alphabet: &[RhsSymbol], max: usize) -> Vec<Vec<RhsSymbol>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<RhsSymbol>> = vec![vec![]];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut w = w.clone();
                    w.push(a.clone());
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dfa_matches_the_regex(r in regex()) {
        let dfa = regex_to_dfa(&r, &sigma());
        let lang = rhs_words(&r, 8);
        for w in all_words(&sigma(), 8) {
            prop_assert_eq!(dfa.accepts(&w), lang.contains(&w), "{} on {:?}", r, w);
        }
    }
}

fn balanced_by_enumeration(defn: &LanguageDefinition) -> bool {
    let (open, close) = (RhsSymbol::Terminal(defn.grouping.open.clone()), RhsSymbol::Terminal(defn.grouping.close.clone()));
    defn.productions.iter().all(|p| {
        rhs_words(&p.rhs, 12).iter().all(|w| {
            let mut depth = 0i32;
            for s in w {
                if *s == open {
                    depth += 1;
                } else if *s == close {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
            }
            depth == 0
        })
    })
}

#[test]
fn balance_check_agrees_with_enumeration() {
    for names in COMPOSITIONS {
        let d = load(names);
        assert_eq!(d.check_balanced(), balanced_by_enumeration(&d), "{names:?}");
        assert!(d.check_balanced());
    }
    let head = "type E\ngrouping \"(\" E \")\"\nsyncon leaf: E = \"z\"\n";
    for (body, balanced) in [
        ("syncon x: E = \"(\" E", false),
        ("syncon x: E = \")\" E \"(\"", false),
        ("syncon x: E = \"(\" E \")\"*", false),
        ("syncon x: E = (\"(\" E \")\")*", true),
        ("syncon x: E = \"f\" (\"(\" E \")\")?", true),
    ] {
        let d = dsl::load(&[("t.syn".into(), format!("{head}{body}"))]).unwrap();
        assert_eq!(d.check_balanced(), balanced, "{body}");
        assert_eq!(balanced_by_enumeration(&d), balanced, "{body}");
    }
}

/// Non-terminals on a unit cycle, by transitive closure of the relation
/// "some word of the right-hand side is that single non-terminal".
fn unit_cycles_by_closure(defn: &LanguageDefinition) -> BTreeSet<String> {
    let nts = defn.nonterminals();
    let ix: BTreeMap<&str, usize> = nts.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let n = nts.len();
    let mut reach = vec![vec![false; n]; n];
    for p in &defn.productions {
        for w in rhs_words(&p.rhs, 1) {
            if let [RhsSymbol::NonTerminal(x)] = w.as_slice() {
                reach[ix[p.lhs.as_str()]][ix[x.as_str()]] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| reach[i][i]).map(|i| nts[i].clone()).collect()
}

fn random_units(rng: &mut StdRng) -> LanguageDefinition {
    let names = ["A", "B", "C", "D"];
    let mut b = LanguageDefinition::builder("A").literal("a").grouping("(", ")");
    let mut k = 0;
    for lhs in names {
        // One production that always terminates keeps every symbol productive.
        b = b.production(lhs, format!("p{k}"), Rhs::t("a"));
        k += 1;
        for _ in 0..rng.gen_range(0..3) {
            let x = names[rng.gen_range(0..names.len())];
            let rhs = match rng.gen_range(0..3) {
                0 => Rhs::nt(x),
                1 => Rhs::seq([Rhs::nt(x), Rhs::opt(Rhs::t("a"))]),
                _ => Rhs::seq([Rhs::t("a"), Rhs::nt(x)]),
            };
            b = b.production(lhs, format!("p{k}"), rhs);
            k += 1;
        }
    }
    b.build()
}

#[test]
fn unit_cycles_agree_with_closure() {
    let mut rng = StdRng::seed_from_u64(17);
    let mut cyclic = 0;
    for _ in 0..300 {
        let d = random_units(&mut rng);
        let want = unit_cycles_by_closure(&d);
        cyclic += usize::from(!want.is_empty());
        assert_eq!(d.check_unit_cycles(), want);
    }
    assert!(cyclic > 30 && cyclic < 270, "{cyclic} cyclic grammars");
}

/// Words of at most `max` terminals per non-terminal, by fixpoint.
fn cfg_words(g: &Cfg, max: usize) -> BTreeSet<Vec<String>> {
    let mut words: BTreeMap<&str, BTreeSet<Vec<String>>> = BTreeMap::new();
    loop {
        let mut changed = false;
        for p in &g.productions {
            let mut acc: BTreeSet<Vec<String>> = BTreeSet::from([vec![]]);
            for s in &p.rhs {
                let parts: Vec<Vec<String>> = match s {
                    Symbol::T(t) => vec![vec![t.clone()]],
                    Symbol::N(n) => words.get(n.as_str()).map(|ws| ws.iter().cloned().collect()).unwrap_or_default(),
                };
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        parts.iter().filter(|b| a.len() + b.len() <= max).map(move |b| {
                            let mut w = a.clone();
                            w.extend(b.iter().cloned());
                            w
                        })
                    })
                    .collect();
            }
            let entry = words.entry(p.lhs.as_str()).or_default();
            for w in acc {
                changed |= entry.insert(w);
            }
        }
        if !changed {
            return words.remove(g.start.as_str()).unwrap_or_default();
        }
    }
}

fn tree_yields(defn: &LanguageDefinition, max: usize) -> BTreeSet<Vec<String>> {
    let mut en = TreeEnumerator::new(defn, 0);
    en.trees(&defn.start, max).into_iter().map(|(t, _)| t.tokens().into_iter().map(|t| t.terminal).collect()).collect()
}

fn check_generated(defn: &LanguageDefinition, max: usize) {
    let abs = cfg_words(&gen_abstract(defn), max);
    assert_eq!(abs, tree_yields(defn, max));
    if defn.uses_grouping_terminals() {
        // Erasing would also drop the grammar's own uses of the spellings.
        return;
    }
    let (open, close) = (&defn.grouping.open, &defn.grouping.close);
    let erased: BTreeSet<Vec<String>> = cfg_words(&gen_concrete(defn), max)
        .into_iter()
        .map(|w| w.into_iter().filter(|t| t != open && t != close).collect())
        .collect();
    for w in &erased {
        assert!(abs.contains(w), "concrete word without grouping is not abstract: {w:?}");
    }
}

#[test]
fn generated_grammars_describe_the_trees() {
    for names in COMPOSITIONS {
        let d = load(names);
        let max = if names.contains(&"mini_ocaml.syn") { 5 } else { 7 };
        check_generated(&d, max);
    }
    let mut rng = StdRng::seed_from_u64(29);
    for _ in 0..20 {
        check_generated(&random_plain(&mut rng), 5);
    }
}
