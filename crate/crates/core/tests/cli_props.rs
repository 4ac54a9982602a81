mod common;

use std::fs;
use std::process::Command;

use common::{load, CORPUS_DIR, GRAMMAR_DIR};
use proptest::prelude::*;
use resolvable::cli::{analyze_with, parse_records, parse_with, render_text, Options};
use resolvable::dynamic::{resolve_word, WordVerdict};
use resolvable::parser::Parser;

fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(format!("{CORPUS_DIR}/mini_ocaml"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

fn program() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("1"),
        Just("2"),
        Just("+"),
        Just("*"),
        Just(";"),
        Just("("),
        Just(")"),
        Just("["),
        Just("]"),
    ];
    prop::collection::vec(piece, 1..8).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exit_code_follows_the_verdict(src in program()) {
        let defn = load(&["running.syn", "sequence.syn"]);
        let parser = Parser::new(&defn).unwrap();
        let out = parse_with(&defn, "p", &src, &Options::default());
        let want = match resolve_word(&parser, &src, &Default::default()) {
            Err(_) => 1,
            Ok(WordVerdict::Unambiguous(_)) => 0,
            Ok(WordVerdict::Resolvable(_)) | Ok(WordVerdict::Inconclusive(_)) => 1,
            Ok(WordVerdict::Unresolvable(_)) => 2,
        };
        prop_assert_eq!(out.exit, want, "{}", out.text());
        let back = parse_records(&out.json()).unwrap();
        prop_assert_eq!(render_text(&back), out.text());
    }
}

#[test]
fn corpus_summary() {
    let defn = load(&["mini_ocaml.syn"]);
    let out = analyze_with(&defn, &corpus(), &Options::default());
    let text = out.text();
    assert!(text.starts_with("files: 10\nclean: 7\nresolvable: 0\nunresolvable: 3\n"), "{text}");
    assert!(text.contains("distinct ambiguity sites: 1\n"), "{text}");
    assert!(text.contains("suggestion: forbid list.head = seq"), "{text}");
    assert_eq!(out.exit, 2);
    assert_eq!(render_text(&parse_records(&out.json()).unwrap()), text);
}

#[test]
fn clean_files_do_not_change_the_exit_code() {
    let defn = load(&["mini_ocaml.syn"]);
    let mut files = corpus();
    let before = analyze_with(&defn, &files, &Options::default());
    files.push(("11_extra.ml".into(), "let y = 1 + 2\nlet z = y * 3\n".into()));
    let after = analyze_with(&defn, &files, &Options::default());
    assert_eq!(after.exit, before.exit);
    assert!(after.text().contains("clean: 8\n"), "{}", after.text());

    let clean: Vec<_> = corpus().into_iter().filter(|(_, s)| !s.contains(';')).collect();
    let out = analyze_with(&defn, &clean, &Options::default());
    assert_eq!(out.exit, 0, "{}", out.text());
}

#[test]
fn json_round_trips_for_every_shipped_example() {
    let cases: &[(&[&str], &str)] = &[
        (&["running.syn"], "1 + 2 + 3"),
        (&["running.syn"], "1 + 2 * 3"),
        (&["running.syn"], "1 + + 2"),
        (&["running.syn", "sequence.syn"], "[1 ; 2]"),
        (&["orc.syn", "arith.syn"], "1 + 2 >x> f(x)"),
        (&["orc.syn", "arith.syn", "cmp.syn"], "42 >x> f(x)"),
        (&["mini_ocaml.syn"], "let x = Foo.f"),
    ];
    for (names, src) in cases {
        let out = parse_with(&load(names), "p", src, &Options::default());
        assert_eq!(render_text(&parse_records(&out.json()).unwrap()), out.text(), "{src}");
    }
}

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_resolvable")).args(args).output().unwrap();
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

#[test]
fn binary_subcommands() {
    let g = |n: &str| format!("{GRAMMAR_DIR}/{n}");
    let (out, code) = run(&["check", &g("abc.syn")]);
    assert_eq!((out.as_str(), code), ("statically resolvable (no-marks-no-parens)\n", 0));

    let (out, code) = run(&["parse", "-g", &g("running.syn"), "-e", "1 + 2 + 3"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("Ambiguity error with 2 alternatives:"), "{out}");

    let (out, code) = run(&["parse", "--format", "json", "-g", &g("running.syn"), "-g", &g("sequence.syn"), "-e", "[1 ; 2]"]);
    assert_eq!(code, 2);
    assert!(render_text(&parse_records(&out).unwrap()).starts_with("Unresolvable ambiguity error"));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.ml"), "let x = 1 + 2\n").unwrap();
    let (out, code) = run(&["analyze", "-g", &g("mini_ocaml.syn"), dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("files: 1\nclean: 1\n"), "{out}");

    let (_, code) = run(&["parse", "-g", &g("missing.syn"), "-e", "1"]);
    assert_eq!(code, 1);
}

