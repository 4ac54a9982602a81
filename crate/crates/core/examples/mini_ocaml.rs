//! Runs corpus analysis over the bundled OCaml-like programs and prints the
//! report: which files are ambiguous, where, and a suggested forbid.

use std::fs;
use std::path::Path;

use resolvable::cli::{cmd_analyze, Options};

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let grammar = fs::read_to_string(root.join("grammars/mini_ocaml.syn"))?;
    let mut corpus = Vec::new();
    for entry in fs::read_dir(root.join("corpus/mini_ocaml"))? {
        let path = entry?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        corpus.push((name, fs::read_to_string(&path)?));
    }
    let out = cmd_analyze(
        &[("mini_ocaml.syn".into(), grammar)],
        &corpus,
        &Options::default(),
    );
    print!("{}", out.text());
    Ok(())
}
