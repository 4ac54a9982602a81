use clap::Parser;
use resolvable::cli::{execute, Cli};

fn main() {
    let (text, code) = execute(Cli::parse());
    print!("{text}");
    std::process::exit(code);
}
