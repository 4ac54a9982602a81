//! Visibly pushdown automata over `(`, `)` and `x`: intersection, union,
//! complement and emptiness with shortest witnesses.

use resolvable::vpda::{complement, difference, product, union, Alphabet, Vpda};

/// Words with at least one `x` directly inside every pair.
fn filled(alpha: &Alphabet) -> Vpda {
    let (open, close, x) = (0, 1, 2);
    let mut v = Vpda::new(alpha.clone(), 3, 0);
    let frame = v.add_stack_symbol();
    v.accepting[0] = true;
    v.add_internal(0, x, 0);
    v.add_call(0, open, 1, frame);
    v.add_internal(1, x, 2);
    v.add_internal(2, x, 2);
    v.add_call(2, open, 1, frame);
    v.add_return(2, close, frame, 2);
    v.add_return(2, close, frame, 0);
    v.add_return(0, close, frame, 2);
    v.add_return(0, close, frame, 0);
    v
}

/// Words of nesting depth at most one.
fn shallow(alpha: &Alphabet) -> Vpda {
    let (open, close, x) = (0, 1, 2);
    let mut v = Vpda::new(alpha.clone(), 2, 0);
    let frame = v.add_stack_symbol();
    v.accepting[0] = true;
    v.add_internal(0, x, 0);
    v.add_internal(1, x, 1);
    v.add_call(0, open, 1, frame);
    v.add_return(1, close, frame, 0);
    v
}

fn show(name: &str, v: &Vpda) {
    let words: Vec<String> = v
        .enumerate(4)
        .iter()
        .map(|w| {
            v.alphabet
                .decode(w)
                .iter()
                .map(|t| t.lexeme.as_str())
                .collect::<String>()
        })
        .map(|w| if w.is_empty() { "ε".to_string() } else { w })
        .collect();
    let shortest = v.shortest_word().map(|w| {
        v.alphabet
            .decode(&w)
            .iter()
            .map(|t| t.lexeme.clone())
            .collect::<String>()
    });
    let listing = if words.is_empty() {
        "none".to_string()
    } else {
        words.join(" ")
    };
    println!(
        "{name:<12} {:>3} states  shortest {:?}  up to 4: {listing}",
        v.states, shortest
    );
}

fn main() -> resolvable::Result<()> {
    let alpha = Alphabet::simple("(", ")", &["x"]);
    let a = filled(&alpha);
    let b = shallow(&alpha);
    show("filled", &a);
    show("shallow", &b);
    show("both", &product(&a, &b)?.trim());
    show("either", &union(&a, &b)?.trim());
    show("not filled", &complement(&a)?.trim());
    show("deep only", &difference(&a, &b)?.trim());
    Ok(())
}
