//! Set-level oracle for the automaton algebra. Languages are computed by
//! walking every word up to a length bound and simulating configurations
//! directly on the transition lists.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::rngs::StdRng;
use rand::Rng;
use resolvable::vpda::{complement, difference, product, union, Alphabet, Kind, Vpda};

pub type Lang = BTreeSet<Vec<usize>>;

type Config = (usize, Vec<usize>);

pub fn alphabet() -> Alphabet {
    Alphabet::simple("(", ")", &["x"])
}

/// A small random automaton over `alphabet` accepting some word of at most
/// six letters.
pub fn random_vpda(rng: &mut StdRng, alphabet: &Alphabet) -> Vpda {
    loop {
        let v = any_vpda(rng, alphabet);
        if !language(&v, 6).is_empty() {
            return v;
        }
    }
}

fn any_vpda(rng: &mut StdRng, alphabet: &Alphabet) -> Vpda {
    let n = rng.gen_range(1..=3);
    let g = rng.gen_range(1..=2);
    let mut v = Vpda::new(alphabet.clone(), n, 0);
    for q in 0..n {
        v.accepting[q] = rng.gen_bool(0.4);
    }
    v.accepting[n - 1] = true;
    for p in 0..n {
        for a in 0..alphabet.len() {
            for q in 0..n {
                match alphabet.kind(a) {
                    Kind::Internal => {
                        if rng.gen_bool(0.3) {
                            v.add_internal(p, a, q);
                        }
                    }
                    Kind::Call => {
                        for s in 0..g {
                            if rng.gen_bool(0.2) {
                                v.add_call(p, a, q, s);
                            }
                        }
                    }
                    Kind::Return => {
                        for s in 0..g {
                            if rng.gen_bool(0.2) {
                                v.add_return(p, a, s, q);
                            }
                        }
                    }
                }
            }
        }
    }
    v.normalize();
    v
}

/// Transitions by source state and letter: target and stack symbol.
type Moves = HashMap<(usize, usize), Vec<(usize, usize)>>;

fn moves(v: &Vpda) -> Moves {
    let mut m = Moves::new();
    for &(p, a, q) in &v.internals {
        m.entry((p, a)).or_default().push((q, 0));
    }
    for &(p, a, q, g) in &v.calls {
        m.entry((p, a)).or_default().push((q, g));
    }
    for &(p, a, g, q) in &v.returns {
        m.entry((p, a)).or_default().push((q, g));
    }
    m
}

fn step(v: &Vpda, m: &Moves, configs: &HashSet<Config>, a: usize) -> HashSet<Config> {
    let mut out = HashSet::new();
    for (p, stack) in configs {
        for &(q, g) in m.get(&(*p, a)).map(Vec::as_slice).unwrap_or(&[]) {
            match v.alphabet.kind(a) {
                Kind::Internal => {
                    out.insert((q, stack.clone()));
                }
                Kind::Call => {
                    let mut s = stack.clone();
                    s.push(g);
                    out.insert((q, s));
                }
                Kind::Return => {
                    if stack.last() == Some(&g) {
                        out.insert((q, stack[..stack.len() - 1].to_vec()));
                    }
                }
            }
        }
    }
    out
}

/// Every accepted word of length at most `max_len`.
pub fn language(v: &Vpda, max_len: usize) -> Lang {
    let mut out = Lang::new();
    let start = HashSet::from([(v.initial, Vec::new())]);
    let mut word = Vec::new();
    walk(v, &moves(v), &start, &mut word, max_len, &mut out);
    out
}

fn walk(
    v: &Vpda,
    m: &Moves,
    configs: &HashSet<Config>,
    word: &mut Vec<usize>,
    max_len: usize,
    out: &mut Lang,
) {
    if configs.iter().any(|(q, s)| s.is_empty() && v.accepting[*q]) {
        out.insert(word.clone());
    }
    if word.len() == max_len {
        return;
    }
    for a in 0..v.alphabet.len() {
        let next = step(v, m, configs, a);
        if !next.is_empty() {
            word.push(a);
            walk(v, m, &next, word, max_len, out);
            word.pop();
        }
    }
}

/// Well-matched words over `alphabet` of length at most `max_len`.
pub fn well_matched(alphabet: &Alphabet, max_len: usize) -> Lang {
    let mut out = Lang::new();
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for (w, depth) in frontier {
            if depth == 0 {
                out.insert(w.clone());
            }
            if len == max_len {
                continue;
            }
            for a in 0..alphabet.len() {
                let d = match alphabet.kind(a) {
                    Kind::Call => depth + 1,
                    Kind::Internal => depth,
                    Kind::Return if depth > 0 => depth - 1,
                    Kind::Return => continue,
                };
                let mut w2 = w.clone();
                w2.push(a);
                next.push((w2, d));
            }
        }
        frontier = next;
    }
    out
}

/// Length-then-letter order, the order of `Vpda::enumerate`.
pub fn ordered(l: &Lang) -> Vec<Vec<usize>> {
    let mut v: Vec<_> = l.iter().cloned().collect();
    v.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    v
}

/// Checks every operation on one pair against set algebra on words of at
/// most `max_len` letters.
pub fn check_pair(a: &Vpda, b: &Vpda, max_len: usize) -> Result<(), String> {
    let la = language(a, max_len);
    let lb = language(b, max_len);
    let wm = well_matched(&a.alphabet, max_len);
    let ops: Vec<(&str, Vpda, Lang)> = vec![
        (
            "product",
            product(a, b).map_err(|e| e.to_string())?,
            la.intersection(&lb).cloned().collect(),
        ),
        (
            "union",
            union(a, b).map_err(|e| e.to_string())?,
            la.union(&lb).cloned().collect(),
        ),
        (
            "difference",
            difference(a, b).map_err(|e| e.to_string())?,
            la.difference(&lb).cloned().collect(),
        ),
        (
            "complement",
            complement(a).map_err(|e| e.to_string())?,
            wm.difference(&la).cloned().collect(),
        ),
        ("trim", a.trim(), la.clone()),
    ];
    check_shortest(a, &la, max_len)?;
    check_shortest(b, &lb, max_len)?;
    for (name, v, want) in &ops {
        let got = language(v, max_len);
        check_shortest(v, &got, max_len).map_err(|e| format!("{name}: {e}"))?;
        if &got != want {
            return Err(format!(
                "{name}: {} words, expected {}",
                got.len(),
                want.len()
            ));
        }
        if v.enumerate(max_len) != ordered(want) {
            return Err(format!(
                "{name}: enumerate disagrees with the simulated language"
            ));
        }
        if (name == &"trim" || name == &"product") && v.trim().states > v.states {
            return Err(format!("{name}: trimming added states"));
        }
    }
    Ok(())
}

/// The shortest word is accepted and no accepted word is shorter. `l` is
/// the language of `v` up to `max_len`.
pub fn check_shortest(v: &Vpda, l: &Lang, max_len: usize) -> Result<(), String> {
    match v.shortest_word() {
        None if l.is_empty() => Ok(()),
        None => Err(format!(
            "no shortest word, yet {} words are accepted",
            l.len()
        )),
        Some(w) => {
            let accepted = if w.len() <= max_len {
                l.contains(&w)
            } else {
                language(v, w.len()).contains(&w)
            };
            if !accepted {
                return Err(format!("shortest word {w:?} is not accepted"));
            }
            match l.iter().map(Vec::len).min() {
                Some(m) if m < w.len() => Err(format!(
                    "shortest word has {} letters, {m} suffice",
                    w.len()
                )),
                _ => Ok(()),
            }
        }
    }
}
