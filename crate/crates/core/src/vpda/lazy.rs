//! On-the-fly automata and the boolean operations built on them.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use super::{Alphabet, Index, Kind, Vpda};
use crate::error::{Error, Result};

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// An automaton whose transitions are computed on demand.
pub trait LazyVpda {
    type State: Clone + Eq + Hash;
    type Stack: Clone + Eq + Hash;

    fn alphabet(&self) -> &Alphabet;
    fn initial(&self) -> Self::State;
    fn is_accepting(&self, q: &Self::State) -> bool;
    fn internal(&self, q: &Self::State, a: usize) -> Vec<Self::State>;
    fn call(&self, q: &Self::State, a: usize) -> Vec<(Self::State, Self::Stack)>;
    fn ret(&self, q: &Self::State, a: usize, g: &Self::Stack) -> Vec<Self::State>;
}

/// An explicit automaton viewed lazily.
pub struct Explicit<'a> {
    v: &'a Vpda,
    ix: Index,
}

impl<'a> Explicit<'a> {
    pub fn new(v: &'a Vpda) -> Self {
        Explicit { v, ix: v.index() }
    }
}

impl LazyVpda for Explicit<'_> {
    type State = usize;
    type Stack = usize;

    fn alphabet(&self) -> &Alphabet {
        &self.v.alphabet
    }

    fn initial(&self) -> usize {
        self.v.initial
    }

    fn is_accepting(&self, q: &usize) -> bool {
        self.v.accepting[*q]
    }

    fn internal(&self, q: &usize, a: usize) -> Vec<usize> {
        self.ix.internal[*q]
            .iter()
            .filter(|(b, _)| *b == a)
            .map(|(_, r)| *r)
            .collect()
    }

    fn call(&self, q: &usize, a: usize) -> Vec<(usize, usize)> {
        self.ix.call[*q]
            .iter()
            .filter(|(b, _, _)| *b == a)
            .map(|(_, r, g)| (*r, *g))
            .collect()
    }

    fn ret(&self, q: &usize, a: usize, g: &usize) -> Vec<usize> {
        self.ix
            .ret_by
            .get(&(*q, *g))
            .map(|v| v.iter().filter(|(b, _)| *b == a).map(|(_, r)| *r).collect())
            .unwrap_or_default()
    }
}

/// Summary-set determinization of an explicit automaton. A state is the set
/// of pairs `(entry, current)` of the current context; stack symbols record the
/// caller's set and the call letter. With `complement` set, acceptance is inverted.
pub struct Determinized<'a> {
    v: &'a Vpda,
    ix: Index,
    complement: bool,
}

pub type SummarySet = Vec<(usize, usize)>;

impl<'a> Determinized<'a> {
    pub fn new(v: &'a Vpda, complement: bool) -> Self {
        Determinized {
            v,
            ix: v.index(),
            complement,
        }
    }
}

impl LazyVpda for Determinized<'_> {
    type State = SummarySet;
    type Stack = (SummarySet, usize);

    fn alphabet(&self) -> &Alphabet {
        &self.v.alphabet
    }

    fn initial(&self) -> SummarySet {
        vec![(self.v.initial, self.v.initial)]
    }

    fn is_accepting(&self, s: &SummarySet) -> bool {
        let acc = s
            .iter()
            .any(|&(p, q)| p == self.v.initial && self.v.accepting[q]);
        acc != self.complement
    }

    fn internal(&self, s: &SummarySet, a: usize) -> Vec<SummarySet> {
        let mut out = BTreeSet::new();
        for &(p, q) in s {
            for &(b, r) in &self.ix.internal[q] {
                if b == a {
                    out.insert((p, r));
                }
            }
        }
        vec![out.into_iter().collect()]
    }

    fn call(&self, s: &SummarySet, a: usize) -> Vec<(SummarySet, (SummarySet, usize))> {
        let mut out = BTreeSet::new();
        for &(_, q) in s {
            for &(b, r, _) in &self.ix.call[q] {
                if b == a {
                    out.insert((r, r));
                }
            }
        }
        vec![(out.into_iter().collect(), (s.clone(), a))]
    }

    fn ret(&self, s: &SummarySet, b: usize, g: &(SummarySet, usize)) -> Vec<SummarySet> {
        let (prev, a) = g;
        let mut inner: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(e, q) in s {
            inner.entry(e).or_default().push(q);
        }
        let mut out = BTreeSet::new();
        for &(p, q) in prev {
            for &(c, q1, gamma) in &self.ix.call[q] {
                if c != *a {
                    continue;
                }
                for &q2 in inner.get(&q1).map(Vec::as_slice).unwrap_or(&[]) {
                    for &(rb, q3) in self
                        .ix
                        .ret_by
                        .get(&(q2, gamma))
                        .map(Vec::as_slice)
                        .unwrap_or(&[])
                    {
                        if rb == b {
                            out.insert((p, q3));
                        }
                    }
                }
            }
        }
        vec![out.into_iter().collect()]
    }
}

/// Synchronous product of two lazy automata over the same alphabet.
pub struct LazyProduct<A, B> {
    pub a: A,
    pub b: B,
}

impl<A: LazyVpda, B: LazyVpda> LazyVpda for LazyProduct<A, B> {
    type State = (A::State, B::State);
    type Stack = (A::Stack, B::Stack);

    fn alphabet(&self) -> &Alphabet {
        self.a.alphabet()
    }

    fn initial(&self) -> Self::State {
        (self.a.initial(), self.b.initial())
    }

    fn is_accepting(&self, q: &Self::State) -> bool {
        self.a.is_accepting(&q.0) && self.b.is_accepting(&q.1)
    }

    fn internal(&self, q: &Self::State, x: usize) -> Vec<Self::State> {
        let ra = self.a.internal(&q.0, x);
        if ra.is_empty() {
            return vec![];
        }
        let rb = self.b.internal(&q.1, x);
        ra.iter()
            .flat_map(|p| rb.iter().map(move |r| (p.clone(), r.clone())))
            .collect()
    }

    fn call(&self, q: &Self::State, x: usize) -> Vec<(Self::State, Self::Stack)> {
        let ra = self.a.call(&q.0, x);
        if ra.is_empty() {
            return vec![];
        }
        let rb = self.b.call(&q.1, x);
        let mut out = Vec::new();
        for (p, g) in &ra {
            for (r, h) in &rb {
                out.push(((p.clone(), r.clone()), (g.clone(), h.clone())));
            }
        }
        out
    }

    fn ret(&self, q: &Self::State, x: usize, g: &Self::Stack) -> Vec<Self::State> {
        let ra = self.a.ret(&q.0, x, &g.0);
        if ra.is_empty() {
            return vec![];
        }
        let rb = self.b.ret(&q.1, x, &g.1);
        ra.iter()
            .flat_map(|p| rb.iter().map(move |r| (p.clone(), r.clone())))
            .collect()
    }
}

struct Interner<T: Clone + Eq + Hash> {
    ids: HashMap<T, usize>,
    items: Vec<T>,
}

impl<T: Clone + Eq + Hash> Interner<T> {
    fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            items: Vec::new(),
        }
    }

    /// Returns the id and whether it is new.
    fn intern(&mut self, t: T) -> (usize, bool) {
        if let Some(&i) = self.ids.get(&t) {
            return (i, false);
        }
        self.items.push(t.clone());
        self.ids.insert(t, self.items.len() - 1);
        (self.items.len() - 1, true)
    }
}

/// Explicit automaton of the states of `l` reachable along runs with a
/// consistent stack, together with the original state and stack values.
pub fn materialize<L: LazyVpda>(
    l: &L,
    limit: usize,
) -> Result<(Vpda, Vec<L::State>, Vec<L::Stack>)> {
    let alphabet = l.alphabet().clone();
    let letters: Vec<(usize, Kind)> = (0..alphabet.len()).map(|a| (a, alphabet.kind(a))).collect();
    let mut states: Interner<L::State> = Interner::new();
    let mut stacks: Interner<L::Stack> = Interner::new();
    let mut internals = Vec::new();
    let mut calls = Vec::new();
    let mut returns = Vec::new();
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let mut by_entry: HashMap<usize, Vec<usize>> = HashMap::new();
    // entry -> (caller entry, pushed symbol)
    let mut callers: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();

    let (init, _) = states.intern(l.initial());
    pairs.insert((init, init));
    by_entry.entry(init).or_default().push(init);
    work.push_back((init, init));

    macro_rules! add_pair {
        ($e:expr, $q:expr) => {{
            let (e, q) = ($e, $q);
            if pairs.insert((e, q)) {
                by_entry.entry(e).or_default().push(q);
                work.push_back((e, q));
            }
        }};
    }

    let mut ret_cache: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
    while let Some((e, q)) = work.pop_front() {
        if states.items.len() > limit {
            return Err(Error::SizeLimit(limit));
        }
        let qs = states.items[q].clone();
        for &(a, k) in &letters {
            match k {
                Kind::Internal => {
                    for r in l.internal(&qs, a) {
                        let (r, _) = states.intern(r);
                        internals.push((q, a, r));
                        add_pair!(e, r);
                    }
                }
                Kind::Call => {
                    for (r, g) in l.call(&qs, a) {
                        let (r, _) = states.intern(r);
                        let (g, _) = stacks.intern(g);
                        calls.push((q, a, r, g));
                        add_pair!(r, r);
                        let list = callers.entry(r).or_default();
                        if !list.contains(&(e, g)) {
                            list.push((e, g));
                            // existing states of the callee context may already return
                            let inside: Vec<usize> = by_entry.get(&r).cloned().unwrap_or_default();
                            for q2 in inside {
                                for (b, t) in returns_from(
                                    l,
                                    &letters,
                                    &mut states,
                                    &stacks,
                                    &mut ret_cache,
                                    q2,
                                    g,
                                ) {
                                    returns.push((q2, b, g, t));
                                    add_pair!(e, t);
                                }
                            }
                        }
                    }
                }
                Kind::Return => {}
            }
        }
        let cs: Vec<(usize, usize)> = callers.get(&e).cloned().unwrap_or_default();
        for (e0, g) in cs {
            for (b, t) in returns_from(l, &letters, &mut states, &stacks, &mut ret_cache, q, g) {
                returns.push((q, b, g, t));
                add_pair!(e0, t);
            }
        }
    }

    let mut v = Vpda::new(alphabet, states.items.len(), init);
    v.accepting = states.items.iter().map(|s| l.is_accepting(s)).collect();
    v.stack_symbols = stacks.items.len();
    v.internals = internals;
    v.calls = calls;
    v.returns = returns;
    v.normalize();
    Ok((v, states.items, stacks.items))
}

fn returns_from<L: LazyVpda>(
    l: &L,
    letters: &[(usize, Kind)],
    states: &mut Interner<L::State>,
    stacks: &Interner<L::Stack>,
    cache: &mut HashMap<(usize, usize, usize), Vec<usize>>,
    q: usize,
    g: usize,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(b, k) in letters {
        if k != Kind::Return {
            continue;
        }
        let rs = match cache.get(&(q, b, g)) {
            Some(r) => r.clone(),
            None => {
                let r: Vec<usize> = l
                    .ret(&states.items[q], b, &stacks.items[g])
                    .into_iter()
                    .map(|s| states.intern(s).0)
                    .collect();
                cache.insert((q, b, g), r.clone());
                r
            }
        };
        out.extend(rs.into_iter().map(|r| (b, r)));
    }
    out
}

fn unify(a: &Vpda, b: &Vpda) -> Result<(Vpda, Vpda)> {
    if a.alphabet == b.alphabet {
        return Ok((a.clone(), b.clone()));
    }
    let alpha = a.alphabet.merge(&b.alphabet)?;
    Ok((a.with_alphabet(&alpha)?, b.with_alphabet(&alpha)?))
}

/// Intersection, with the pair of component states for each product state.
pub fn product_with_states(
    a: &Vpda,
    b: &Vpda,
) -> Result<(Vpda, Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let (a, b) = unify(a, b)?;
    let l = LazyProduct {
        a: Explicit::new(&a),
        b: Explicit::new(&b),
    };
    let (mut v, states, stacks) = materialize(&l, DEFAULT_STATE_LIMIT)?;
    v.state_names = states
        .iter()
        .map(|(p, q)| format!("({},{})", a.state_label(*p), b.state_label(*q)))
        .collect();
    v.stack_names = stacks
        .iter()
        .map(|(g, h)| format!("({},{})", a.stack_label(*g), b.stack_label(*h)))
        .collect();
    Ok((v, states, stacks))
}

/// `L(a) ∩ L(b)`.
pub fn product(a: &Vpda, b: &Vpda) -> Result<Vpda> {
    Ok(product_with_states(a, b)?.0)
}

/// Well-matched words over the alphabet not accepted by `a`.
pub fn complement(a: &Vpda) -> Result<Vpda> {
    Ok(materialize(&Determinized::new(a, true), DEFAULT_STATE_LIMIT)?.0)
}

/// `L(a) \ L(b)`, determinizing `b` only as far as `a` explores it.
pub fn difference(a: &Vpda, b: &Vpda) -> Result<Vpda> {
    let (a, b) = unify(a, b)?;
    let l = LazyProduct {
        a: Explicit::new(&a),
        b: Determinized::new(&b, true),
    };
    Ok(materialize(&l, DEFAULT_STATE_LIMIT)?.0)
}

/// `L(a) ∪ L(b)` by disjoint union under a fresh initial state.
pub fn union(a: &Vpda, b: &Vpda) -> Result<Vpda> {
    let (a, b) = unify(a, b)?;
    let off = a.states + 1;
    let goff = a.stack_symbols;
    let mut v = Vpda::new(a.alphabet.clone(), a.states + b.states + 1, a.states);
    let init = a.states;
    v.stack_symbols = a.stack_symbols + b.stack_symbols;
    for q in 0..a.states {
        v.accepting[q] = a.accepting[q];
    }
    for q in 0..b.states {
        v.accepting[off + q] = b.accepting[q];
    }
    v.accepting[init] = a.accepting[a.initial] || b.accepting[b.initial];
    let map_a = |q: usize| q;
    let map_b = |q: usize| off + q;
    for (src, map, goff, start) in [
        (&a, &map_a as &dyn Fn(usize) -> usize, 0, a.initial),
        (&b, &map_b, goff, b.initial),
    ] {
        for &(p, x, q) in &src.internals {
            v.internals.push((map(p), x, map(q)));
            if p == start {
                v.internals.push((init, x, map(q)));
            }
        }
        for &(p, x, q, g) in &src.calls {
            v.calls.push((map(p), x, map(q), g + goff));
            if p == start {
                v.calls.push((init, x, map(q), g + goff));
            }
        }
        for &(p, x, g, q) in &src.returns {
            v.returns.push((map(p), x, g + goff, map(q)));
        }
    }
    v.normalize();
    Ok(v)
}
