//! Well-matched reachability, emptiness, shortest words and trimming.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::rc::Rc;

use super::{Index, Kind, Vpda};

/// Length of the shortest well-matched word leading from one state to
/// another, for every pair where such a word exists.
pub struct WellMatched {
    dist: HashMap<(usize, usize), u32>,
    from: Vec<Vec<(usize, u32)>>,
    cost_cache: RefCell<HashMap<Vec<usize>, Rc<Vec<Option<u32>>>>>,
}

/// One transition of a run. `stack` is the pushed or popped symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub from: usize,
    pub letter: usize,
    pub to: usize,
    pub stack: Option<usize>,
}

impl WellMatched {
    pub fn new(v: &Vpda) -> WellMatched {
        let n = v.states;
        let ix = v.index();
        let mut calls_to: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &(x, _, e, g) in &v.calls {
            calls_to[e].push((x, g));
        }
        let mut dist: HashMap<(usize, usize), u32> = HashMap::new();
        let mut from: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
        let mut to: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
        let mut heap: BinaryHeap<Reverse<(u32, usize, usize)>> =
            (0..n).map(|q| Reverse((0, q, q))).collect();
        let mut best: HashMap<(usize, usize), u32> = (0..n).map(|q| ((q, q), 0)).collect();
        let mut relax =
            |heap: &mut BinaryHeap<Reverse<(u32, usize, usize)>>, p: usize, q: usize, d: u32| {
                let e = best.entry((p, q)).or_insert(u32::MAX);
                if d < *e {
                    *e = d;
                    heap.push(Reverse((d, p, q)));
                }
            };
        while let Some(Reverse((d, p, q))) = heap.pop() {
            if dist.contains_key(&(p, q)) {
                continue;
            }
            dist.insert((p, q), d);
            from[p].push((q, d));
            to[q].push((p, d));
            for &(_, r) in &ix.internal[q] {
                relax(&mut heap, p, r, d + 1);
            }
            // (p, q) as the part before a call from q
            for &(_, q1, g) in &ix.call[q] {
                for &(q2, d2) in &from[q1] {
                    for &(_, q3) in ix.ret_by.get(&(q2, g)).map(Vec::as_slice).unwrap_or(&[]) {
                        relax(&mut heap, p, q3, d + d2 + 2);
                    }
                }
            }
            // (p, q) as the body of a call into p
            for &(x, g) in &calls_to[p] {
                let rets = ix.ret_by.get(&(q, g)).map(Vec::as_slice).unwrap_or(&[]);
                if rets.is_empty() {
                    continue;
                }
                for &(s, d0) in &to[x] {
                    for &(_, q3) in rets {
                        relax(&mut heap, s, q3, d0 + d + 2);
                    }
                }
            }
        }
        WellMatched {
            dist,
            from,
            cost_cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn dist(&self, p: usize, q: usize) -> Option<u32> {
        self.dist.get(&(p, q)).copied()
    }

    /// States reachable from `p` by a well-matched word, with distances.
    pub fn reachable(&self, p: usize) -> &[(usize, u32)] {
        &self.from[p]
    }

    /// Per-state completion costs for a given stack (bottom first).
    fn costs(&self, v: &Vpda, ix: &Index, stack: &[usize]) -> Rc<Vec<Option<u32>>> {
        if let Some(c) = self.cost_cache.borrow().get(stack) {
            return c.clone();
        }
        let n = v.states;
        let c: Vec<Option<u32>> = match stack.split_last() {
            None => (0..n)
                .map(|x| {
                    self.from[x]
                        .iter()
                        .filter(|(f, _)| v.accepting[*f])
                        .map(|(_, d)| *d)
                        .min()
                })
                .collect(),
            Some((&g, rest)) => {
                let below = self.costs(v, ix, rest);
                let exits: Vec<(usize, u32)> = v
                    .returns
                    .iter()
                    .filter(|r| r.2 == g)
                    .filter_map(|&(q2, _, _, q3)| below[q3].map(|c| (q2, c + 1)))
                    .collect();
                (0..n)
                    .map(|x| {
                        exits
                            .iter()
                            .filter_map(|&(q2, c)| self.dist(x, q2).map(|d| d + c))
                            .min()
                    })
                    .collect()
            }
        };
        let c = Rc::new(c);
        self.cost_cache
            .borrow_mut()
            .insert(stack.to_vec(), c.clone());
        c
    }

    /// Length of the shortest suffix leading from configuration `(q, stack)` to acceptance.
    pub(crate) fn completion_cost(
        &self,
        v: &Vpda,
        ix: &Index,
        q: usize,
        stack: &[usize],
    ) -> Option<u32> {
        self.costs(v, ix, stack)[q]
    }
}

impl Vpda {
    pub fn well_matched(&self) -> WellMatched {
        WellMatched::new(self)
    }

    pub fn is_empty(&self) -> bool {
        let wm = self.well_matched();
        !wm.reachable(self.initial)
            .iter()
            .any(|(f, _)| self.accepting[*f])
    }

    /// A shortest accepted word, least in the alphabet order among those, with an accepting run.
    pub fn shortest_run(&self) -> Option<(Vec<usize>, Vec<Step>)> {
        let wm = self.well_matched();
        let ix = self.index();
        let total = wm.completion_cost(self, &ix, self.initial, &[])?;
        // layer entries: (state, stack, predecessor index, step taken)
        type Node = (usize, Vec<usize>, usize, Option<Step>);
        let mut layers: Vec<Vec<Node>> = vec![vec![(self.initial, Vec::new(), 0, None)]];
        for k in 0..total {
            let remaining = total - k - 1;
            let cur = layers.last().expect("non-empty");
            let mut chosen: Option<Vec<Node>> = None;
            for a in 0..self.alphabet.len() {
                let mut next: Vec<Node> = Vec::new();
                let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
                for (i, (q, stack, _, _)) in cur.iter().enumerate() {
                    let mut push = |r: usize, s: Vec<usize>, g: Option<usize>| {
                        if wm.completion_cost(self, &ix, r, &s) == Some(remaining)
                            && seen.insert((r, s.clone()))
                        {
                            next.push((
                                r,
                                s,
                                i,
                                Some(Step {
                                    from: *q,
                                    letter: a,
                                    to: r,
                                    stack: g,
                                }),
                            ));
                        }
                    };
                    match self.alphabet.kind(a) {
                        Kind::Internal => {
                            for &(b, r) in &ix.internal[*q] {
                                if b == a {
                                    push(r, stack.clone(), None);
                                }
                            }
                        }
                        Kind::Call => {
                            for &(b, r, g) in &ix.call[*q] {
                                if b == a {
                                    let mut s = stack.clone();
                                    s.push(g);
                                    push(r, s, Some(g));
                                }
                            }
                        }
                        Kind::Return => {
                            if let Some((&top, rest)) = stack.split_last() {
                                for &(b, g, r) in &ix.ret[*q] {
                                    if b == a && g == top {
                                        push(r, rest.to_vec(), Some(g));
                                    }
                                }
                            }
                        }
                    }
                }
                if !next.is_empty() {
                    chosen = Some(next);
                    break;
                }
            }
            layers.push(chosen.expect("a letter continues every minimal completion"));
        }
        let last = layers.last().expect("non-empty");
        let mut idx = last
            .iter()
            .position(|(q, s, _, _)| s.is_empty() && self.accepting[*q])?;
        let mut steps = Vec::new();
        for layer in layers.iter().skip(1).rev() {
            let (_, _, pred, step) = &layer[idx];
            steps.push(step.expect("non-initial layer"));
            idx = *pred;
        }
        steps.reverse();
        let word = steps.iter().map(|s| s.letter).collect();
        Some((word, steps))
    }

    /// Every accepting run on `word`; exponential in the worst case.
    pub fn accepting_runs(&self, word: &[usize]) -> Vec<Vec<Step>> {
        let ix = self.index();
        let mut out = Vec::new();
        let mut steps = Vec::new();
        self.runs_from(
            &ix,
            word,
            self.initial,
            &mut Vec::new(),
            &mut steps,
            &mut out,
        );
        out
    }

    fn runs_from(
        &self,
        ix: &Index,
        word: &[usize],
        q: usize,
        stack: &mut Vec<usize>,
        steps: &mut Vec<Step>,
        out: &mut Vec<Vec<Step>>,
    ) {
        let Some((&a, rest)) = word.split_first() else {
            if stack.is_empty() && self.accepting[q] {
                out.push(steps.clone());
            }
            return;
        };
        match self.alphabet.kind(a) {
            Kind::Internal => {
                for &(b, r) in &ix.internal[q] {
                    if b == a {
                        steps.push(Step {
                            from: q,
                            letter: a,
                            to: r,
                            stack: None,
                        });
                        self.runs_from(ix, rest, r, stack, steps, out);
                        steps.pop();
                    }
                }
            }
            Kind::Call => {
                for &(b, r, g) in &ix.call[q] {
                    if b == a {
                        stack.push(g);
                        steps.push(Step {
                            from: q,
                            letter: a,
                            to: r,
                            stack: Some(g),
                        });
                        self.runs_from(ix, rest, r, stack, steps, out);
                        steps.pop();
                        stack.pop();
                    }
                }
            }
            Kind::Return => {
                let Some(top) = stack.pop() else { return };
                for &(b, g, r) in &ix.ret[q] {
                    if b == a && g == top {
                        steps.push(Step {
                            from: q,
                            letter: a,
                            to: r,
                            stack: Some(g),
                        });
                        self.runs_from(ix, rest, r, stack, steps, out);
                        steps.pop();
                    }
                }
                stack.push(top);
            }
        }
    }

    pub fn shortest_word(&self) -> Option<Vec<usize>> {
        self.shortest_run().map(|(w, _)| w)
    }

    /// Removes every state and transition that is not on a successful run.
    pub fn trim(&self) -> Vpda {
        self.trim_with_map().0
    }

    /// Trimmed automaton and the new index of each old state.
    pub fn trim_with_map(&self) -> (Vpda, Vec<Option<usize>>) {
        let wm = self.well_matched();
        let n = self.states;
        let reach = |e: usize| wm.reachable(e).iter().map(|(x, _)| *x);

        // contexts: None is the top level, Some((entry, pushed)) a called context
        type Ctx = Option<(usize, usize)>;
        let entry = |k: &Ctx| k.map(|(e, _)| e).unwrap_or(self.initial);
        let mut calls_from: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &(q, _, e, g) in &self.calls {
            calls_from[q].push((e, g));
        }
        let mut live: Vec<Ctx> = vec![None];
        let mut live_set: HashSet<Ctx> = HashSet::from([None]);
        // child context -> [(parent, calling state)]
        let mut parents: HashMap<(usize, usize), Vec<(Ctx, usize)>> = HashMap::new();
        let mut i = 0;
        while i < live.len() {
            let k = live[i];
            i += 1;
            for x in reach(entry(&k)) {
                for &(e, g) in &calls_from[x] {
                    let list = parents.entry((e, g)).or_default();
                    if !list.contains(&(k, x)) {
                        list.push((k, x));
                    }
                    if live_set.insert(Some((e, g))) {
                        live.push(Some((e, g)));
                    }
                }
            }
        }

        let mut good: HashMap<Ctx, HashSet<usize>> = HashMap::new();
        good.insert(
            None,
            reach(self.initial)
                .filter(|&x| wm.reachable(x).iter().any(|(f, _)| self.accepting[*f]))
                .collect(),
        );
        let mut rets_by_pop: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for &(q2, _, g, q3) in &self.returns {
            rets_by_pop.entry(g).or_default().push((q2, q3));
        }
        let exits = |good: &HashMap<Ctx, HashSet<usize>>, e: usize, g: usize| -> HashSet<usize> {
            let mut out = HashSet::new();
            for (q2, q3) in rets_by_pop.get(&g).map(Vec::as_slice).unwrap_or(&[]) {
                if wm.dist(e, *q2).is_none() {
                    continue;
                }
                let ok = parents.get(&(e, g)).is_some_and(|ps| {
                    ps.iter()
                        .any(|(k, _)| good.get(k).is_some_and(|s| s.contains(q3)))
                });
                if ok {
                    out.insert(*q2);
                }
            }
            out
        };
        loop {
            let mut changed = false;
            for k in live.iter().skip(1) {
                let (e, g) = k.expect("called context");
                let ex = exits(&good, e, g);
                let set: HashSet<usize> = reach(e)
                    .filter(|&x| ex.iter().any(|&q2| wm.dist(x, q2).is_some()))
                    .collect();
                let old = good.entry(*k).or_default();
                if set.len() != old.len() {
                    *old = set;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let empty = HashSet::new();
        let good_of = |k: &Ctx| good.get(k).unwrap_or(&empty);
        let mut keep_state = vec![false; n];
        keep_state[self.initial] = true;
        for s in good.values() {
            for &x in s {
                keep_state[x] = true;
            }
        }
        let mut internals = Vec::new();
        let mut calls = Vec::new();
        let mut returns = Vec::new();
        let ix = self.index();
        for k in &live {
            let e0 = entry(k);
            let g_k = good_of(k);
            for x in reach(e0) {
                for &(a, y) in &ix.internal[x] {
                    if g_k.contains(&y) {
                        internals.push((x, a, y));
                    }
                }
                for &(a, e, g) in &ix.call[x] {
                    let useful = rets_by_pop.get(&g).is_some_and(|rs| {
                        rs.iter()
                            .any(|(q2, q3)| wm.dist(e, *q2).is_some() && g_k.contains(q3))
                    });
                    if useful {
                        calls.push((x, a, e, g));
                    }
                }
            }
        }
        for &(q2, b, g, q3) in &self.returns {
            let useful = live.iter().skip(1).any(|k| {
                let (e, g2) = k.expect("called context");
                g2 == g
                    && wm.dist(e, q2).is_some()
                    && parents
                        .get(&(e, g))
                        .is_some_and(|ps| ps.iter().any(|(p, _)| good_of(p).contains(&q3)))
            });
            if useful {
                returns.push((q2, b, g, q3));
            }
        }

        let mut map = vec![None; n];
        let mut count = 0;
        for q in 0..n {
            if keep_state[q] {
                map[q] = Some(count);
                count += 1;
            }
        }
        let m = |q: usize| map[q].expect("kept state");
        let mut v = Vpda::new(self.alphabet.clone(), count, m(self.initial));
        v.stack_symbols = self.stack_symbols;
        v.stack_names = self.stack_names.clone();
        for q in 0..n {
            if let Some(i) = map[q] {
                v.accepting[i] = self.accepting[q] && good_of(&None).contains(&q);
                if let Some(name) = self.state_names.get(q) {
                    v.state_names.push(name.clone());
                } else if !self.state_names.is_empty() {
                    v.state_names.push(q.to_string());
                }
            }
        }
        v.internals = internals
            .into_iter()
            .map(|(p, a, q)| (m(p), a, m(q)))
            .collect();
        v.calls = calls
            .into_iter()
            .map(|(p, a, q, g)| (m(p), a, m(q), g))
            .collect();
        v.returns = returns
            .into_iter()
            .map(|(p, a, g, q)| (m(p), a, g, m(q)))
            .collect();
        v.normalize();
        (v, map)
    }
}
