//! Complete deterministic finite acceptors: compilation from grammars,
//! Moore minimization, equivalence, complement, exact counting and sampling.

mod compile;
mod count;

pub use compile::compile;
pub use count::{count_words, random_below, sample_words, LengthCountTable};

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Word};
use crate::error::{Error, Result};

pub type StateId = usize;

/// A complete DFA. `delta` is a dense `num_states × |alphabet|` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    start: StateId,
    accepting: Vec<bool>,
    delta: Vec<StateId>,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        start: StateId,
        accepting: Vec<bool>,
        delta: Vec<Vec<StateId>>,
    ) -> Result<Self> {
        let n = accepting.len();
        if n == 0 || start >= n {
            return Err(Error::Format(format!("start state {start} out of range for {n} states")));
        }
        if delta.len() != n {
            return Err(Error::Format(format!("{} transition rows for {n} states", delta.len())));
        }
        let k = alphabet.len();
        let mut flat = Vec::with_capacity(n * k);
        for (q, row) in delta.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::Format(format!("state {q} has {} transitions, expected {k}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&t| t >= n) {
                return Err(Error::Format(format!("state {q} targets missing state {bad}")));
            }
            flat.extend(row);
        }
        Ok(Self {
            alphabet,
            start,
            accepting,
            delta: flat,
        })
    }

    pub(crate) fn from_parts(alphabet: Alphabet, start: StateId, accepting: Vec<bool>, delta: Vec<StateId>) -> Self {
        debug_assert_eq!(delta.len(), accepting.len() * alphabet.len());
        Self {
            alphabet,
            start,
            accepting,
            delta,
        }
    }

    /// The one-state DFA accepting everything (or nothing).
    pub fn universal(alphabet: Alphabet, accept: bool) -> Self {
        let k = alphabet.len();
        Self::from_parts(alphabet, 0, vec![accept], vec![0; k])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    /// Number of states including any explicit sink.
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    /// Number of states once non-accepting sinks are dropped, i.e. the size of the
    /// trimmed automaton. This is the conventional "minimal DFA size" when applied
    /// to a minimized DFA; the empty language still counts its start state.
    pub fn state_count(&self) -> usize {
        let live = self.co_accessible();
        let reach = self.reachable();
        let n = (0..self.num_states()).filter(|&q| live[q] && reach[q]).count();
        n.max(1)
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting.iter().enumerate().filter(|(_, &a)| a).map(|(q, _)| q)
    }

    #[inline]
    pub fn next(&self, q: StateId, symbol: u8) -> StateId {
        self.delta[q * self.alphabet.len() + symbol as usize]
    }

    pub fn run_from(&self, q: StateId, word: &[u8]) -> StateId {
        word.iter().fold(q, |q, &s| self.next(q, s))
    }

    /// Symbols must be valid indices of this DFA's alphabet.
    pub fn accepts(&self, word: &[u8]) -> bool {
        self.accepting[self.run_from(self.start, word)]
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            accepting: self.accepting.iter().map(|a| !a).collect(),
            ..self.clone()
        }
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(q) = stack.pop() {
            for s in 0..self.alphabet.len() as u8 {
                let t = self.next(q, s);
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// States from which some accepting state is reachable.
    fn co_accessible(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut reverse = vec![Vec::new(); n];
        for q in 0..n {
            for s in 0..self.alphabet.len() as u8 {
                reverse[self.next(q, s)].push(q);
            }
        }
        let mut live = self.accepting.clone();
        let mut stack: Vec<StateId> = self.accepting_states().collect();
        while let Some(q) = stack.pop() {
            for &p in &reverse[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// Minimal equivalent DFA via Moore partition refinement, renumbered canonically.
    pub fn minimize(&self) -> Dfa {
        let k = self.alphabet.len();
        let reach = self.reachable();
        let states: Vec<StateId> = (0..self.num_states()).filter(|&q| reach[q]).collect();

        let mut class = vec![u32::MAX; self.num_states()];
        for &q in &states {
            class[q] = self.accepting[q] as u32;
        }
        let mut blocks = if states.iter().any(|&q| self.accepting[q]) && states.iter().any(|&q| !self.accepting[q]) {
            2
        } else {
            1
        };
        if blocks == 1 {
            for &q in &states {
                class[q] = 0;
            }
        }
        loop {
            let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next_class = vec![u32::MAX; self.num_states()];
            for &q in &states {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k as u8).map(|s| class[self.next(q, s)]));
                let fresh = ids.len() as u32;
                next_class[q] = *ids.entry(sig).or_insert(fresh);
            }
            let refined = ids.len();
            class = next_class;
            if refined == blocks {
                break;
            }
            blocks = refined;
        }

        let mut accepting = vec![false; blocks];
        let mut delta = vec![0; blocks * k];
        for &q in &states {
            let c = class[q] as usize;
            accepting[c] = self.accepting[q];
            for s in 0..k {
                delta[c * k + s] = class[self.next(q, s as u8)] as usize;
            }
        }
        Dfa::from_parts(self.alphabet.clone(), class[self.start] as usize, accepting, delta).canonical()
    }

    /// Renumbers reachable states breadth-first from the start, visiting symbols in
    /// index order. Unreachable states are dropped.
    pub fn canonical(&self) -> Dfa {
        let k = self.alphabet.len();
        let mut order = vec![usize::MAX; self.num_states()];
        let mut queue = VecDeque::from([self.start]);
        let mut visited = vec![self.start];
        order[self.start] = 0;
        while let Some(q) = queue.pop_front() {
            for s in 0..k as u8 {
                let t = self.next(q, s);
                if order[t] == usize::MAX {
                    order[t] = visited.len();
                    visited.push(t);
                    queue.push_back(t);
                }
            }
        }
        let accepting = visited.iter().map(|&q| self.accepting[q]).collect();
        let delta = visited
            .iter()
            .flat_map(|&q| (0..k as u8).map(move |s| (q, s)))
            .map(|(q, s)| order[self.next(q, s)])
            .collect();
        Dfa::from_parts(self.alphabet.clone(), 0, accepting, delta)
    }

    /// Shortest (then lexicographically least) word accepted by exactly one of the two DFAs.
    pub fn distinguishing_word(&self, other: &Dfa) -> Result<Option<Word>> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet.to_string(), other.alphabet.to_string()));
        }
        Ok(pair_search(self, self.start, other, other.start))
    }

    /// Language equivalence via emptiness of the symmetric-difference product.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool> {
        self.distinguishing_word(other).map(|w| w.is_none())
    }

    /// Shortest (shortlex-least) word that leads from the start to each state.
    pub fn access_words(&self) -> Vec<Option<Word>> {
        let k = self.alphabet.len();
        let mut access: Vec<Option<Word>> = vec![None; self.num_states()];
        access[self.start] = Some(Word::empty());
        let mut queue = VecDeque::from([self.start]);
        while let Some(q) = queue.pop_front() {
            for s in 0..k as u8 {
                let t = self.next(q, s);
                if access[t].is_none() {
                    let mut w = access[q].clone().unwrap();
                    w.0.push(s);
                    access[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
        access
    }

    /// Shortest (shortlex-least) word leading from `q` into an accepting state.
    pub fn shortest_accepted_from(&self, q: StateId) -> Option<Word> {
        let k = self.alphabet.len();
        let mut parent: Vec<Option<(StateId, u8)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[q] = true;
        let mut queue = VecDeque::from([q]);
        while let Some(p) = queue.pop_front() {
            if self.accepting[p] {
                let mut word = Vec::new();
                let mut cur = p;
                while let Some((prev, s)) = parent[cur] {
                    word.push(s);
                    cur = prev;
                }
                word.reverse();
                return Some(Word(word));
            }
            for s in 0..k as u8 {
                let t = self.next(p, s);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((p, s));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Shortest suffix accepted from exactly one of `p` and `q`.
    pub fn distinguishing_suffix(&self, p: StateId, q: StateId) -> Option<Word> {
        pair_search(self, p, self, q)
    }

    pub fn to_json(&self) -> String {
        let k = self.alphabet.len();
        let file = DfaFile {
            alphabet: self.alphabet.to_string(),
            start: self.start,
            accepting: self.accepting_states().collect(),
            delta: self.delta.chunks(k).map(<[StateId]>::to_vec).collect(),
        };
        serde_json::to_string(&file).expect("dfa serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DfaFile = serde_json::from_str(text)?;
        let alphabet = Alphabet::new(&file.alphabet)?;
        let n = file.delta.len();
        let mut accepting = vec![false; n];
        for q in file.accepting {
            *accepting
                .get_mut(q)
                .ok_or_else(|| Error::Format(format!("accepting state {q} out of range")))? = true;
        }
        Dfa::new(alphabet, file.start, accepting, file.delta)
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(out, "  init -> q{};", self.start);
        for q in 0..self.num_states() {
            // group parallel edges into one labelled arrow
            let mut by_target: Vec<(StateId, String)> = Vec::new();
            for s in 0..self.alphabet.len() as u8 {
                let t = self.next(q, s);
                match by_target.iter_mut().find(|(x, _)| *x == t) {
                    Some((_, label)) => {
                        label.push(',');
                        label.push(self.alphabet.symbol(s));
                    }
                    None => by_target.push((t, self.alphabet.symbol(s).to_string())),
                }
            }
            for (t, label) in by_target {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{label}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn pair_search(a: &Dfa, a_start: StateId, b: &Dfa, b_start: StateId) -> Option<Word> {
    let k = a.alphabet.len();
    let nb = b.num_states();
    let idx = |p: StateId, q: StateId| p * nb + q;
    let mut parent: HashMap<usize, (usize, u8)> = HashMap::new();
    let mut seen = vec![false; a.num_states() * nb];
    seen[idx(a_start, b_start)] = true;
    let mut queue = VecDeque::from([(a_start, b_start)]);
    while let Some((p, q)) = queue.pop_front() {
        if a.accepting[p] != b.accepting[q] {
            let mut word = Vec::new();
            let mut cur = idx(p, q);
            while let Some(&(prev, s)) = parent.get(&cur) {
                word.push(s);
                cur = prev;
            }
            word.reverse();
            return Some(Word(word));
        }
        for s in 0..k as u8 {
            let (p2, q2) = (a.next(p, s), b.next(q, s));
            if !seen[idx(p2, q2)] {
                seen[idx(p2, q2)] = true;
                parent.insert(idx(p2, q2), (idx(p, q), s));
                queue.push_back((p2, q2));
            }
        }
    }
    None
}

#[derive(Serialize, Deserialize)]
struct DfaFile {
    alphabet: String,
    start: StateId,
    accepting: Vec<StateId>,
    delta: Vec<Vec<StateId>>,
}
