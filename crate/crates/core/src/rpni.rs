//! RPNI state merging over a prefix-tree acceptor, and the characteristic samples
//! that make it identify a target DFA.
//!
//! Blue states are tried in shortlex order of their prefix and merged into the first
//! red state (again in shortlex order) that yields a consistent automaton; if none
//! does, the blue state is promoted. A merge folds the blue subtree into the red
//! side and is rolled back through an undo log on the first label conflict.

use std::collections::BTreeSet;
use std::fmt;

use crate::alphabet::{Alphabet, Word};
use crate::automata::Dfa;
use crate::datagen::{Label, LabeledCorpus};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Unknown,
    Accepting,
    Rejecting,
}

/// Trie over the sample words. Node ids are in shortlex order of their prefixes,
/// so the root is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixTreeAcceptor {
    alphabet: Alphabet,
    trans: Vec<u32>,
    labels: Vec<NodeLabel>,
}

impl PrefixTreeAcceptor {
    pub fn build(positives: &BTreeSet<Word>, negatives: &BTreeSet<Word>, alphabet: &Alphabet) -> Result<Self> {
        let k = alphabet.len();
        let mut trans = vec![NONE; k];
        let mut labels = vec![NodeLabel::Unknown];
        let mut insert = |word: &Word, label: NodeLabel| -> Result<()> {
            alphabet.check_word(word)?;
            let mut q = 0usize;
            for &s in word.iter() {
                let slot = q * k + s as usize;
                if trans[slot] == NONE {
                    trans[slot] = labels.len() as u32;
                    labels.push(NodeLabel::Unknown);
                    trans.extend(std::iter::repeat_n(NONE, k));
                }
                q = trans[slot] as usize;
            }
            match labels[q] {
                NodeLabel::Unknown => labels[q] = label,
                existing if existing != label => {
                    return Err(Error::InconsistentSample {
                        word: alphabet.render(word),
                    })
                }
                _ => {}
            }
            Ok(())
        };
        for w in positives {
            insert(w, NodeLabel::Accepting)?;
        }
        for w in negatives {
            insert(w, NodeLabel::Rejecting)?;
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            trans,
            labels,
        }
        .renumbered())
    }

    /// Breadth-first renumbering with symbols visited in index order.
    fn renumbered(self) -> Self {
        let k = self.alphabet.len();
        let n = self.labels.len();
        let mut order = Vec::with_capacity(n);
        let mut new_id = vec![NONE; n];
        new_id[0] = 0;
        order.push(0usize);
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for s in 0..k {
                let t = self.trans[q * k + s];
                if t != NONE {
                    new_id[t as usize] = order.len() as u32;
                    order.push(t as usize);
                }
            }
            i += 1;
        }
        let mut trans = vec![NONE; n * k];
        let mut labels = vec![NodeLabel::Unknown; n];
        for (new, &old) in order.iter().enumerate() {
            labels[new] = self.labels[old];
            for s in 0..k {
                let t = self.trans[old * k + s];
                if t != NONE {
                    trans[new * k + s] = new_id[t as usize];
                }
            }
        }
        Self {
            alphabet: self.alphabet,
            trans,
            labels,
        }
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, q: usize) -> NodeLabel {
        self.labels[q]
    }

    pub fn child(&self, q: usize, symbol: u8) -> Option<usize> {
        let t = self.trans[q * self.alphabet.len() + symbol as usize];
        (t != NONE).then_some(t as usize)
    }

    /// Accepting/rejecting for sample words, `Unknown` for everything else.
    pub fn classify(&self, word: &[u8]) -> NodeLabel {
        let mut q = 0;
        for &s in word {
            match self.child(q, s) {
                Some(t) => q = t,
                None => return NodeLabel::Unknown,
            }
        }
        self.labels[q]
    }
}

/// One attempted merge, for the audit log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergeEvent {
    pub red: usize,
    pub blue: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct RpniOutcome {
    pub dfa: Dfa,
    pub pta_states: usize,
    pub red_states: usize,
    pub log: Vec<MergeEvent>,
}

impl RpniOutcome {
    /// One line per attempted merge and a closing summary line.
    pub fn log_text(&self) -> String {
        let mut out = String::new();
        for e in &self.log {
            out.push_str(&format!(
                "merge red={} blue={} {}\n",
                e.red,
                e.blue,
                if e.accepted { "accepted" } else { "rejected" }
            ));
        }
        out.push_str(&format!(
            "pta_states={} red_states={} output_states={}\n",
            self.pta_states,
            self.red_states,
            self.dfa.num_states()
        ));
        out
    }
}

impl fmt::Display for MergeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {} ({})", self.red, self.blue, if self.accepted { "ok" } else { "conflict" })
    }
}

enum Undo {
    Trans(usize, u32),
    Label(usize, NodeLabel),
}

struct Merger {
    k: usize,
    trans: Vec<u32>,
    labels: Vec<NodeLabel>,
    undo: Vec<Undo>,
}

impl Merger {
    fn set_trans(&mut self, slot: usize, value: u32) {
        self.undo.push(Undo::Trans(slot, self.trans[slot]));
        self.trans[slot] = value;
    }

    fn rollback(&mut self) {
        while let Some(u) = self.undo.pop() {
            match u {
                Undo::Trans(slot, v) => self.trans[slot] = v,
                Undo::Label(q, l) => self.labels[q] = l,
            }
        }
    }

    /// Redirects `slot` (the edge into `blue`) to `red` and folds the blue subtree in.
    fn try_merge(&mut self, red: usize, blue: usize, slot: usize) -> bool {
        self.undo.clear();
        self.set_trans(slot, red as u32);
        let mut stack = vec![(red, blue)];
        while let Some((q, x)) = stack.pop() {
            let lx = self.labels[x];
            if lx != NodeLabel::Unknown {
                match self.labels[q] {
                    NodeLabel::Unknown => {
                        self.undo.push(Undo::Label(q, NodeLabel::Unknown));
                        self.labels[q] = lx;
                    }
                    lq if lq != lx => {
                        self.rollback();
                        return false;
                    }
                    _ => {}
                }
            }
            for s in 0..self.k {
                let child = self.trans[x * self.k + s];
                if child == NONE {
                    continue;
                }
                let target = self.trans[q * self.k + s];
                if target == NONE {
                    self.set_trans(q * self.k + s, child);
                } else {
                    stack.push((target as usize, child as usize));
                }
            }
        }
        true
    }
}

/// Learns a DFA consistent with the sample. Unknown states and missing transitions
/// are completed as rejecting; the result is minimized and canonically numbered.
pub fn rpni(positives: &BTreeSet<Word>, negatives: &BTreeSet<Word>, alphabet: &Alphabet) -> Result<Dfa> {
    rpni_with_log(positives, negatives, alphabet).map(|o| o.dfa)
}

pub fn rpni_with_log(
    positives: &BTreeSet<Word>,
    negatives: &BTreeSet<Word>,
    alphabet: &Alphabet,
) -> Result<RpniOutcome> {
    let pta = PrefixTreeAcceptor::build(positives, negatives, alphabet)?;
    let k = alphabet.len();
    let n = pta.num_states();
    let mut m = Merger {
        k,
        trans: pta.trans.clone(),
        labels: pta.labels.clone(),
        undo: Vec::new(),
    };
    let mut red: Vec<usize> = vec![0];
    let mut is_red = vec![false; n];
    is_red[0] = true;
    let mut log = Vec::new();

    // the lowest-numbered blue state and the red edge leading into it
    let next_blue = |m: &Merger, red: &[usize], is_red: &[bool]| -> Option<(usize, usize)> {
        red.iter()
            .flat_map(|&r| (0..k).map(move |s| r * k + s))
            .filter_map(|slot| {
                let t = m.trans[slot];
                (t != NONE && !is_red[t as usize]).then_some((t as usize, slot))
            })
            .min()
    };

    while let Some((blue, slot)) = next_blue(&m, &red, &is_red) {
        let mut merged = false;
        for &r in &red {
            let ok = m.try_merge(r, blue, slot);
            log.push(MergeEvent {
                red: r,
                blue,
                accepted: ok,
            });
            if ok {
                merged = true;
                break;
            }
        }
        if !merged {
            is_red[blue] = true;
            let pos = red.partition_point(|&r| r < blue);
            red.insert(pos, blue);
        }
    }

    // hypothesis over red states plus a trap
    let index_of = |q: usize| red.binary_search(&q).expect("red closure");
    let trap = red.len();
    let mut accepting = vec![false; red.len() + 1];
    let mut delta = vec![trap; (red.len() + 1) * k];
    for (i, &q) in red.iter().enumerate() {
        accepting[i] = m.labels[q] == NodeLabel::Accepting;
        for s in 0..k {
            let t = m.trans[q * k + s];
            if t != NONE {
                delta[i * k + s] = index_of(t as usize);
            }
        }
    }
    let dfa = Dfa::from_parts(alphabet.clone(), 0, accepting, delta).minimize();

    assert!(
        positives.iter().all(|w| dfa.accepts(w)) && negatives.iter().all(|w| !dfa.accepts(w)),
        "RPNI output must be consistent with its sample"
    );
    Ok(RpniOutcome {
        dfa,
        pta_states: n,
        red_states: red.len(),
        log,
    })
}

/// Positive and negative words from which RPNI recovers `target`.
///
/// With `Sp` the shortlex access words of the states and `N = {ε} ∪ Sp·Σ`:
/// every `x ∈ N` that can still reach acceptance is completed by its shortest
/// accepted suffix, and every `u ∈ Sp`, `v ∈ N` in different states are both
/// extended by their shortest distinguishing suffix.
pub fn characteristic_sample(target: &Dfa) -> (BTreeSet<Word>, BTreeSet<Word>) {
    let d = target.minimize();
    let k = d.alphabet().len() as u8;
    let access: Vec<Word> = d.access_words().into_iter().map(|w| w.expect("minimal DFAs are reachable")).collect();
    let mut kernel: BTreeSet<Word> = BTreeSet::from([Word::empty()]);
    for u in &access {
        for s in 0..k {
            let mut w = u.clone();
            w.0.push(s);
            kernel.insert(w);
        }
    }

    let mut positives = BTreeSet::new();
    let mut negatives = BTreeSet::new();
    let mut add = |w: Word| {
        if d.accepts(&w) {
            positives.insert(w);
        } else {
            negatives.insert(w);
        }
    };
    for x in &kernel {
        let q = d.run_from(d.start(), x);
        if let Some(v) = d.shortest_accepted_from(q) {
            add(Word([x.as_ref(), v.as_ref()].concat()));
        }
    }
    for u in &access {
        let p = d.run_from(d.start(), u);
        for v in &kernel {
            let q = d.run_from(d.start(), v);
            if p == q {
                continue;
            }
            let w = d.distinguishing_suffix(p, q).expect("minimal DFA states are distinguishable");
            add(Word([u.as_ref(), w.as_ref()].concat()));
            add(Word([v.as_ref(), w.as_ref()].concat()));
        }
    }
    (positives, negatives)
}

/// Splits a corpus into deduplicated positive and negative sets.
pub fn sample_sets(corpus: &LabeledCorpus) -> (BTreeSet<Word>, BTreeSet<Word>) {
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for e in &corpus.entries {
        match e.label {
            Label::Positive => pos.insert(e.word.clone()),
            Label::Negative => neg.insert(e.word.clone()),
        };
    }
    (pos, neg)
}

pub fn rpni_on_corpus(train: &LabeledCorpus) -> Result<Dfa> {
    let (pos, neg) = sample_sets(train);
    rpni(&pos, &neg, &train.alphabet)
}
