use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;

use super::Dfa;
use crate::alphabet::{LEFT_BOUNDARY, RIGHT_BOUNDARY};
use crate::grammar::{GrammarKind, SubregularGrammar};

/// Compiles a grammar into its minimal complete DFA.
pub fn compile(grammar: &SubregularGrammar) -> Dfa {
    let raw = match grammar.kind() {
        GrammarKind::StrictlyLocal => window_automaton(grammar),
        GrammarKind::StrictlyPiecewise => monitor_product(grammar),
    };
    raw.minimize()
}

/// Explores a state space given as `Some(key)` for live states and `None` for the
/// trap, producing a complete DFA whose state 0 is `start`.
fn explore<K: Clone + Eq + Hash>(
    grammar: &SubregularGrammar,
    start: Option<K>,
    step: impl Fn(&K, u8) -> Option<K>,
    accepting: impl Fn(&K) -> bool,
) -> Dfa {
    let k = grammar.alphabet().len();
    let mut ids: HashMap<Option<K>, usize> = HashMap::new();
    let mut keys: Vec<Option<K>> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    keys.push(start.clone());
    queue.push_back(start);
    let mut delta: Vec<usize> = Vec::new();
    while let Some(key) = queue.pop_front() {
        for s in 0..k as u8 {
            let next = key.as_ref().and_then(|key| step(key, s));
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = keys.len();
                    ids.insert(next.clone(), id);
                    keys.push(next.clone());
                    queue.push_back(next);
                    id
                }
            };
            delta.push(id);
        }
    }
    let accepting = keys.iter().map(|key| key.as_ref().is_some_and(&accepting)).collect();
    Dfa::from_parts(grammar.alphabet().clone(), 0, accepting, delta)
}

/// States remember the last `k - 1` tokens of the anchored input; reading a symbol
/// that completes a forbidden factor moves to the trap.
fn window_automaton(grammar: &SubregularGrammar) -> Dfa {
    let k = grammar.k();
    let forbidden: HashSet<&[u8]> = grammar.forbidden().iter().map(Vec::as_slice).collect();
    let hits = |seq: &[u8]| seq.len() >= k && forbidden.contains(&seq[seq.len() - k..]);
    let keep_tail = |mut seq: Vec<u8>| {
        let cut = seq.len().saturating_sub(k - 1);
        seq.drain(..cut);
        seq
    };

    let initial = vec![LEFT_BOUNDARY];
    let start = (!hits(&initial)).then(|| keep_tail(initial));
    explore(
        grammar,
        start,
        |ctx, s| {
            let mut seq = ctx.clone();
            seq.push(s);
            (!hits(&seq)).then(|| keep_tail(seq))
        },
        |ctx| {
            let mut seq = ctx.clone();
            seq.push(RIGHT_BOUNDARY);
            !hits(&seq)
        },
    )
}

/// Product of one monitor per forbidden subsequence; each monitor tracks how long a
/// prefix of its pattern has been matched greedily.
fn monitor_product(grammar: &SubregularGrammar) -> Dfa {
    let patterns: Vec<&[u8]> = grammar.forbidden().iter().map(Vec::as_slice).collect();
    let complete = |progress: &[usize]| progress.iter().zip(&patterns).any(|(&p, pat)| p == pat.len());
    let initial = vec![0usize; patterns.len()];
    let start = (!complete(&initial)).then_some(initial);
    explore(
        grammar,
        start,
        |progress, s| {
            let next: Vec<usize> = progress
                .iter()
                .zip(&patterns)
                .map(|(&p, pat)| p + (pat.get(p) == Some(&s)) as usize)
                .collect();
            (!complete(&next)).then_some(next)
        },
        |_| true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::grammar::Language;

    #[test]
    fn minimal_sizes() {
        let expected = [3, 7, 15, 2, 4, 8];
        for (lang, n) in Language::ALL.into_iter().zip(expected) {
            let d = compile(&lang.grammar());
            assert_eq!(d.state_count(), n, "{lang}");
            // plus the explicit sink
            assert_eq!(d.num_states(), n + 1, "{lang}");
        }
    }

    #[test]
    fn sp2_small_words() {
        let d = compile(&Language::SP2.grammar());
        let sigma = Alphabet::abcd();
        assert!(d.accepts(&sigma.parse_word("ba").unwrap()));
        assert!(!d.accepts(&sigma.parse_word("ab").unwrap()));
    }

    #[test]
    fn agrees_with_definition_up_to_length_7() {
        let sigma = Alphabet::abcd();
        for lang in Language::ALL {
            let g = lang.grammar();
            let d = compile(&g);
            for len in 0..=7 {
                for w in sigma.words_of_length(len) {
                    assert_eq!(d.accepts(&w), g.member(&w).unwrap(), "{lang} {}", sigma.render(&w));
                }
            }
        }
    }

    #[test]
    fn degenerate_grammars() {
        let sigma = Alphabet::new("ab").unwrap();
        let none = SubregularGrammar::from_strings(GrammarKind::StrictlyPiecewise, 2, sigma.clone(), [""]).unwrap();
        let d = compile(&none);
        assert_eq!(d.num_states(), 1);
        assert!(!d.accepts(&[]));

        let all = SubregularGrammar::new(GrammarKind::StrictlyLocal, 3, sigma.clone(), []).unwrap();
        assert!(compile(&all).equivalent(&Dfa::universal(sigma.clone(), true)).unwrap());

        // k = 1 with a boundary item rejects everything
        let k1 = SubregularGrammar::from_strings(GrammarKind::StrictlyLocal, 1, sigma.clone(), ["⋊"]).unwrap();
        assert!(compile(&k1).equivalent(&Dfa::universal(sigma.clone(), false)).unwrap());

        // no b at all
        let no_b = SubregularGrammar::from_strings(GrammarKind::StrictlyLocal, 1, sigma.clone(), ["b"]).unwrap();
        let d = compile(&no_b);
        assert!(d.accepts(&[0, 0]) && !d.accepts(&[0, 1]));
    }
}
