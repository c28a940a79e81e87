//! Strictly local and strictly piecewise grammars given by forbidden items,
//! with definition-level membership.
//!
//! These predicates are deliberately naive. They are the reference every
//! compiled automaton is checked against.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Word, LEFT_BOUNDARY, RIGHT_BOUNDARY};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrammarKind {
    #[serde(rename = "SL")]
    StrictlyLocal,
    #[serde(rename = "SP")]
    StrictlyPiecewise,
}

/// A grammar stored as its set of forbidden items.
///
/// Strictly local items are token strings of length exactly `k` that may carry
/// the left boundary at position 0 and the right boundary at the last position.
/// Strictly piecewise items are plain symbol strings of length at most `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubregularGrammar {
    kind: GrammarKind,
    k: usize,
    alphabet: Alphabet,
    forbidden: BTreeSet<Vec<u8>>,
}

impl SubregularGrammar {
    pub fn new(
        kind: GrammarKind,
        k: usize,
        alphabet: Alphabet,
        forbidden: impl IntoIterator<Item = Vec<u8>>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let forbidden: BTreeSet<Vec<u8>> = forbidden.into_iter().collect();
        for item in &forbidden {
            check_item(kind, k, &alphabet, item)
                .map_err(|why| Error::InvalidGrammar(format!("{:?}: {why}", alphabet.render_tokens(item, false))))?;
        }
        Ok(Self {
            kind,
            k,
            alphabet,
            forbidden,
        })
    }

    /// Builds a grammar from textual items such as `"⋊b"` or `"aa"`.
    pub fn from_strings<S: AsRef<str>>(
        kind: GrammarKind,
        k: usize,
        alphabet: Alphabet,
        items: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let forbidden = items
            .into_iter()
            .map(|s| alphabet.parse_tokens(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, k, alphabet, forbidden)
    }

    pub fn kind(&self) -> GrammarKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn forbidden(&self) -> &BTreeSet<Vec<u8>> {
        &self.forbidden
    }

    pub fn forbidden_strings(&self, ascii: bool) -> Vec<String> {
        self.forbidden
            .iter()
            .map(|f| self.alphabet.render_tokens(f, ascii))
            .collect()
    }

    /// Definition-level membership.
    pub fn member(&self, word: &[u8]) -> Result<bool> {
        self.alphabet.check_word(word)?;
        Ok(match self.kind {
            GrammarKind::StrictlyLocal => {
                let anchored = anchor(word);
                !anchored.windows(self.k).any(|f| self.forbidden.contains(f))
            }
            GrammarKind::StrictlyPiecewise => !self
                .forbidden
                .iter()
                .any(|pattern| contains_subsequence(word, pattern)),
        })
    }

    pub fn to_json(&self, ascii: bool) -> String {
        let file = GrammarFile {
            kind: self.kind,
            k: self.k,
            alphabet: self.alphabet.to_string(),
            forbidden: self.forbidden_strings(ascii),
        };
        serde_json::to_string_pretty(&file).expect("grammar serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GrammarFile = serde_json::from_str(text)?;
        let alphabet = Alphabet::new(&file.alphabet)?;
        Self::from_strings(file.kind, file.k, alphabet, &file.forbidden)
    }
}

fn check_item(kind: GrammarKind, k: usize, alphabet: &Alphabet, item: &[u8]) -> Result<(), String> {
    let is_symbol = |t: u8| (t as usize) < alphabet.len();
    match kind {
        GrammarKind::StrictlyLocal => {
            if item.len() != k {
                return Err(format!("factor length {} differs from k = {k}", item.len()));
            }
            let last = item.len() - 1;
            for (i, &t) in item.iter().enumerate() {
                let ok = match t {
                    LEFT_BOUNDARY => i == 0,
                    RIGHT_BOUNDARY => i == last,
                    t => is_symbol(t),
                };
                if !ok {
                    return Err(format!("misplaced or unknown token at position {i}"));
                }
            }
        }
        GrammarKind::StrictlyPiecewise => {
            if item.len() > k {
                return Err(format!("subsequence longer than k = {k}"));
            }
            if !item.iter().all(|&t| is_symbol(t)) {
                return Err("subsequences may only contain alphabet symbols".into());
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GrammarFile {
    kind: GrammarKind,
    k: usize,
    alphabet: String,
    forbidden: Vec<String>,
}

/// Returns `⋊ w ⋉` as a token string.
pub fn anchor(word: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(word.len() + 2);
    out.push(LEFT_BOUNDARY);
    out.extend_from_slice(word);
    out.push(RIGHT_BOUNDARY);
    out
}

/// The set of length-`k` substrings of `w`, or of `⋊ w ⋉` when `anchored`.
pub fn factors(word: &[u8], k: usize, anchored: bool) -> Result<BTreeSet<Vec<u8>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let text = if anchored { anchor(word) } else { word.to_vec() };
    Ok(text.windows(k).map(<[u8]>::to_vec).collect())
}

/// All distinct subsequences of `w` of length at most `k`, including the empty one.
///
/// Built incrementally by extending the current set with each symbol, so the cost is
/// bounded by the number of distinct short subsequences rather than `2^|w|`.
pub fn subsequences(word: &[u8], k: usize) -> Result<BTreeSet<Word>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::from([Vec::new()]);
    for &s in word {
        let extended: Vec<Vec<u8>> = seen
            .iter()
            .filter(|x| x.len() < k)
            .map(|x| {
                let mut y = x.clone();
                y.push(s);
                y
            })
            .collect();
        seen.extend(extended);
    }
    Ok(seen.into_iter().map(Word).collect())
}

/// Greedy left-to-right containment test for a single pattern.
pub fn contains_subsequence(word: &[u8], pattern: &[u8]) -> bool {
    let mut rest = pattern.iter().peekable();
    for s in word {
        if rest.peek() == Some(&s) {
            rest.next();
        }
    }
    rest.peek().is_none()
}

/// The six target languages over `{a, b, c, d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    SL2,
    SL4,
    SL8,
    SP2,
    SP4,
    SP8,
}

impl Language {
    pub const ALL: [Language; 6] = [
        Language::SL2,
        Language::SL4,
        Language::SL8,
        Language::SP2,
        Language::SP4,
        Language::SP8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Language::SL2 => "SL2",
            Language::SL4 => "SL4",
            Language::SL8 => "SL8",
            Language::SP2 => "SP2",
            Language::SP4 => "SP4",
            Language::SP8 => "SP8",
        }
    }

    pub fn grammar(self) -> SubregularGrammar {
        use GrammarKind::*;
        let (kind, k, items): (_, _, &[&str]) = match self {
            Language::SL2 => (StrictlyLocal, 2, &["⋊b", "aa", "bb", "a⋉"]),
            Language::SL4 => (StrictlyLocal, 4, &["⋊bbb", "aaaa", "bbbb", "aaa⋉"]),
            Language::SL8 => (
                StrictlyLocal,
                8,
                &["⋊bbbbbbb", "aaaaaaaa", "bbbbbbbb", "aaaaaaa⋉"],
            ),
            Language::SP2 => (StrictlyPiecewise, 2, &["ab"]),
            Language::SP4 => (StrictlyPiecewise, 4, &["abba"]),
            Language::SP8 => (StrictlyPiecewise, 8, &["abbaabba"]),
        };
        SubregularGrammar::from_strings(kind, k, Alphabet::abcd(), items)
            .expect("built-in grammars are well formed")
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Language::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownLanguage(s.to_string()))
    }
}

/// Looks up one of the six built-in grammars by name.
pub fn builtin_language(name: &str) -> Result<SubregularGrammar> {
    name.parse::<Language>().map(Language::grammar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma() -> Alphabet {
        Alphabet::abcd()
    }

    fn w(s: &str) -> Word {
        sigma().parse_word(s).unwrap()
    }

    fn rendered(set: &BTreeSet<Vec<u8>>) -> BTreeSet<String> {
        set.iter().map(|t| sigma().render_tokens(t, false)).collect()
    }

    fn brute_subsequences(word: &[u8], k: usize) -> BTreeSet<Word> {
        let n = word.len();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize <= k)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| word[i]).collect())
            .collect()
    }

    fn brute_contains_subsequence(word: &[u8], pattern: &[u8]) -> bool {
        // dp[j] = pattern[..j] is a subsequence of the prefix read so far
        let mut dp = vec![false; pattern.len() + 1];
        dp[0] = true;
        for &s in word {
            for j in (1..=pattern.len()).rev() {
                if pattern[j - 1] == s && dp[j - 1] {
                    dp[j] = true;
                }
            }
        }
        dp[pattern.len()]
    }

    #[test]
    fn factor_examples() {
        let f = factors(&w("ab"), 2, true).unwrap();
        assert_eq!(rendered(&f), BTreeSet::from(["⋊a".into(), "ab".into(), "b⋉".into()]));
        let f = factors(&w(""), 2, true).unwrap();
        assert_eq!(rendered(&f), BTreeSet::from(["⋊⋉".to_string()]));
        let f = factors(&w("abcd"), 3, false).unwrap();
        assert_eq!(rendered(&f), BTreeSet::from(["abc".into(), "bcd".into()]));
        assert!(factors(&w("ab"), 5, false).unwrap().is_empty());
        assert!(matches!(factors(&w("ab"), 0, true), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn subsequence_examples() {
        let names = |s: BTreeSet<Word>| -> BTreeSet<String> {
            s.iter().map(|x| sigma().render(x)).collect()
        };
        assert_eq!(
            names(subsequences(&w("ab"), 2).unwrap()),
            BTreeSet::from(["".into(), "a".into(), "b".into(), "ab".into()])
        );
        let aba = names(subsequences(&w("aba"), 2).unwrap());
        let expected: BTreeSet<String> =
            ["", "a", "b", "ab", "ba", "aa"].iter().map(|s| s.to_string()).collect();
        assert_eq!(aba, expected);
        assert_eq!(subsequences(&w("aba"), 2).unwrap(), brute_subsequences(&w("aba"), 2));

        let abab = subsequences(&w("abab"), 4).unwrap();
        assert_eq!(abab, brute_subsequences(&w("abab"), 4));
        assert_eq!(abab.len(), 12);
        assert!(subsequences(&w("a"), 0).is_err());
    }

    #[test]
    fn subsequences_of_long_words_are_tractable() {
        let long: Word = (0..50u8).map(|i| i % 4).collect();
        let s = subsequences(&long, 8).unwrap();
        // every word of length <= 4 over abcd is a subsequence of (abcd)^12
        assert!(s.len() > 341);
        assert!(s.iter().all(|x| x.len() <= 8));
    }

    #[test]
    fn membership_examples() {
        let sl2 = Language::SL2.grammar();
        assert!(sl2.member(&w("ab")).unwrap());
        assert!(!sl2.member(&w("ba")).unwrap());
        assert!(sl2.member(&w("")).unwrap());

        let sp2 = SubregularGrammar::from_strings(GrammarKind::StrictlyPiecewise, 2, sigma(), ["ab"]).unwrap();
        assert!(!sp2.member(&w("acccb")).unwrap());
        let sp4 = SubregularGrammar::from_strings(GrammarKind::StrictlyPiecewise, 4, sigma(), ["abba"]).unwrap();
        assert!(sp4.member(&w("abab")).unwrap());
        assert!(!brute_contains_subsequence(&w("abab"), &w("abba")));

        assert!(matches!(sl2.member(&[7]), Err(Error::InvalidWord { .. })));
    }

    #[test]
    fn builtin_tables() {
        assert_eq!(builtin_language("SP2").unwrap().forbidden_strings(false), ["ab"]);
        let sl8: BTreeSet<String> = builtin_language("SL8").unwrap().forbidden_strings(false).into_iter().collect();
        let expected: BTreeSet<String> = ["⋊bbbbbbb", "aaaaaaaa", "bbbbbbbb", "aaaaaaa⋉"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(sl8, expected);
        let sl4: BTreeSet<String> = builtin_language("SL4").unwrap().forbidden_strings(false).into_iter().collect();
        assert!(sl4.contains("⋊bbb") && sl4.contains("aaa⋉"));
        assert_eq!(builtin_language("SL2").unwrap().k(), 2);
        assert_eq!(builtin_language("SP8").unwrap().forbidden_strings(false), ["abbaabba"]);
        assert!(matches!(builtin_language("SL3"), Err(Error::UnknownLanguage(_))));
    }

    #[test]
    fn grammar_shape_is_validated() {
        let bad = |kind, k, items: &[&str]| SubregularGrammar::from_strings(kind, k, sigma(), items).is_err();
        assert!(bad(GrammarKind::StrictlyLocal, 2, &["abc"]));
        assert!(bad(GrammarKind::StrictlyLocal, 2, &["a⋊"]));
        assert!(bad(GrammarKind::StrictlyLocal, 2, &["⋉a"]));
        assert!(bad(GrammarKind::StrictlyPiecewise, 2, &["abc"]));
        assert!(bad(GrammarKind::StrictlyPiecewise, 3, &["⋊a"]));
        assert!(bad(GrammarKind::StrictlyLocal, 0, &[]));
        let dedup = SubregularGrammar::from_strings(GrammarKind::StrictlyLocal, 2, sigma(), ["aa", "aa"]).unwrap();
        assert_eq!(dedup.forbidden().len(), 1);
    }

    #[test]
    fn json_format() {
        let g = Language::SL2.grammar();
        let text = g.to_json(false);
        assert!(text.contains("\"kind\": \"SL\""));
        assert!(text.contains("⋊b"));
        assert_eq!(SubregularGrammar::from_json(&text).unwrap(), g);
        let ascii = g.to_json(true);
        assert!(ascii.contains(">b") && ascii.contains("a<"));
        assert_eq!(SubregularGrammar::from_json(&ascii).unwrap(), g);
    }

    #[test]
    fn membership_matches_brute_force_up_to_length_7() {
        let sigma = sigma();
        for lang in Language::ALL {
            let g = lang.grammar();
            for len in 0..=7 {
                for word in sigma.words_of_length(len) {
                    let expected = match g.kind() {
                        GrammarKind::StrictlyLocal => {
                            let a = anchor(&word);
                            !g.forbidden().iter().any(|f| {
                                (0..a.len()).any(|i| a[i..].starts_with(f))
                            })
                        }
                        GrammarKind::StrictlyPiecewise => !g
                            .forbidden()
                            .iter()
                            .any(|f| brute_contains_subsequence(&word, f)),
                    };
                    assert_eq!(g.member(&word).unwrap(), expected, "{lang} {}", sigma.render(&word));
                }
            }
        }
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..4, 0..max)
    }

    proptest! {
        #[test]
        fn subsequences_match_brute_force(word in word_strategy(12), k in 1usize..6) {
            prop_assert_eq!(subsequences(&word, k).unwrap(), brute_subsequences(&word, k));
        }

        #[test]
        fn sl_closed_under_suffix_substitution(
            lang in prop::sample::select(vec![Language::SL2, Language::SL4, Language::SL8]),
            u1 in word_strategy(10), v1 in word_strategy(10),
            u2 in word_strategy(10), v2 in word_strategy(10),
            x in prop::collection::vec(0u8..4, 7),
        ) {
            let g = lang.grammar();
            let x = &x[..g.k() - 1];
            let cat = |a: &[u8], b: &[u8], c: &[u8]| [a, b, c].concat();
            if g.member(&cat(&u1, x, &v1)).unwrap() && g.member(&cat(&u2, x, &v2)).unwrap() {
                prop_assert!(g.member(&cat(&u1, x, &v2)).unwrap());
            }
        }

        #[test]
        fn sp_closed_under_subsequence(
            lang in prop::sample::select(vec![Language::SP2, Language::SP4, Language::SP8]),
            word in word_strategy(30),
            deletions in prop::collection::vec(any::<prop::sample::Index>(), 0..10),
        ) {
            let g = lang.grammar();
            if g.member(&word).unwrap() {
                let mut smaller = word.clone();
                for d in deletions {
                    if smaller.is_empty() { break; }
                    smaller.remove(d.index(smaller.len()));
                    prop_assert!(g.member(&smaller).unwrap());
                }
            }
        }
    }
}
