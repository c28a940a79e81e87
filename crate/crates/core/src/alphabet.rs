//! Alphabets, words and the boundary markers used by anchored factors.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Token index of the left word boundary in anchored strings.
pub const LEFT_BOUNDARY: u8 = u8::MAX - 1;
/// Token index of the right word boundary in anchored strings.
pub const RIGHT_BOUNDARY: u8 = u8::MAX;

pub const LEFT_BOUNDARY_CHAR: char = '⋊';
pub const RIGHT_BOUNDARY_CHAR: char = '⋉';
pub const LEFT_BOUNDARY_ASCII: char = '>';
pub const RIGHT_BOUNDARY_ASCII: char = '<';

const MAX_SYMBOLS: usize = LEFT_BOUNDARY as usize;

/// An ordered set of single-character symbols.
///
/// The position of a symbol is its index everywhere else in the crate:
/// DFA columns, embedding rows and lexicographic order all follow it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Self> {
        let symbols: Vec<char> = symbols.chars().collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        if symbols.len() > MAX_SYMBOLS {
            return Err(Error::InvalidAlphabet(format!(
                "at most {MAX_SYMBOLS} symbols are supported"
            )));
        }
        for (i, &c) in symbols.iter().enumerate() {
            if is_reserved(c) {
                return Err(Error::InvalidAlphabet(format!(
                    "{c:?} is reserved for word boundaries"
                )));
            }
            if symbols[..i].contains(&c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet used for every built-in language: `abcd`.
    pub fn abcd() -> Self {
        Self::new("abcd").expect("valid alphabet")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.symbols.iter().position(|&s| s == c).map(|i| i as u8)
    }

    pub fn symbol(&self, index: u8) -> char {
        self.symbols[index as usize]
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| {
                self.index_of(c).ok_or_else(|| Error::InvalidWord {
                    symbol: c,
                    alphabet: self.to_string(),
                })
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    /// Checks that every symbol of `word` indexes into this alphabet.
    pub fn check_word(&self, word: &[u8]) -> Result<()> {
        match word.iter().find(|&&s| s as usize >= self.len()) {
            Some(&s) => Err(Error::InvalidWord {
                symbol: char::from_u32(s as u32).unwrap_or(char::REPLACEMENT_CHARACTER),
                alphabet: self.to_string(),
            }),
            None => Ok(()),
        }
    }

    pub fn render(&self, word: &[u8]) -> String {
        word.iter().map(|&s| self.symbol(s)).collect()
    }

    /// Renders a token string that may contain boundary markers.
    pub fn render_tokens(&self, tokens: &[u8], ascii: bool) -> String {
        tokens
            .iter()
            .map(|&t| match t {
                LEFT_BOUNDARY if ascii => LEFT_BOUNDARY_ASCII,
                RIGHT_BOUNDARY if ascii => RIGHT_BOUNDARY_ASCII,
                LEFT_BOUNDARY => LEFT_BOUNDARY_CHAR,
                RIGHT_BOUNDARY => RIGHT_BOUNDARY_CHAR,
                s => self.symbol(s),
            })
            .collect()
    }

    /// Parses a token string; both the Unicode and ASCII boundary spellings are accepted.
    pub fn parse_tokens(&self, text: &str) -> Result<Vec<u8>> {
        text.chars()
            .map(|c| match c {
                LEFT_BOUNDARY_CHAR | LEFT_BOUNDARY_ASCII => Ok(LEFT_BOUNDARY),
                RIGHT_BOUNDARY_CHAR | RIGHT_BOUNDARY_ASCII => Ok(RIGHT_BOUNDARY),
                c => self.index_of(c).ok_or_else(|| Error::InvalidWord {
                    symbol: c,
                    alphabet: self.to_string(),
                }),
            })
            .collect()
    }

    /// Iterates over every word of exactly `length` symbols in lexicographic order.
    pub fn words_of_length(&self, length: usize) -> impl Iterator<Item = Word> + '_ {
        let k = self.len();
        let total = k.checked_pow(length as u32).expect("enumeration too large");
        (0..total).map(move |mut n| {
            let mut w = vec![0u8; length];
            for slot in w.iter_mut().rev() {
                *slot = (n % k) as u8;
                n /= k;
            }
            Word(w)
        })
    }
}

fn is_reserved(c: char) -> bool {
    matches!(
        c,
        LEFT_BOUNDARY_CHAR | RIGHT_BOUNDARY_CHAR | LEFT_BOUNDARY_ASCII | RIGHT_BOUNDARY_ASCII
    )
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet({self})")
    }
}

/// A word as a sequence of symbol indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for Word {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

impl FromIterator<u8> for Word {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
