use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dfa, StateId};
use crate::alphabet::Word;
use crate::error::{Error, Result};

/// Exact counts of accepted continuations: `count(q, l)` is the number of words of
/// length `l` that lead from `q` into an accepting state.
#[derive(Clone, Debug)]
pub struct LengthCountTable {
    dfa: Dfa,
    // counts[l][q]
    counts: Vec<Vec<BigUint>>,
}

impl LengthCountTable {
    pub fn new(dfa: &Dfa, max_len: usize) -> Self {
        let n = dfa.num_states();
        let k = dfa.alphabet().len() as u8;
        let mut counts = Vec::with_capacity(max_len + 1);
        counts.push(
            (0..n)
                .map(|q| BigUint::from(dfa.is_accepting(q) as u8))
                .collect::<Vec<_>>(),
        );
        for l in 1..=max_len {
            let prev: &Vec<BigUint> = &counts[l - 1];
            let row = (0..n)
                .map(|q| (0..k).map(|s| &prev[dfa.next(q, s)]).sum())
                .collect();
            counts.push(row);
        }
        Self {
            dfa: dfa.clone(),
            counts,
        }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn max_len(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, q: StateId, length: usize) -> &BigUint {
        &self.counts[length][q]
    }

    /// Number of accepted words of exactly `length` symbols.
    pub fn count_words(&self, length: usize) -> &BigUint {
        self.count(self.dfa.start(), length)
    }

    /// The accepted word of the given length at position `index` in lexicographic order.
    pub fn unrank(&self, length: usize, index: &BigUint) -> Word {
        assert!(index < self.count_words(length), "rank out of range");
        let mut rest = index.clone();
        let mut q = self.dfa.start();
        let mut word = Vec::with_capacity(length);
        for remaining in (0..length).rev() {
            for s in 0..self.dfa.alphabet().len() as u8 {
                let t = self.dfa.next(q, s);
                let c = &self.counts[remaining][t];
                if rest < *c {
                    word.push(s);
                    q = t;
                    break;
                }
                rest -= c;
            }
        }
        Word(word)
    }

    /// One word drawn uniformly from the accepted words of `length`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, length: usize) -> Result<Word> {
        let total = self.count_words(length);
        if total.is_zero() {
            return Err(Error::EmptyAtLength { length });
        }
        Ok(self.unrank(length, &random_below(rng, total)))
    }

    /// `n` uniform draws; without replacement the words are pairwise distinct.
    pub fn sample_many<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        length: usize,
        n: usize,
        with_replacement: bool,
    ) -> Result<Vec<Word>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let total = self.count_words(length).clone();
        if total.is_zero() {
            return Err(Error::EmptyAtLength { length });
        }
        if with_replacement {
            return (0..n).map(|_| self.sample(rng, length)).collect();
        }
        if total < BigUint::from(n) {
            return Err(Error::InsufficientPopulation {
                length,
                requested: n,
                available: total.to_string(),
            });
        }
        let indices: Vec<BigUint> = match total.to_usize() {
            // dense population: partial shuffle of all ranks
            Some(t) if t <= 2 * n => {
                let mut all: Vec<usize> = (0..t).collect();
                let (chosen, _) = all.partial_shuffle(rng, n);
                chosen.iter().map(|&i| BigUint::from(i)).collect()
            }
            _ => {
                let mut seen = HashSet::with_capacity(n);
                let mut out = Vec::with_capacity(n);
                while out.len() < n {
                    let i = random_below(rng, &total);
                    if seen.insert(i.clone()) {
                        out.push(i);
                    }
                }
                out
            }
        };
        Ok(indices.iter().map(|i| self.unrank(length, i)).collect())
    }
}

/// Exact number of words of `length` accepted by `dfa`.
pub fn count_words(dfa: &Dfa, length: usize) -> BigUint {
    LengthCountTable::new(dfa, length).count_words(length).clone()
}

/// Draws `n` words of exactly `length` uniformly from the language, deterministically
/// for a given seed.
pub fn sample_words(dfa: &Dfa, length: usize, n: usize, seed: u64, with_replacement: bool) -> Result<Vec<Word>> {
    let table = LengthCountTable::new(dfa, length);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    table.sample_many(&mut rng, length, n, with_replacement)
}

/// Uniform integer in `[0, bound)` by rejection on the bit length of `bound`.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let excess = nbytes as u64 * 8 - bits;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[nbytes - 1] &= 0xffu8 >> excess;
        let x = BigUint::from_bytes_le(&buf);
        if x < *bound {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::automata::compile;
    use crate::grammar::Language;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn sp2_length_two_has_fifteen_members() {
        let d = compile(&Language::SP2.grammar());
        assert_eq!(count_words(&d, 2), BigUint::from(15u32));
    }

    #[test]
    fn empty_word_count_matches_membership() {
        for lang in Language::ALL {
            let g = lang.grammar();
            let d = compile(&g);
            assert_eq!(count_words(&d, 0), BigUint::from(g.member(&[]).unwrap() as u8));
        }
    }

    #[test]
    fn counts_match_enumeration_up_to_length_8() {
        let sigma = Alphabet::abcd();
        for lang in Language::ALL {
            let g = lang.grammar();
            let table = LengthCountTable::new(&compile(&g), 8);
            for len in 0..=8 {
                let brute = sigma.words_of_length(len).filter(|w| g.member(w).unwrap()).count();
                assert_eq!(*table.count_words(len), BigUint::from(brute), "{lang} {len}");
            }
        }
    }

    #[test]
    fn recurrence_holds_at_every_cell() {
        let d = compile(&Language::SL4.grammar());
        let t = LengthCountTable::new(&d, 30);
        for q in 0..d.num_states() {
            assert_eq!(*t.count(q, 0), BigUint::from(d.is_accepting(q) as u8));
            for l in 1..=30 {
                let sum: BigUint = (0..4u8).map(|s| t.count(d.next(q, s), l - 1)).sum();
                assert_eq!(*t.count(q, l), sum);
            }
        }
    }

    #[test]
    fn counts_are_exact_at_length_50() {
        let all = crate::automata::Dfa::universal(Alphabet::abcd(), true);
        assert_eq!(count_words(&all, 50), BigUint::from(4u32).pow(50));
    }

    #[test]
    fn unrank_enumerates_members_in_order() {
        let g = Language::SL2.grammar();
        let d = compile(&g);
        let t = LengthCountTable::new(&d, 5);
        let sigma = Alphabet::abcd();
        let expected: Vec<Word> = sigma.words_of_length(5).filter(|w| g.member(w).unwrap()).collect();
        let got: Vec<Word> = (0..expected.len()).map(|i| t.unrank(5, &BigUint::from(i))).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn samples_are_members_of_the_requested_length() {
        let d = compile(&Language::SP2.grammar());
        let words = sample_words(&d, 2, 1000, 7, true).unwrap();
        assert_eq!(words.len(), 1000);
        assert!(words.iter().all(|w| w.len() == 2 && d.accepts(w) && **w != [0, 1]));
        for lang in Language::ALL {
            let d = compile(&lang.grammar());
            for w in sample_words(&d, 33, 50, 1, true).unwrap() {
                assert!(d.accepts(&w) && w.len() == 33);
            }
        }
        assert!(sample_words(&d, 2, 0, 1, false).unwrap().is_empty());
    }

    #[test]
    fn sampling_errors() {
        let sp8 = compile(&Language::SP8.grammar());
        let neg = sp8.complement();
        assert!(matches!(sample_words(&neg, 3, 1, 0, true), Err(Error::EmptyAtLength { length: 3 })));
        // only abbaabba itself is a non-member of length 8
        assert_eq!(sample_words(&neg, 8, 5, 0, true).unwrap().len(), 5);
        assert!(matches!(
            sample_words(&neg, 8, 2, 0, false),
            Err(Error::InsufficientPopulation { .. })
        ));
    }

    #[test]
    fn without_replacement_is_distinct_and_deterministic() {
        let d = compile(&Language::SP4.grammar());
        let a = sample_words(&d, 3, 60, 11, false).unwrap();
        let distinct: HashSet<_> = a.iter().collect();
        assert_eq!(distinct.len(), 60);
        assert_eq!(a, sample_words(&d, 3, 60, 11, false).unwrap());
        let big = sample_words(&d, 20, 100, 3, false).unwrap();
        assert_eq!(big.iter().collect::<HashSet<_>>().len(), 100);
    }

    #[test]
    fn chi_square_uniformity_sp2_length_two() {
        let d = compile(&Language::SP2.grammar());
        let words = sample_words(&d, 2, 15_000, 2024, true).unwrap();
        let mut freq = std::collections::BTreeMap::new();
        for w in &words {
            *freq.entry(w.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(freq.len(), 15);
        let stat: f64 = freq.values().map(|&o| (o as f64 - 1000.0).powi(2) / 1000.0).sum();
        let p = 1.0 - ChiSquared::new(14.0).unwrap().cdf(stat);
        assert!(p > 0.001, "chi2 = {stat}, p = {p}");
    }
}
