//! Scoring any membership classifier against a labelled corpus.

use rayon::prelude::*;

use crate::automata::Dfa;
use crate::datagen::LabeledCorpus;
use crate::error::{Error, Result};
use crate::rnn::{forward, Batch, RnnModel};

/// Anything that maps words to `(p_positive, p_negative)`.
pub trait Classifier {
    fn probabilities(&self, words: &[&[u8]]) -> Result<Vec<[f64; 2]>>;
}

impl Classifier for Dfa {
    fn probabilities(&self, words: &[&[u8]]) -> Result<Vec<[f64; 2]>> {
        Ok(words
            .iter()
            .map(|w| if self.accepts(w) { [1.0, 0.0] } else { [0.0, 1.0] })
            .collect())
    }
}

const EVAL_BATCH: usize = 256;

impl Classifier for RnnModel {
    /// Words are grouped by length into batches; the empty word is scored from the
    /// initial (zero) state.
    fn probabilities(&self, words: &[&[u8]]) -> Result<Vec<[f64; 2]>> {
        let pad = self.layout.pad();
        let mut order: Vec<usize> = (0..words.len()).collect();
        order.sort_by_key(|&i| words[i].len());
        let split = order.partition_point(|&i| words[i].is_empty());
        let mut out = vec![[0.0; 2]; words.len()];

        if split > 0 {
            let b = &self.params[self.layout.head_b.clone()];
            let m = b[0].max(b[1]);
            let e = [(b[0] - m).exp(), (b[1] - m).exp()];
            let p = [e[0] / (e[0] + e[1]), e[1] / (e[0] + e[1])];
            for &i in &order[..split] {
                out[i] = p;
            }
        }
        let chunks: Vec<&[usize]> = order[split..].chunks(EVAL_BATCH).collect();
        let results: Vec<Vec<[f64; 2]>> = chunks
            .par_iter()
            .map(|chunk| {
                let seqs: Vec<&[u8]> = chunk.iter().map(|&i| words[i]).collect();
                forward(self, &Batch::from_sequences(&seqs, pad))
            })
            .collect::<Result<_>>()?;
        for (chunk, probs) in chunks.iter().zip(results) {
            for (&i, p) in chunk.iter().zip(probs) {
                out[i] = p;
            }
        }
        Ok(out)
    }
}

/// Fraction of entries whose predicted class matches the label. A word is predicted
/// positive only when `p_positive > p_negative`.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, corpus: &LabeledCorpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::InvalidParameter(format!("{} {} corpus is empty", corpus.language, corpus.split)));
    }
    let words: Vec<&[u8]> = corpus.entries.iter().map(|e| &e.word[..]).collect();
    let probs = model.probabilities(&words)?;
    let correct = probs
        .iter()
        .zip(&corpus.entries)
        .filter(|(p, e)| (p[0] > p[1]) == e.label.is_positive())
        .count();
    Ok(correct as f64 / corpus.len() as f64)
}
