use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid word: symbol {symbol:?} is not in alphabet {alphabet:?}")]
    InvalidWord { symbol: char, alphabet: String },

    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("unknown language {0:?} (expected one of SL2, SL4, SL8, SP2, SP4, SP8)")]
    UnknownLanguage(String),

    #[error("alphabet mismatch: {0:?} vs {1:?}")]
    AlphabetMismatch(String, String),

    #[error("the language has no words of length {length}")]
    EmptyAtLength { length: usize },

    #[error("cannot draw {requested} distinct words of length {length}: only {available} exist")]
    InsufficientPopulation {
        length: usize,
        requested: usize,
        available: String,
    },

    #[error("cannot build {split} corpus for {language}: {reason}")]
    ImpossibleCorpus {
        language: String,
        split: String,
        reason: String,
    },

    #[error("{language}: cannot reach the {polarity} quota of {quota} ({got} novel words up to length {length})")]
    QuotaUnreachable {
        language: String,
        polarity: String,
        length: usize,
        quota: usize,
        got: usize,
    },

    #[error("inconsistent sample: {word:?} is labelled both positive and negative")]
    InconsistentSample { word: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}, max |grad| {max_grad}")]
    Diverged {
        epoch: usize,
        batch: usize,
        loss: f64,
        max_grad: f64,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
