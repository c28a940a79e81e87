//! Strictly local and strictly piecewise languages, their automata, the training and
//! test corpora built from them, and two learners (RPNI and small recurrent networks)
//! evaluated on those corpora.

pub mod alphabet;
pub mod automata;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod grammar;
pub mod rnn;
pub mod rpni;

pub use alphabet::{Alphabet, Word};
pub use automata::{compile, count_words, sample_words, Dfa, LengthCountTable};
pub use datagen::{generate_tests, generate_train, verify_corpus, CorpusSet, Label, LabeledCorpus, Regimen, Split};
pub use error::{Error, Result};
pub use eval::{evaluate, Classifier};
pub use experiments::{aggregate, run_matrix, trend_checks, ExperimentResult, ExperimentSpec};
pub use grammar::{builtin_language, factors, subsequences, GrammarKind, Language, SubregularGrammar};
pub use rnn::{RnnConfig, RnnModel, TrainState};
pub use rpni::{characteristic_sample, rpni, rpni_on_corpus, PrefixTreeAcceptor};
