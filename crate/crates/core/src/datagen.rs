//! Training and test corpora for a target language.
//!
//! Train: lengths 1..=25, `per_length` positives per length drawn with replacement;
//! negatives start at the shortest non-member length `m`, which receives
//! `per_length * m` words so both halves have the same size.
//!
//! Test2: `per_length` distinct words per polarity at each length 26..=50.
//!
//! Test1: per polarity, up to `per_length` novel distinct words at each length
//! 1..=25 where any exist, followed by `10 * per_length` extra novel words of
//! length 25; the first `total / 2` of that length-ordered pool are kept.
//!
//! Both test files are shuffled. Novelty is checked per polarity against the
//! training words.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Word};
use crate::automata::{compile, Dfa, LengthCountTable};
use crate::error::{Error, Result};
use crate::grammar::SubregularGrammar;

pub const TRAIN_MAX_LEN: usize = 25;
pub const TEST2_MIN_LEN: usize = 26;
pub const TEST2_MAX_LEN: usize = 50;
/// Extra length-25 words drawn for Test1, as a multiple of `per_length`.
pub const TEST1_PADDING_FACTOR: usize = 10;
/// Rejection sampling gives up after this many draws per requested word.
pub const OVERSAMPLING_CAP: usize = 1000;
/// Populations at most this large are enumerated instead of rejection-sampled.
const ENUMERATION_LIMIT: u64 = 100_000;

pub const SAMPLER: &str = "uniform-per-length";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regimen {
    #[serde(rename = "1k")]
    K1,
    #[serde(rename = "10k")]
    K10,
    #[serde(rename = "100k")]
    K100,
}

impl Regimen {
    pub const ALL: [Regimen; 3] = [Regimen::K1, Regimen::K10, Regimen::K100];

    pub fn name(self) -> &'static str {
        match self {
            Regimen::K1 => "1k",
            Regimen::K10 => "10k",
            Regimen::K100 => "100k",
        }
    }

    pub fn per_length(self) -> usize {
        match self {
            Regimen::K1 => 20,
            Regimen::K10 => 200,
            Regimen::K100 => 2000,
        }
    }

    pub fn total(self) -> usize {
        2 * TRAIN_MAX_LEN * self.per_length()
    }
}

impl fmt::Display for Regimen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regimen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regimen::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown regimen {s:?} (expected 1k, 10k or 100k)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn from_membership(member: bool) -> Self {
        if member {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    fn as_digit(self) -> char {
        match self {
            Label::Positive => '1',
            Label::Negative => '0',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test1,
    Test2,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test1 => "test1",
            Split::Test2 => "test2",
        }
    }

    pub fn length_window(self) -> (usize, usize) {
        match self {
            Split::Train | Split::Test1 => (1, TRAIN_MAX_LEN),
            Split::Test2 => (TEST2_MIN_LEN, TEST2_MAX_LEN),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Split::Train, Split::Test1, Split::Test2]
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Format(format!("unknown split {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub word: Word,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub language: String,
    pub alphabet: Alphabet,
    pub regimen: Regimen,
    pub split: Split,
    pub seed: u64,
    pub sampler: String,
    /// Free-form `key: value` metadata written as header comments.
    pub notes: BTreeMap<String, String>,
    pub entries: Vec<Entry>,
}

impl LabeledCorpus {
    fn empty(language: &str, alphabet: &Alphabet, regimen: Regimen, split: Split, seed: u64) -> Self {
        Self {
            language: language.to_string(),
            alphabet: alphabet.clone(),
            regimen,
            split,
            seed,
            sampler: SAMPLER.to_string(),
            notes: BTreeMap::new(),
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words_with(&self, label: Label) -> impl Iterator<Item = &Word> {
        self.entries.iter().filter(move |e| e.label == label).map(|e| &e.word)
    }

    pub fn count(&self, label: Label) -> usize {
        self.words_with(label).count()
    }

    pub fn file_name(&self) -> String {
        corpus_file_name(&self.language, self.regimen, self.split)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut header = |k: &str, v: &str| {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        };
        header("language", &self.language);
        header("split", self.split.name());
        header("regimen", self.regimen.name());
        header("seed", &self.seed.to_string());
        header("sampler", &self.sampler);
        header("alphabet", &self.alphabet.to_string());
        header("tool", concat!("subreg ", env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.notes {
            header(&format!("note.{k}"), v);
        }
        for e in &self.entries {
            out.push(e.label.as_digit());
            out.push('\t');
            out.push_str(&self.alphabet.render(&e.word));
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut meta: BTreeMap<String, String> = BTreeMap::new();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.trim().split_once(':') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (label, word) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("line {}: expected <label>\\t<word>", i + 1)))?;
            let label = match label {
                "1" => Label::Positive,
                "0" => Label::Negative,
                other => return Err(Error::Format(format!("line {}: bad label {other:?}", i + 1))),
            };
            rows.push((label, word.to_string(), i + 1));
        }
        let get = |k: &str| {
            meta.get(k)
                .cloned()
                .ok_or_else(|| Error::Format(format!("missing header field {k:?}")))
        };
        let alphabet = Alphabet::new(&get("alphabet")?)?;
        let entries = rows
            .into_iter()
            .map(|(label, word, line)| {
                alphabet
                    .parse_word(&word)
                    .map(|word| Entry { word, label })
                    .map_err(|e| Error::Format(format!("line {line}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let notes = meta
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("note.").map(|k| (k.to_string(), v.clone())))
            .collect();
        Ok(Self {
            language: get("language")?,
            regimen: get("regimen")?.parse()?,
            split: get("split")?.parse()?,
            seed: get("seed")?
                .parse()
                .map_err(|_| Error::Format("seed is not an integer".into()))?,
            sampler: meta.get("sampler").cloned().unwrap_or_else(|| SAMPLER.to_string()),
            alphabet,
            notes,
            entries,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_tsv(&fs::read_to_string(path)?)
    }
}

pub fn corpus_file_name(language: &str, regimen: Regimen, split: Split) -> String {
    format!("{language}_{}_{}.tsv", regimen.name(), split.name())
}

/// Automata and count tables shared by all generators for one grammar.
struct Population {
    positive: LengthCountTable,
    negative: LengthCountTable,
}

impl Population {
    fn new(grammar: &SubregularGrammar, max_len: usize) -> Self {
        let dfa = compile(grammar);
        Self {
            negative: LengthCountTable::new(&dfa.complement(), max_len),
            positive: LengthCountTable::new(&dfa, max_len),
        }
    }

    fn table(&self, label: Label) -> &LengthCountTable {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }
}

/// Shortest length in `1..=max_len` with at least one word, if any.
fn shortest_nonempty_length(table: &LengthCountTable, max_len: usize) -> Option<usize> {
    (1..=max_len).find(|&l| !table.count_words(l).is_zero())
}

/// How many words of each length the protocol asks for in the training split.
pub fn train_quota(grammar: &SubregularGrammar, regimen: Regimen) -> BTreeMap<(usize, Label), usize> {
    let negatives = LengthCountTable::new(&compile(grammar).complement(), TRAIN_MAX_LEN);
    train_quota_from(&negatives, regimen)
}

fn train_quota_from(negatives: &LengthCountTable, regimen: Regimen) -> BTreeMap<(usize, Label), usize> {
    let per = regimen.per_length();
    let mut quota: BTreeMap<(usize, Label), usize> =
        (1..=TRAIN_MAX_LEN).map(|l| ((l, Label::Positive), per)).collect();
    if let Some(m) = shortest_nonempty_length(negatives, TRAIN_MAX_LEN) {
        quota.insert((m, Label::Negative), per * m);
        for l in m + 1..=TRAIN_MAX_LEN {
            quota.insert((l, Label::Negative), per);
        }
    }
    quota
}

pub fn generate_train(
    language: &str,
    grammar: &SubregularGrammar,
    regimen: Regimen,
    seed: u64,
) -> Result<LabeledCorpus> {
    let pop = Population::new(grammar, TRAIN_MAX_LEN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = LabeledCorpus::empty(language, grammar.alphabet(), regimen, Split::Train, seed);
    let impossible = |reason: String| Error::ImpossibleCorpus {
        language: language.to_string(),
        split: Split::Train.to_string(),
        reason,
    };
    if shortest_nonempty_length(&pop.negative, TRAIN_MAX_LEN).is_none() {
        return Err(impossible(format!("no non-members up to length {TRAIN_MAX_LEN}")));
    }
    let quota = train_quota_from(&pop.negative, regimen);
    for label in [Label::Positive, Label::Negative] {
        for (&(len, _), &n) in quota.iter().filter(|((_, l), _)| *l == label) {
            let words = pop.table(label).sample_many(&mut rng, len, n, true).map_err(|_| {
                impossible(format!("no {label} words of length {len}"))
            })?;
            corpus.entries.extend(words.into_iter().map(|word| Entry { word, label }));
        }
    }
    corpus.notes.insert("duplicates".into(), "kept (sampled with replacement)".into());
    Ok(corpus)
}

/// Returns `(test1, test2)`. The random stream is independent of the one used for
/// the training data even when the same seed is passed.
pub fn generate_tests(
    language: &str,
    grammar: &SubregularGrammar,
    regimen: Regimen,
    train: &LabeledCorpus,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let pop = Population::new(grammar, TEST2_MAX_LEN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let per = regimen.per_length();
    let half = regimen.total() / 2;

    let mut test2 = LabeledCorpus::empty(language, grammar.alphabet(), regimen, Split::Test2, seed);
    for label in [Label::Positive, Label::Negative] {
        for len in TEST2_MIN_LEN..=TEST2_MAX_LEN {
            let words = pop
                .table(label)
                .sample_many(&mut rng, len, per, false)
                .map_err(|_| Error::QuotaUnreachable {
                    language: language.to_string(),
                    polarity: label.to_string(),
                    length: len,
                    quota: per,
                    got: 0,
                })?;
            test2.entries.extend(words.into_iter().map(|word| Entry { word, label }));
        }
    }
    test2.entries.shuffle(&mut rng);

    let mut test1 = LabeledCorpus::empty(language, grammar.alphabet(), regimen, Split::Test1, seed);
    for label in [Label::Positive, Label::Negative] {
        let seen_in_train: HashSet<&Word> = train.words_with(label).collect();
        let table = pop.table(label);
        let mut chosen: HashSet<Word> = HashSet::new();
        let mut pool: Vec<Word> = Vec::new();
        for len in 1..=TRAIN_MAX_LEN {
            pool.extend(draw_novel(table, len, per, &seen_in_train, &mut chosen, &mut rng));
        }
        let padding = draw_novel(table, TRAIN_MAX_LEN, TEST1_PADDING_FACTOR * per, &seen_in_train, &mut chosen, &mut rng);
        pool.extend(padding);
        if pool.len() < half {
            return Err(Error::QuotaUnreachable {
                language: language.to_string(),
                polarity: label.to_string(),
                length: TRAIN_MAX_LEN,
                quota: half,
                got: pool.len(),
            });
        }
        pool.truncate(half);
        test1.entries.extend(pool.into_iter().map(|word| Entry { word, label }));
    }
    test1.entries.shuffle(&mut rng);

    for corpus in [&mut test1, &mut test2] {
        corpus.notes.insert("novelty".into(), "per polarity against the training split".into());
        corpus.notes.insert("duplicates".into(), "none within the split".into());
    }
    test1.notes.insert("padding".into(), format!("{TEST1_PADDING_FACTOR}x per-length extra words of length {TRAIN_MAX_LEN}, novelty-filtered"));
    Ok((test1, test2))
}

/// Up to `quota` distinct words of `len` that are neither in `exclude` nor already `chosen`.
fn draw_novel(
    table: &LengthCountTable,
    len: usize,
    quota: usize,
    exclude: &HashSet<&Word>,
    chosen: &mut HashSet<Word>,
    rng: &mut ChaCha8Rng,
) -> Vec<Word> {
    let total = table.count_words(len);
    if total.is_zero() || quota == 0 {
        return Vec::new();
    }
    let novel = |w: &Word, chosen: &HashSet<Word>| !exclude.contains(w) && !chosen.contains(w);
    let mut out = Vec::new();
    match total.to_u64().filter(|&t| t <= ENUMERATION_LIMIT) {
        Some(t) => {
            let mut candidates: Vec<Word> = (0..t)
                .map(|i| table.unrank(len, &BigUint::from(i)))
                .filter(|w| novel(w, chosen))
                .collect();
            candidates.shuffle(rng);
            candidates.truncate(quota);
            chosen.extend(candidates.iter().cloned());
            out = candidates;
        }
        None => {
            for _ in 0..OVERSAMPLING_CAP * quota {
                if out.len() == quota {
                    break;
                }
                let w = table.sample(rng, len).expect("population is non-empty");
                if novel(&w, chosen) {
                    chosen.insert(w.clone());
                    out.push(w);
                }
            }
        }
    }
    out
}

/// Train, Test1 and Test2 for one language and regimen.
#[derive(Clone, Debug)]
pub struct CorpusSet {
    pub train: LabeledCorpus,
    pub test1: LabeledCorpus,
    pub test2: LabeledCorpus,
}

impl CorpusSet {
    pub fn generate(language: &str, grammar: &SubregularGrammar, regimen: Regimen, seed: u64) -> Result<Self> {
        let train = generate_train(language, grammar, regimen, seed)?;
        let (test1, test2) = generate_tests(language, grammar, regimen, &train, seed)?;
        Ok(Self { train, test1, test2 })
    }

    pub fn splits(&self) -> [&LabeledCorpus; 3] {
        [&self.train, &self.test1, &self.test2]
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for c in self.splits() {
            c.write(&dir.join(c.file_name()))?;
        }
        Ok(())
    }

    pub fn read_from(dir: &Path, language: &str, regimen: Regimen) -> Result<Self> {
        let read = |split| LabeledCorpus::read(&dir.join(corpus_file_name(language, regimen, split)));
        Ok(Self {
            train: read(Split::Train)?,
            test1: read(Split::Test1)?,
            test2: read(Split::Test2)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub failures: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub checks: Vec<Check>,
    /// Entry counts keyed by (length, label).
    pub counts: BTreeMap<(usize, Label), usize>,
    pub min_len: Option<usize>,
    pub max_len: Option<usize>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok" } else { "FAIL" };
            writeln!(f, "{status:4} {:20} {}", c.name, c.detail)?;
        }
        if let (Some(lo), Some(hi)) = (self.min_len, self.max_len) {
            writeln!(f, "lengths {lo}..={hi}")?;
        }
        Ok(())
    }
}

fn check(name: &str, failures: usize, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed: failures == 0,
        failures,
        detail,
    }
}

/// Re-checks every corpus invariant. `train` enables the novelty check for test splits.
pub fn verify_corpus(corpus: &LabeledCorpus, grammar: &SubregularGrammar, train: Option<&LabeledCorpus>) -> CorpusReport {
    let dfa: Dfa = compile(grammar);
    let mut checks = Vec::new();
    let mut counts: BTreeMap<(usize, Label), usize> = BTreeMap::new();
    for e in &corpus.entries {
        *counts.entry((e.word.len(), e.label)).or_default() += 1;
    }
    let render = |w: &Word| corpus.alphabet.render(w);

    checks.push(check(
        "alphabet",
        (corpus.alphabet != *grammar.alphabet()) as usize,
        format!("corpus {} / grammar {}", corpus.alphabet, grammar.alphabet()),
    ));

    let mislabeled: Vec<&Entry> = corpus
        .entries
        .iter()
        .filter(|e| grammar.alphabet().check_word(&e.word).is_err() || dfa.accepts(&e.word) != e.label.is_positive())
        .collect();
    checks.push(check(
        "label-consistency",
        mislabeled.len(),
        match mislabeled.first() {
            None => format!("{} entries agree with the grammar", corpus.len()),
            Some(e) => format!("{} mislabeled, e.g. {:?} as {}", mislabeled.len(), render(&e.word), e.label),
        },
    ));

    let (lo, hi) = corpus.split.length_window();
    let outside = corpus.entries.iter().filter(|e| e.word.len() < lo || e.word.len() > hi).count();
    checks.push(check("length-window", outside, format!("{outside} entries outside {lo}..={hi}")));

    let (pos, neg) = (corpus.count(Label::Positive), corpus.count(Label::Negative));
    let half = corpus.regimen.total() / 2;
    checks.push(check(
        "balance",
        (pos != half) as usize + (neg != half) as usize,
        format!("{pos} positive / {neg} negative, expected {half} each"),
    ));

    match corpus.split {
        Split::Train => {
            let quota = train_quota(grammar, corpus.regimen);
            let keys: std::collections::BTreeSet<_> = quota.keys().chain(counts.keys()).collect();
            let wrong: Vec<String> = keys
                .into_iter()
                .filter(|k| quota.get(k) != counts.get(k))
                .map(|(l, label)| {
                    format!(
                        "{label}@{l}: {} vs {}",
                        counts.get(&(*l, *label)).unwrap_or(&0),
                        quota.get(&(*l, *label)).unwrap_or(&0)
                    )
                })
                .collect();
            checks.push(check(
                "protocol-counts",
                wrong.len(),
                if wrong.is_empty() {
                    "per-length counts follow the protocol".into()
                } else {
                    wrong.join(", ")
                },
            ));
        }
        Split::Test1 | Split::Test2 => {
            let mut seen = HashSet::new();
            let dups = corpus.entries.iter().filter(|e| !seen.insert(&e.word)).count();
            checks.push(check("no-duplicates", dups, format!("{dups} repeated words")));
            if let Some(train) = train {
                let mut stale = 0;
                for label in [Label::Positive, Label::Negative] {
                    let trained: HashSet<&Word> = train.words_with(label).collect();
                    stale += corpus.words_with(label).filter(|w| trained.contains(w)).count();
                }
                checks.push(check("novelty", stale, format!("{stale} words also in the training split")));
            }
        }
    }

    CorpusReport {
        checks,
        min_len: corpus.entries.iter().map(|e| e.word.len()).min(),
        max_len: corpus.entries.iter().map(|e| e.word.len()).max(),
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Language;

    fn corpora(lang: Language, seed: u64) -> CorpusSet {
        CorpusSet::generate(lang.name(), &lang.grammar(), Regimen::K1, seed).unwrap()
    }

    #[test]
    fn regimen_arithmetic() {
        for r in Regimen::ALL {
            assert_eq!(r.total(), 2 * 25 * r.per_length());
        }
        assert_eq!(Regimen::K1.total(), 1000);
        assert_eq!(Regimen::K100.total(), 100_000);
        assert_eq!("10k".parse::<Regimen>().unwrap(), Regimen::K10);
    }

    #[test]
    fn sp8_negative_shortfall() {
        let train = generate_train("SP8", &Language::SP8.grammar(), Regimen::K1, 42).unwrap();
        let at = |l| train.entries.iter().filter(|e| e.label == Label::Negative && e.word.len() == l).count();
        assert_eq!(at(8), 160);
        assert_eq!((9..=25).map(at).sum::<usize>(), 340);
        assert_eq!((1..8).map(at).sum::<usize>(), 0);
        assert_eq!(train.count(Label::Negative), 500);
        assert_eq!(train.count(Label::Positive), 500);
    }

    #[test]
    fn sl2_negatives_at_every_length() {
        let train = generate_train("SL2", &Language::SL2.grammar(), Regimen::K1, 42).unwrap();
        for l in 1..=25 {
            let n = train.entries.iter().filter(|e| e.label == Label::Negative && e.word.len() == l).count();
            assert_eq!(n, 20, "length {l}");
        }
    }

    #[test]
    fn sl8_shortfall_uses_shortest_non_member() {
        // "bbbbbbb" and "aaaaaaa" are non-members of length 7
        let q = train_quota(&Language::SL8.grammar(), Regimen::K1);
        assert_eq!(q[&(7, Label::Negative)], 140);
        assert!(!q.contains_key(&(6, Label::Negative)));
    }

    #[test]
    fn generated_corpora_verify() {
        for lang in Language::ALL {
            let set = corpora(lang, 3);
            let g = lang.grammar();
            for c in set.splits() {
                let report = verify_corpus(c, &g, Some(&set.train));
                assert!(report.passed(), "{lang} {}:\n{report}", c.split);
            }
            let t2 = verify_corpus(&set.test2, &g, None);
            assert_eq!((t2.min_len, t2.max_len), (Some(26), Some(50)));
            assert_eq!(set.test1.len(), 1000);
        }
    }

    #[test]
    fn flipped_label_is_reported_once() {
        let set = corpora(Language::SP2, 5);
        let mut bad = set.test1.clone();
        bad.entries[0].label = match bad.entries[0].label {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        };
        let report = verify_corpus(&bad, &Language::SP2.grammar(), Some(&set.train));
        assert_eq!(report.check("label-consistency").unwrap().failures, 1);
        assert!(!report.passed());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = corpora(Language::SL4, 9);
        let b = corpora(Language::SL4, 9);
        for (x, y) in a.splits().iter().zip(b.splits()) {
            assert_eq!(x.to_tsv(), y.to_tsv());
        }
        let c = corpora(Language::SL4, 10);
        assert_ne!(a.train.to_tsv(), c.train.to_tsv());
    }

    #[test]
    fn tsv_round_trip() {
        let set = corpora(Language::SL2, 1);
        let text = set.test1.to_tsv();
        assert!(text.starts_with("# language: SL2\n"));
        let back = LabeledCorpus::from_tsv(&text).unwrap();
        assert_eq!(back, set.test1);
        assert!(LabeledCorpus::from_tsv("# alphabet: ab\n2\tab\n").is_err());
        assert_eq!(set.train.file_name(), "SL2_1k_train.tsv");
    }

    #[test]
    fn impossible_corpus() {
        let g = SubregularGrammar::new(crate::GrammarKind::StrictlyPiecewise, 2, Alphabet::abcd(), []).unwrap();
        assert!(matches!(
            generate_train("ALL", &g, Regimen::K1, 0),
            Err(Error::ImpossibleCorpus { .. })
        ));
    }

    #[test]
    fn test1_pads_with_length_25_when_short_lengths_are_exhausted() {
        let set = corpora(Language::SP8, 42);
        let neg_lengths: Vec<usize> = set.test1.words_with(Label::Negative).map(|w| w.len()).collect();
        // abbaabba is the only non-member of length 8 and it is in the training data
        assert!(neg_lengths.iter().all(|&l| l >= 9));
        assert!(neg_lengths.contains(&25));
    }
}
