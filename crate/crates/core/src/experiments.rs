//! The language × regimen × model × seed matrix: running it resumably, one result file
//! per cell, and turning the result files into summary tables and trend checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::compile;
use crate::datagen::{CorpusSet, Regimen, Split};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::grammar::Language;
use crate::rnn::{metrics_csv, train, CellKind, OptimizerKind, RnnConfig};
use crate::rpni::rpni_on_corpus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub cell: CellKind,
    pub d: usize,
}

impl ModelSpec {
    pub fn label(&self) -> String {
        format!("{}-v{}", self.cell, self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub languages: Vec<Language>,
    pub regimens: Vec<Regimen>,
    pub models: Vec<ModelSpec>,
    pub optimizer: OptimizerKind,
    /// Each listed setting becomes its own set of cells.
    pub early_stop: Vec<bool>,
    /// Model seeds `0..seeds`.
    pub seeds: u64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Adds one RPNI cell per language and regimen.
    pub rpni: bool,
    /// Seed used to generate every corpus.
    pub data_seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    /// Small matrix that runs in minutes on a laptop.
    pub fn desk() -> Self {
        Self {
            languages: Language::ALL.to_vec(),
            regimens: vec![Regimen::K1],
            models: vec![ModelSpec {
                cell: CellKind::Lstm,
                d: 10,
            }],
            optimizer: OptimizerKind::Adam,
            early_stop: vec![false, true],
            seeds: 3,
            epochs: 50,
            batch_size: 128,
            rpni: true,
            data_seed: 42,
            output_dir: PathBuf::from("runs/desk"),
        }
    }

    /// The full grid: every language, regimen, cell type and size, ten seeds, 100 epochs.
    pub fn full() -> Self {
        let models = [CellKind::Lstm, CellKind::Elman]
            .into_iter()
            .flat_map(|cell| [10, 30, 100].map(|d| ModelSpec { cell, d }))
            .collect();
        Self {
            languages: Language::ALL.to_vec(),
            regimens: Regimen::ALL.to_vec(),
            models,
            optimizer: OptimizerKind::Adam,
            early_stop: vec![false, true],
            seeds: 10,
            epochs: 100,
            batch_size: 128,
            rpni: true,
            data_seed: 42,
            output_dir: PathBuf::from("runs/full"),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            _ => Err(Error::InvalidParameter(format!("unknown preset {name:?} (expected desk or full)"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        if self.languages.is_empty() || self.regimens.is_empty() {
            return Err(Error::InvalidParameter("spec needs at least one language and regimen".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch_size must be positive".into()));
        }
        if !self.models.is_empty() && (self.seeds == 0 || self.early_stop.is_empty()) {
            return Err(Error::InvalidParameter("network cells need seeds and an early_stop setting".into()));
        }
        if self.models.iter().any(|m| m.d == 0) {
            return Err(Error::InvalidParameter("model size must be positive".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &language in &self.languages {
            for &regimen in &self.regimens {
                if self.rpni {
                    out.push(CellSpec::Rpni { language, regimen });
                }
                for &model in &self.models {
                    for &early_stop in &self.early_stop {
                        for seed in 0..self.seeds {
                            out.push(CellSpec::Rnn {
                                language,
                                regimen,
                                model,
                                optimizer: self.optimizer,
                                early_stop,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn results_dir(&self) -> PathBuf {
        self.output_dir.join("results")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.output_dir.join("reports")
    }

    pub fn corpora_dir(&self) -> PathBuf {
        self.output_dir.join("corpora")
    }

    fn failures_dir(&self) -> PathBuf {
        self.output_dir.join("failures")
    }

    fn logs_dir(&self) -> PathBuf {
        self.output_dir.join("logs")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellSpec {
    Rnn {
        language: Language,
        regimen: Regimen,
        model: ModelSpec,
        optimizer: OptimizerKind,
        early_stop: bool,
        seed: u64,
    },
    Rpni {
        language: Language,
        regimen: Regimen,
    },
}

impl CellSpec {
    pub fn language(&self) -> Language {
        match *self {
            CellSpec::Rnn { language, .. } | CellSpec::Rpni { language, .. } => language,
        }
    }

    pub fn regimen(&self) -> Regimen {
        match *self {
            CellSpec::Rnn { regimen, .. } | CellSpec::Rpni { regimen, .. } => regimen,
        }
    }

    /// Column label, e.g. `lstm-v10`, `lstm-v10-es`, `elman-v30-sgd` or `rpni`.
    pub fn model_label(&self) -> String {
        match self {
            CellSpec::Rpni { .. } => "rpni".to_string(),
            CellSpec::Rnn {
                model,
                optimizer,
                early_stop,
                ..
            } => {
                let mut s = model.label();
                if *optimizer == OptimizerKind::Sgd {
                    s.push_str("-sgd");
                }
                if *early_stop {
                    s.push_str("-es");
                }
                s
            }
        }
    }

    /// File stem of the cell's result, e.g. `SL2_1k_lstm-v10_s0` or `SL2_1k_rpni`.
    pub fn key(&self) -> String {
        let base = format!("{}_{}_{}", self.language(), self.regimen(), self.model_label());
        match self {
            CellSpec::Rnn { seed, .. } => format!("{base}_s{seed}"),
            CellSpec::Rpni { .. } => base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub key: String,
    pub language: Language,
    pub regimen: Regimen,
    pub model: String,
    pub cell: Option<CellKind>,
    pub d: Option<usize>,
    pub optimizer: Option<OptimizerKind>,
    pub early_stop: bool,
    pub seed: Option<u64>,
    pub data_seed: u64,
    pub test1_acc: f64,
    pub test2_acc: f64,
    /// Validation accuracy per epoch (early stopping only).
    pub val_acc: Vec<f64>,
    /// Epoch whose parameters were scored.
    pub final_epoch: Option<usize>,
    pub wall_time_s: f64,
    /// RPNI only: whether the learned automaton equals the target language.
    pub equivalent_to_target: Option<bool>,
    /// RPNI only: size of the learned automaton, sink excluded.
    pub states: Option<usize>,
}

impl ExperimentResult {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub key: String,
    pub error: String,
}

#[derive(Clone, Debug)]
pub enum CellOutcome {
    Ran(ExperimentResult),
    Skipped(ExperimentResult),
    Failed(CellFailure),
}

#[derive(Clone, Debug, Default)]
pub struct MatrixOutcome {
    /// Results of every completed cell, fresh or loaded, in cell order.
    pub results: Vec<ExperimentResult>,
    pub ran: usize,
    pub skipped: usize,
    pub failures: Vec<CellFailure>,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn load_or_generate(spec: &ExperimentSpec, language: Language, regimen: Regimen) -> Result<CorpusSet> {
    let dir = spec.corpora_dir();
    if let Ok(set) = CorpusSet::read_from(&dir, language.name(), regimen) {
        if set.splits().iter().all(|c| c.seed == spec.data_seed) {
            return Ok(set);
        }
        return Err(Error::InvalidParameter(format!(
            "corpora for {language} {regimen} in {} were generated with another seed",
            dir.display()
        )));
    }
    let set = CorpusSet::generate(language.name(), &language.grammar(), regimen, spec.data_seed)?;
    set.write_to(&dir)?;
    Ok(set)
}

fn run_cell(spec: &ExperimentSpec, cell: &CellSpec, set: &CorpusSet) -> Result<ExperimentResult> {
    let start = Instant::now();
    let key = cell.key();
    let mut result = ExperimentResult {
        key: key.clone(),
        language: cell.language(),
        regimen: cell.regimen(),
        model: cell.model_label(),
        cell: None,
        d: None,
        optimizer: None,
        early_stop: false,
        seed: None,
        data_seed: spec.data_seed,
        test1_acc: 0.0,
        test2_acc: 0.0,
        val_acc: Vec::new(),
        final_epoch: None,
        wall_time_s: 0.0,
        equivalent_to_target: None,
        states: None,
    };
    match *cell {
        CellSpec::Rpni { language, .. } => {
            let dfa = rpni_on_corpus(&set.train)?;
            result.test1_acc = evaluate(&dfa, &set.test1)?;
            result.test2_acc = evaluate(&dfa, &set.test2)?;
            result.equivalent_to_target = Some(dfa.equivalent(&compile(&language.grammar()))?);
            result.states = Some(dfa.state_count());
        }
        CellSpec::Rnn {
            model,
            optimizer,
            early_stop,
            seed,
            ..
        } => {
            let mut cfg = RnnConfig::new(model.cell, model.d, set.train.alphabet.len()).with_optimizer(optimizer);
            cfg.epochs = spec.epochs;
            cfg.batch_size = spec.batch_size;
            cfg.seed = seed;
            let state = train(&cfg, &set.train, &[&set.test1, &set.test2], early_stop)?;
            write_atomic(&spec.logs_dir().join(format!("{key}.csv")), &metrics_csv(&state.metrics))?;
            result.test1_acc = evaluate(&state.model, &set.test1)?;
            result.test2_acc = evaluate(&state.model, &set.test2)?;
            result.val_acc = state.metrics.iter().filter_map(|m| m.val_acc).collect();
            result.final_epoch = Some(state.best_epoch.unwrap_or(state.epoch));
            result.cell = Some(model.cell);
            result.d = Some(model.d);
            result.optimizer = Some(optimizer);
            result.early_stop = early_stop;
            result.seed = Some(seed);
        }
    }
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Runs every cell of `spec` on a pool of `jobs` threads.
pub fn run_matrix(spec: &ExperimentSpec, jobs: usize) -> Result<MatrixOutcome> {
    run_matrix_with(spec, jobs, |_| {})
}

/// As [`run_matrix`], reporting each cell as it finishes. Cells that already have a
/// result file are skipped; a failing cell is recorded under `failures/` and the rest
/// of the matrix continues.
pub fn run_matrix_with(
    spec: &ExperimentSpec,
    jobs: usize,
    progress: impl Fn(&CellOutcome) + Sync,
) -> Result<MatrixOutcome> {
    spec.validate()?;
    let cells = spec.cells();
    let results_dir = spec.results_dir();
    fs::create_dir_all(&results_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let existing: Vec<Option<ExperimentResult>> = cells
        .iter()
        .map(|c| ExperimentResult::read(&results_dir.join(format!("{}.json", c.key()))).ok())
        .collect();
    let needed: BTreeSet<(Language, Regimen)> = cells
        .iter()
        .zip(&existing)
        .filter(|(_, e)| e.is_none())
        .map(|(c, _)| (c.language(), c.regimen()))
        .collect();

    let corpora: HashMap<(Language, Regimen), std::result::Result<Arc<CorpusSet>, String>> = pool.install(|| {
        needed
            .par_iter()
            .map(|&(l, r)| ((l, r), load_or_generate(spec, l, r).map(Arc::new).map_err(|e| e.to_string())))
            .collect()
    });

    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .zip(existing.into_par_iter())
            .map(|(cell, existing)| {
                let outcome = match existing {
                    Some(r) => CellOutcome::Skipped(r),
                    None => {
                        let key = cell.key();
                        let attempt = match &corpora[&(cell.language(), cell.regimen())] {
                            Ok(set) => run_cell(spec, cell, set).and_then(|r| {
                                write_atomic(&results_dir.join(format!("{key}.json")), &serde_json::to_string_pretty(&r)?)?;
                                Ok(r)
                            }),
                            Err(e) => Err(Error::Format(format!("corpus unavailable: {e}"))),
                        };
                        match attempt {
                            Ok(r) => CellOutcome::Ran(r),
                            Err(e) => {
                                let failure = CellFailure {
                                    key: key.clone(),
                                    error: e.to_string(),
                                };
                                let path = spec.failures_dir().join(format!("{key}.json"));
                                let _ = serde_json::to_string_pretty(&failure)
                                    .map_err(Error::from)
                                    .and_then(|s| write_atomic(&path, &s));
                                CellOutcome::Failed(failure)
                            }
                        }
                    }
                };
                progress(&outcome);
                outcome
            })
            .collect()
    });

    let mut out = MatrixOutcome::default();
    for o in outcomes {
        match o {
            CellOutcome::Ran(r) => {
                out.ran += 1;
                out.results.push(r);
            }
            CellOutcome::Skipped(r) => {
                out.skipped += 1;
                out.results.push(r);
            }
            CellOutcome::Failed(f) => out.failures.push(f),
        }
    }
    Ok(out)
}

/// Every `*.json` result file in `dir`, ordered by key.
pub fn load_results(dir: &Path) -> Result<Vec<ExperimentResult>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(ExperimentResult::read(&path)?);
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { n, mean, std })
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ({:.2})", self.mean, self.std)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub language: Language,
    pub regimen: Regimen,
    pub test: Split,
    /// One entry per report model column.
    pub cells: Vec<Option<Stats>>,
    pub best: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub models: Vec<String>,
    pub rows: Vec<ReportRow>,
}

fn model_order(label: &str) -> (bool, String) {
    (label == "rpni", label.to_string())
}

/// Mean and standard deviation per (language, regimen, test set, model).
pub fn aggregate(results: &[ExperimentResult]) -> Report {
    let mut models: Vec<String> = results.iter().map(|r| r.model.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    models.sort_by_key(|m| model_order(m));
    let pairs: BTreeSet<(Language, Regimen)> = results.iter().map(|r| (r.language, r.regimen)).collect();
    let mut values: BTreeMap<(Language, Regimen, Split, &str), Vec<f64>> = BTreeMap::new();
    for r in results {
        for (split, acc) in [(Split::Test1, r.test1_acc), (Split::Test2, r.test2_acc)] {
            values.entry((r.language, r.regimen, split, &r.model)).or_default().push(acc);
        }
    }
    let mut rows = Vec::new();
    for (language, regimen) in pairs {
        for test in [Split::Test1, Split::Test2] {
            let cells: Vec<Option<Stats>> = models
                .iter()
                .map(|m| values.get(&(language, regimen, test, m.as_str())).and_then(|v| Stats::of(v)))
                .collect();
            let top = cells.iter().flatten().map(|s| s.mean).fold(f64::NEG_INFINITY, f64::max);
            let best = cells.iter().map(|c| c.is_some_and(|s| s.mean == top)).collect();
            rows.push(ReportRow {
                language,
                regimen,
                test,
                cells,
                best,
            });
        }
    }
    Report { models, rows }
}

impl Report {
    /// One line per populated cell, with rounded and full-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("language,regimen,test,model,n,mean,std,mean_full,std_full,best\n");
        for row in &self.rows {
            for ((model, cell), best) in self.models.iter().zip(&row.cells).zip(&row.best) {
                if let Some(s) = cell {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{:.3},{:.2},{},{},{}",
                        row.language, row.regimen, row.test, model, s.n, s.mean, s.std, s.mean, s.std, best
                    );
                }
            }
        }
        out
    }

    /// Table with `mean (std)` per model and the best mean in each row in bold.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Language | Regimen | Test |");
        for m in &self.models {
            let _ = write!(out, " {m} |");
        }
        out.push_str("\n|---|---|---|");
        out.push_str(&"---:|".repeat(self.models.len()));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} | {} | {} |", row.language, row.regimen, row.test);
            for (cell, best) in row.cells.iter().zip(&row.best) {
                match cell {
                    Some(s) if *best => {
                        let _ = write!(out, " **{s}** |");
                    }
                    Some(s) => {
                        let _ = write!(out, " {s} |");
                    }
                    None => out.push_str(" – |"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Writes `summary.csv` and `summary.md` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("summary.csv"), &self.to_csv())?;
        write_atomic(&dir.join("summary.md"), &self.to_markdown())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Incomplete,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Incomplete => "INCOMPLETE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub status: CheckStatus,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub checks: Vec<TrendCheck>,
}

impl TrendReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} ({}) {}", c.status, c.id, c.description)?;
            for d in &c.details {
                writeln!(f, "    {d}")?;
            }
        }
        Ok(())
    }
}

/// Mean Test1/Test2 and count per (language, regimen, model) over the results that pass `keep`.
fn group_means(
    results: &[ExperimentResult],
    keep: impl Fn(&ExperimentResult) -> bool,
) -> BTreeMap<(Language, Regimen, String), (f64, f64, usize)> {
    let mut acc: BTreeMap<(Language, Regimen, String), (f64, f64, usize)> = BTreeMap::new();
    for r in results.iter().filter(|r| keep(r)) {
        let e = acc.entry((r.language, r.regimen, r.model.clone())).or_default();
        e.0 += r.test1_acc;
        e.1 += r.test2_acc;
        e.2 += 1;
    }
    for v in acc.values_mut() {
        v.0 /= v.2 as f64;
        v.1 /= v.2 as f64;
    }
    acc
}

fn status(all_pass: bool, any: bool) -> CheckStatus {
    match (any, all_pass) {
        (false, _) => CheckStatus::Incomplete,
        (true, true) => CheckStatus::Pass,
        (true, false) => CheckStatus::Fail,
    }
}

pub const GAP_THRESHOLD: f64 = 0.10;
pub const EARLY_STOP_THRESHOLD: f64 = 0.95;

/// The qualitative claims checked against a set of results:
/// (a) SP8 LSTM cells score at least 0.10 lower on Test2 than on Test1;
/// (b) SL8 and SP2 networks trained with early stopping reach 0.95 on both test sets;
/// (c) RPNI recovers the SP2 and SP4 targets exactly.
pub fn trend_checks(results: &[ExperimentResult]) -> TrendReport {
    let mut checks = Vec::new();

    let sp8 = group_means(results, |r| r.language == Language::SP8 && r.cell == Some(CellKind::Lstm));
    let details = sp8
        .iter()
        .map(|((l, reg, m), (t1, t2, n))| {
            format!("{l} {reg} {m} (n={n}): Test1 {t1:.3}, Test2 {t2:.3}, gap {:.3}", t1 - t2)
        })
        .collect();
    checks.push(TrendCheck {
        id: "a",
        description: "SP8 LSTM: Test2 mean at least 0.10 below Test1 mean",
        status: status(sp8.values().all(|(t1, t2, _)| *t2 <= t1 - GAP_THRESHOLD), !sp8.is_empty()),
        details,
    });

    let es = group_means(results, |r| {
        r.early_stop && r.cell.is_some() && matches!(r.language, Language::SL8 | Language::SP2)
    });
    let covered = [Language::SL8, Language::SP2].iter().all(|l| es.keys().any(|k| k.0 == *l));
    let details = es
        .iter()
        .map(|((l, reg, m), (t1, t2, n))| format!("{l} {reg} {m} (n={n}): Test1 {t1:.3}, Test2 {t2:.3}"))
        .collect();
    checks.push(TrendCheck {
        id: "b",
        description: "SL8 and SP2 with early stopping: both test means at least 0.95",
        status: status(
            es.values().all(|(t1, t2, _)| *t1 >= EARLY_STOP_THRESHOLD && *t2 >= EARLY_STOP_THRESHOLD),
            covered,
        ),
        details,
    });

    let rpni: Vec<&ExperimentResult> = results
        .iter()
        .filter(|r| r.model == "rpni" && matches!(r.language, Language::SP2 | Language::SP4))
        .collect();
    let covered = [Language::SP2, Language::SP4].iter().all(|l| rpni.iter().any(|r| r.language == *l));
    checks.push(TrendCheck {
        id: "c",
        description: "RPNI on SP2 and SP4 corpora returns the target automaton",
        status: status(rpni.iter().all(|r| r.equivalent_to_target == Some(true)), covered),
        details: rpni
            .iter()
            .map(|r| {
                let verdict = match r.equivalent_to_target {
                    Some(true) => "equivalent",
                    Some(false) => "not equivalent",
                    None => "unknown",
                };
                format!("{} {}: {verdict} ({} states)", r.language, r.regimen, r.states.unwrap_or(0))
            })
            .collect(),
    });

    TrendReport { checks }
}
