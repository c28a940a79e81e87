use std::fs;
use std::path::Path;

use subreg_core::automata::Dfa;
use subreg_core::datagen::corpus_file_name;
use subreg_core::experiments::{self, ExperimentSpec};
use subreg_core::rnn::{metrics_csv, train_with, CellKind, InitScheme, OptimizerKind, Readout, RnnConfig, TrainState};
use subreg_core::rpni::{rpni_with_log, sample_sets};
use subreg_core::{
    builtin_language, compile, evaluate, verify_corpus, Classifier, CorpusSet, GrammarKind, LabeledCorpus, Language,
    Regimen, Split, SubregularGrammar,
};

use crate::output::{read, CliError, CliResult, Outputs, Summary};
use crate::{
    CellArg, Cli, Command, DataCmd, ExpCmd, ExpSource, GrammarCmd, GrammarSource, InitArg, OptimizerArg, ReadoutArg,
    RnnCmd, RpniCmd, DEFAULT_SEED,
};

pub fn run(cli: &Cli) -> CliResult<Summary> {
    match &cli.command {
        Command::Grammar(c) => grammar(cli, c),
        Command::Data(c) => data(cli, c),
        Command::Rpni(c) => rpni(cli, c),
        Command::Rnn(c) => rnn(cli, c),
        Command::Exp(c) => exp(cli, c),
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(DEFAULT_SEED)
}

fn load_grammar(lang: Option<&str>, file: Option<&Path>) -> CliResult<(String, SubregularGrammar)> {
    match (lang, file) {
        (Some(l), _) => {
            let l: Language = l.parse()?;
            Ok((l.name().to_string(), l.grammar()))
        }
        (None, Some(p)) => {
            let name = p.file_stem().map_or_else(|| "grammar".to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, SubregularGrammar::from_json(&read(p)?)?))
        }
        (None, None) => Err(CliError::Failed("pass --lang or --grammar".into())),
    }
}

fn kind_name(kind: GrammarKind) -> &'static str {
    match kind {
        GrammarKind::StrictlyLocal => "SL",
        GrammarKind::StrictlyPiecewise => "SP",
    }
}

fn grammar(cli: &Cli, cmd: &GrammarCmd) -> CliResult<Summary> {
    match cmd {
        GrammarCmd::Compile {
            source: GrammarSource { lang, grammar },
            out,
            dot,
        } => {
            let (name, g) = load_grammar(lang.as_deref(), grammar.as_deref())?;
            let dfa = compile(&g);
            let mut outputs = Outputs::default();
            outputs.add(out, dfa.to_json() + "\n");
            if let Some(dot) = dot {
                outputs.add(dot, dfa.to_dot());
            }
            outputs.commit(cli.force)?;
            Ok(Summary::new("grammar.compile")
                .kv("lang", name)
                .kv("kind", kind_name(g.kind()))
                .kv("k", g.k())
                .kv("states", dfa.state_count())
                .kv("complete_states", dfa.num_states())
                .kv("out", out.display()))
        }
        GrammarCmd::Show { lang, grammar, dfa } => {
            if let Some(path) = dfa {
                let d = Dfa::from_json(&read(path)?)?;
                println!("alphabet {}", d.alphabet());
                println!("{} states ({} including the sink), {} accepting", d.state_count(), d.num_states(), d.accepting_states().count());
                return Ok(Summary::new("grammar.show")
                    .kv("dfa", path.display())
                    .kv("states", d.state_count())
                    .kv("complete_states", d.num_states()));
            }
            let (name, g) = load_grammar(lang.as_deref(), grammar.as_deref())?;
            let items = g.forbidden_strings(cli.ascii);
            let d = compile(&g);
            println!("{}", g.to_json(cli.ascii));
            println!("forbidden: {}", items.join(" "));
            println!("minimal DFA: {} states ({} including the sink)", d.state_count(), d.num_states());
            Ok(Summary::new("grammar.show")
                .kv("lang", name)
                .kv("kind", kind_name(g.kind()))
                .kv("k", g.k())
                .kv("forbidden", items.len())
                .kv("states", d.state_count()))
        }
    }
}

fn parse_regimen(s: &str) -> CliResult<Regimen> {
    Ok(s.parse()?)
}

fn data(cli: &Cli, cmd: &DataCmd) -> CliResult<Summary> {
    match cmd {
        DataCmd::Gen { lang, regimen, dir } => {
            let language: Language = lang.parse()?;
            let regimen = parse_regimen(regimen)?;
            let seed = seed(cli);
            let set = CorpusSet::generate(language.name(), &language.grammar(), regimen, seed)?;
            let mut outputs = Outputs::default();
            for c in set.splits() {
                outputs.add(dir.join(c.file_name()), c.to_tsv());
            }
            outputs.commit(cli.force)?;
            Ok(Summary::new("data.gen")
                .kv("lang", language)
                .kv("regimen", regimen)
                .kv("seed", seed)
                .kv("train", set.train.len())
                .kv("test1", set.test1.len())
                .kv("test2", set.test2.len())
                .kv("dir", dir.display()))
        }
        DataCmd::Verify { lang, regimen, dir } => {
            let language: Language = lang.parse()?;
            let regimen = parse_regimen(regimen)?;
            let set = CorpusSet::read_from(dir, language.name(), regimen)?;
            let g = language.grammar();
            let mut checks = 0;
            let mut failed = 0;
            for c in set.splits() {
                let report = verify_corpus(c, &g, (c.split != Split::Train).then_some(&set.train));
                println!("{}:", corpus_file_name(language.name(), regimen, c.split));
                print!("{report}");
                checks += report.checks.len();
                failed += report.failed().count();
            }
            let summary = Summary::new("data.verify")
                .kv("lang", language)
                .kv("regimen", regimen)
                .kv("checks", checks)
                .kv("failed", failed);
            if failed > 0 {
                return Err(CliError::Failed(summary.to_string()));
            }
            Ok(summary)
        }
    }
}

fn read_corpus(path: &Path) -> CliResult<LabeledCorpus> {
    Ok(LabeledCorpus::from_tsv(&read(path)?)?)
}

fn score(model: &impl Classifier, corpora: &[std::path::PathBuf], mut summary: Summary) -> CliResult<Summary> {
    for path in corpora {
        let c = read_corpus(path)?;
        let acc = evaluate(model, &c)?;
        println!("{}\t{}\t{acc:.4}", path.display(), c.len());
        summary = summary.kv(&format!("{}_{}_acc", c.language, c.split), format!("{acc:.4}"));
    }
    Ok(summary)
}

fn rpni(cli: &Cli, cmd: &RpniCmd) -> CliResult<Summary> {
    match cmd {
        RpniCmd::Learn { train, out, log } => {
            let corpus = read_corpus(train)?;
            let (pos, neg) = sample_sets(&corpus);
            let outcome = rpni_with_log(&pos, &neg, &corpus.alphabet)?;
            let mut outputs = Outputs::default();
            outputs.add(out, outcome.dfa.to_json() + "\n");
            if let Some(log) = log {
                outputs.add(log, outcome.log_text());
            }
            outputs.commit(cli.force)?;
            Ok(Summary::new("rpni.learn")
                .kv("lang", &corpus.language)
                .kv("positives", pos.len())
                .kv("negatives", neg.len())
                .kv("pta_states", outcome.pta_states)
                .kv("states", outcome.dfa.state_count())
                .kv("out", out.display()))
        }
        RpniCmd::Eval { dfa, corpora, target } => {
            let d = Dfa::from_json(&read(dfa)?)?;
            let mut summary = Summary::new("rpni.eval").kv("states", d.state_count());
            if let Some(t) = target {
                let g = builtin_language(t)?;
                summary = summary.kv("equivalent", d.equivalent(&compile(&g))?);
            }
            score(&d, corpora, summary)
        }
    }
}

fn rnn(cli: &Cli, cmd: &RnnCmd) -> CliResult<Summary> {
    match cmd {
        RnnCmd::Train {
            train,
            tests,
            cell,
            d,
            epochs,
            batch_size,
            optimizer,
            lr,
            clip,
            early_stop,
            readout,
            init,
            out,
            log,
        } => {
            let corpus = read_corpus(train)?;
            let test_sets = tests.iter().map(|p| read_corpus(p)).collect::<CliResult<Vec<_>>>()?;
            let cell = match cell {
                CellArg::Lstm => CellKind::Lstm,
                CellArg::Elman => CellKind::Elman,
            };
            let optimizer = match optimizer {
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::Sgd => OptimizerKind::Sgd,
            };
            let mut cfg = RnnConfig::new(cell, *d, corpus.alphabet.len()).with_optimizer(optimizer);
            cfg.epochs = *epochs;
            cfg.batch_size = *batch_size;
            cfg.clip_norm = *clip;
            cfg.seed = seed(cli);
            cfg.readout = match readout {
                ReadoutArg::Last => Readout::LastSymbol,
                ReadoutArg::Final => Readout::FinalStep,
            };
            cfg.init = match init {
                InitArg::Scaled => InitScheme::Scaled,
                InitArg::Unit => InitScheme::Unit,
            };
            if let Some(lr) = lr {
                cfg.learning_rate = *lr;
            }
            // Refuse before spending time on training.
            for path in std::iter::once(out).chain(log) {
                if path.exists() && !cli.force {
                    return Err(CliError::OutputExists(path.clone()));
                }
            }
            let refs: Vec<&LabeledCorpus> = test_sets.iter().collect();
            let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
            let state = train_with(&cfg, &corpus, &refs, *early_stop, |m| {
                eprintln!(
                    "epoch {:3} loss {:.5} val {} test1 {} test2 {}",
                    m.epoch,
                    m.train_loss,
                    fmt(m.val_acc),
                    fmt(m.test1_acc),
                    fmt(m.test2_acc)
                );
            })?;
            let mut outputs = Outputs::default();
            outputs.add(out, serde_json::to_string(&state.to_checkpoint()).map_err(subreg_core::Error::from)?);
            if let Some(log) = log {
                outputs.add(log, metrics_csv(&state.metrics));
            }
            outputs.commit(cli.force)?;
            let mut summary = Summary::new("rnn.train")
                .kv("cell", cell)
                .kv("d", d)
                .kv("seed", cfg.seed)
                .kv("epochs", state.epoch)
                .kv("final_epoch", state.best_epoch.unwrap_or(state.epoch))
                .kv("train_loss", format!("{:.5}", state.metrics.last().map_or(f64::NAN, |m| m.train_loss)));
            for t in &test_sets {
                summary = summary.kv(&format!("{}_acc", t.split), format!("{:.4}", evaluate(&state.model, t)?));
            }
            Ok(summary.kv("out", out.display()))
        }
        RnnCmd::Eval { model, corpora } => {
            let state = TrainState::load(model)?;
            let summary = Summary::new("rnn.eval")
                .kv("cell", state.config().cell)
                .kv("d", state.config().d);
            score(&state.model, corpora, summary)
        }
    }
}

fn load_spec(cli: &Cli, source: &ExpSource) -> CliResult<ExperimentSpec> {
    let mut spec = match (&source.preset, &source.config) {
        (_, Some(path)) => ExperimentSpec::from_json(&read(path)?)?,
        (Some(name), None) => ExperimentSpec::preset(name)?,
        (None, None) => ExperimentSpec::desk(),
    };
    if let Some(out) = &source.out {
        spec.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        spec.data_seed = seed;
    }
    Ok(spec)
}

fn exp(cli: &Cli, cmd: &ExpCmd) -> CliResult<Summary> {
    match cmd {
        ExpCmd::Run {
            source,
            jobs,
            seeds,
            epochs,
        } => {
            let mut spec = load_spec(cli, source)?;
            if let Some(s) = seeds {
                spec.seeds = *s;
            }
            if let Some(e) = epochs {
                spec.epochs = *e;
            }
            spec.validate()?;
            if cli.force {
                for cell in spec.cells() {
                    let _ = fs::remove_file(spec.results_dir().join(format!("{}.json", cell.key())));
                }
            }
            let total = spec.cells().len();
            let done = std::sync::atomic::AtomicUsize::new(0);
            let outcome = experiments::run_matrix_with(&spec, *jobs, |o| {
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                match o {
                    experiments::CellOutcome::Ran(r) => eprintln!(
                        "[{n}/{total}] {} test1 {:.3} test2 {:.3} ({:.1}s)",
                        r.key, r.test1_acc, r.test2_acc, r.wall_time_s
                    ),
                    experiments::CellOutcome::Skipped(r) => eprintln!("[{n}/{total}] {} (already done)", r.key),
                    experiments::CellOutcome::Failed(f) => eprintln!("[{n}/{total}] {} FAILED: {}", f.key, f.error),
                }
            })?;
            let summary = Summary::new("exp.run")
                .kv("cells", total)
                .kv("ran", outcome.ran)
                .kv("skipped", outcome.skipped)
                .kv("failed", outcome.failures.len())
                .kv("results", spec.results_dir().display());
            if !outcome.failures.is_empty() {
                return Err(CliError::Failed(summary.to_string()));
            }
            Ok(summary)
        }
        ExpCmd::Report { source } => {
            let spec = load_spec(cli, source)?;
            let results = experiments::load_results(&spec.results_dir())?;
            if results.is_empty() {
                return Err(CliError::Failed(format!("no results in {}", spec.results_dir().display())));
            }
            let report = experiments::aggregate(&results);
            print!("{}", report.to_markdown());
            let dir = spec.reports_dir();
            let mut outputs = Outputs::default();
            outputs.add(dir.join("summary.csv"), report.to_csv());
            outputs.add(dir.join("summary.md"), report.to_markdown());
            outputs.commit(cli.force)?;
            Ok(Summary::new("exp.report")
                .kv("results", results.len())
                .kv("rows", report.rows.len())
                .kv("reports", dir.display()))
        }
        ExpCmd::Check { source } => {
            let spec = load_spec(cli, source)?;
            let results = experiments::load_results(&spec.results_dir()).unwrap_or_default();
            let report = experiments::trend_checks(&results);
            print!("{report}");
            let mut summary = Summary::new("exp.check");
            for c in &report.checks {
                summary = summary.kv(c.id, c.status);
            }
            let summary = summary.kv("passed", report.passed());
            if report.passed() {
                Ok(summary)
            } else {
                Err(CliError::Failed(summary.to_string()))
            }
        }
    }
}
