use std::fs;

use subreg_core::experiments::{aggregate, load_results, run_matrix, trend_checks, CheckStatus, ExperimentSpec, ModelSpec};
use subreg_core::rnn::CellKind;
use subreg_core::{builtin_language, compile, evaluate, rpni_on_corpus, verify_corpus, CorpusSet, Language, Regimen};

fn tiny_spec(dir: &std::path::Path) -> ExperimentSpec {
    ExperimentSpec {
        languages: vec![Language::SL2, Language::SP2],
        regimens: vec![Regimen::K1],
        models: vec![ModelSpec {
            cell: CellKind::Elman,
            d: 3,
        }],
        early_stop: vec![false],
        seeds: 2,
        epochs: 1,
        output_dir: dir.to_path_buf(),
        ..ExperimentSpec::desk()
    }
}

#[test]
fn matrix_runs_once_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let first = run_matrix(&spec, 2).unwrap();
    assert!(first.failures.is_empty(), "{:?}", first.failures);
    assert_eq!((first.ran, first.skipped), (6, 0));
    let rnn = first.results.iter().filter(|r| r.cell.is_some()).count();
    assert_eq!((rnn, first.results.len() - rnn), (4, 2));
    assert!(dir.path().join("results/SL2_1k_elman-v3_s1.json").exists());
    assert!(dir.path().join("logs/SL2_1k_elman-v3_s1.csv").exists());
    assert!(dir.path().join("corpora/SP2_1k_test2.tsv").exists());

    let before = fs::read_to_string(dir.path().join("results/SP2_1k_rpni.json")).unwrap();
    let second = run_matrix(&spec, 2).unwrap();
    assert_eq!((second.ran, second.skipped), (0, 6));
    assert_eq!(second.results, first.results);
    assert_eq!(fs::read_to_string(dir.path().join("results/SP2_1k_rpni.json")).unwrap(), before);

    let loaded = load_results(&spec.results_dir()).unwrap();
    assert_eq!(loaded.len(), 6);
    let report = aggregate(&loaded);
    assert_eq!(report.rows.len(), 4);
    assert_eq!(aggregate(&load_results(&spec.results_dir()).unwrap()), report);

    let rpni_sp2 = loaded.iter().find(|r| r.key == "SP2_1k_rpni").unwrap();
    assert_eq!(rpni_sp2.equivalent_to_target, Some(true));
    let checks = trend_checks(&loaded);
    assert_eq!(checks.checks[0].status, CheckStatus::Incomplete);
}

#[test]
fn rerun_of_rnn_cell_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut spec_a = tiny_spec(a.path());
    spec_a.rpni = false;
    spec_a.languages = vec![Language::SL2];
    let mut spec_b = spec_a.clone();
    spec_b.output_dir = b.path().to_path_buf();
    let ra = run_matrix(&spec_a, 1).unwrap().results;
    let rb = run_matrix(&spec_b, 3).unwrap().results;
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!((x.test1_acc, x.test2_acc), (y.test1_acc, y.test2_acc));
    }
}

#[test]
fn corpus_seed_mismatch_is_a_cell_failure() {
    let dir = tempfile::tempdir().unwrap();
    let g = builtin_language("SL2").unwrap();
    CorpusSet::generate("SL2", &g, Regimen::K1, 7).unwrap().write_to(&dir.path().join("corpora")).unwrap();
    let mut spec = tiny_spec(dir.path());
    spec.languages = vec![Language::SL2, Language::SP2];
    let out = run_matrix(&spec, 2).unwrap();
    assert_eq!(out.failures.len(), 3);
    assert_eq!(out.ran, 3);
    assert!(dir.path().join("failures/SL2_1k_rpni.json").exists());
}

#[test]
fn datagen_to_learners() {
    let g = builtin_language("SP2").unwrap();
    let set = CorpusSet::generate("SP2", &g, Regimen::K1, 42).unwrap();
    for c in set.splits() {
        let train = (c.split != subreg_core::Split::Train).then_some(&set.train);
        assert!(verify_corpus(c, &g, train).passed());
    }
    let dfa = rpni_on_corpus(&set.train).unwrap();
    assert!(dfa.equivalent(&compile(&g)).unwrap());
    assert_eq!(evaluate(&dfa, &set.test1).unwrap(), 1.0);
    assert_eq!(evaluate(&dfa, &set.test2).unwrap(), 1.0);
}

#[test]
fn shipped_configs_match_presets() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, spec) in [("desk", ExperimentSpec::desk()), ("full", ExperimentSpec::full())] {
        let text = fs::read_to_string(root.join(format!("{name}.json"))).unwrap();
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), spec);
    }
}
