use std::path::Path;
use std::process::{Command, Output};

fn subreg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subreg"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUBREG_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace().find_map(|kv| kv.strip_prefix(&format!("{key}=")))
}

#[test]
fn compile_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let o = subreg(dir.path(), &["grammar", "compile", "--lang", "SP8", "--out", "sp8.json", "--dot", "sp8.dot"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&summary(&o), "states"), Some("8"));
    let o = subreg(dir.path(), &["grammar", "show", "--dfa", "sp8.json"]);
    assert_eq!(field(&summary(&o), "states"), Some("8"));
    assert!(std::fs::read_to_string(dir.path().join("sp8.dot")).unwrap().starts_with("digraph"));

    for (lang, n) in [("SL2", "3"), ("SL4", "7"), ("SL8", "15"), ("SP2", "2"), ("SP4", "4")] {
        let o = subreg(dir.path(), &["grammar", "show", "--lang", lang]);
        assert_eq!(field(&summary(&o), "states"), Some(n), "{lang}");
    }
}

#[test]
fn ascii_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let plain = stdout(&subreg(dir.path(), &["grammar", "show", "--lang", "SL2"]));
    let ascii = stdout(&subreg(dir.path(), &["grammar", "show", "--lang", "SL2", "--ascii"]));
    assert!(plain.contains("⋊b") && plain.contains("a⋉"));
    assert!(ascii.contains(">b") && ascii.contains("a<") && !ascii.contains('⋊'));
}

#[test]
fn generate_verify_and_force() {
    let dir = tempfile::tempdir().unwrap();
    let gen = ["data", "gen", "--lang", "SL2", "--regimen", "1k", "--seed", "42"];
    let o = subreg(dir.path(), &gen);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&summary(&o), "train"), Some("1000"));
    let o = subreg(dir.path(), &["data", "verify", "--lang", "SL2", "--regimen", "1k"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(field(&summary(&o), "failed"), Some("0"));

    let train = dir.path().join("data/SL2_1k_train.tsv");
    let before = std::fs::read(&train).unwrap();
    assert!(subreg(dir.path(), &gen).status.success());
    let other = subreg(dir.path(), &["data", "gen", "--lang", "SL2", "--regimen", "1k", "--seed", "7"]);
    assert_eq!(other.status.code(), Some(1));
    assert_eq!(std::fs::read(&train).unwrap(), before);
    let forced = subreg(dir.path(), &["data", "gen", "--lang", "SL2", "--regimen", "1k", "--seed", "7", "--force"]);
    assert!(forced.status.success());
    assert_ne!(std::fs::read(&train).unwrap(), before);

    let text = std::fs::read_to_string(&train).unwrap();
    let flipped = text.replacen("\n1\t", "\n0\t", 1);
    std::fs::write(&train, flipped).unwrap();
    let o = subreg(dir.path(), &["data", "verify", "--lang", "SL2", "--regimen", "1k"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_subreg"))
        .args(["data", "gen", "--lang", "SP2", "--regimen", "1k"])
        .current_dir(dir.path())
        .env("SUBREG_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(field(&summary(&o), "seed"), Some("9"));
    let o = subreg(dir.path(), &["data", "gen", "--lang", "SP2", "--regimen", "1k", "--dir", "d2"]);
    assert_eq!(field(&summary(&o), "seed"), Some("42"));
}

#[test]
fn rpni_and_rnn_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert!(subreg(dir.path(), &["data", "gen", "--lang", "SP2", "--regimen", "1k"]).status.success());
    let o = subreg(dir.path(), &["rpni", "learn", "--train", "data/SP2_1k_train.tsv", "--out", "sp2.json", "--log", "merges.txt"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&summary(&o), "states"), Some("2"));
    let o = subreg(
        dir.path(),
        &["rpni", "eval", "--dfa", "sp2.json", "--corpus", "data/SP2_1k_test2.tsv", "--target", "SP2"],
    );
    assert_eq!(field(&summary(&o), "equivalent"), Some("true"));
    assert_eq!(field(&summary(&o), "SP2_test2_acc"), Some("1.0000"));
    let first = std::fs::read(dir.path().join("sp2.json")).unwrap();
    subreg(dir.path(), &["rpni", "learn", "--train", "data/SP2_1k_train.tsv", "--out", "sp2.json"]);
    assert_eq!(std::fs::read(dir.path().join("sp2.json")).unwrap(), first);

    let train = [
        "rnn", "train", "--train", "data/SP2_1k_train.tsv", "--test", "data/SP2_1k_test1.tsv", "--cell", "elman", "--d", "4",
        "--epochs", "2", "--out", "m.json", "--log", "log.csv",
    ];
    let o = subreg(dir.path(), &train);
    assert!(o.status.success(), "{o:?}");
    let acc = field(&summary(&o), "test1_acc").unwrap().to_string();
    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(log.starts_with("epoch,train_loss,val_acc,test1_acc,test2_acc\n"));
    assert_eq!(log.lines().count(), 3);
    assert_eq!(subreg(dir.path(), &train).status.code(), Some(1));
    let o = subreg(dir.path(), &["rnn", "eval", "--model", "m.json", "--corpus", "data/SP2_1k_test1.tsv"]);
    assert_eq!(field(&summary(&o), "SP2_test1_acc"), Some(acc.as_str()));
}

#[test]
fn experiment_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "languages": ["SP2", "SP4"], "regimens": ["1k"], "models": [{"cell": "elman", "d": 3}],
        "optimizer": "adam", "early_stop": [false], "seeds": 1, "epochs": 1, "batch_size": 128,
        "rpni": true, "data_seed": 42, "output_dir": "runs"
    }"#;
    std::fs::write(dir.path().join("tiny.json"), config).unwrap();
    let o = subreg(dir.path(), &["exp", "run", "--config", "tiny.json", "--jobs", "2"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&summary(&o), "ran"), Some("4"));
    let o = subreg(dir.path(), &["exp", "run", "--config", "tiny.json"]);
    assert_eq!(field(&summary(&o), "skipped"), Some("4"));
    let o = subreg(dir.path(), &["exp", "report", "--config", "tiny.json"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&summary(&o), "rows"), Some("4"));
    assert!(dir.path().join("runs/reports/summary.md").exists());
    let o = subreg(dir.path(), &["exp", "check", "--config", "tiny.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&summary(&o), "a"), None);
    assert!(stdout(&o).contains("INCOMPLETE (a)"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(subreg(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(subreg(dir.path(), &["data", "gen", "--lang", "SL2"]).status.code(), Some(2));
    assert_eq!(subreg(dir.path(), &["grammar", "compile", "--out", "x.json"]).status.code(), Some(2));
    assert_eq!(subreg(dir.path(), &["rnn", "train", "--train", "x", "--out", "y", "--cell", "gru"]).status.code(), Some(2));
    assert_eq!(subreg(dir.path(), &["data", "gen", "--lang", "SL2", "--regimen", "5k"]).status.code(), Some(1));
}

const HELP_PAGES: &[&[&str]] = &[
    &[],
    &["grammar"],
    &["grammar", "compile"],
    &["grammar", "show"],
    &["data"],
    &["data", "gen"],
    &["data", "verify"],
    &["rpni"],
    &["rpni", "learn"],
    &["rpni", "eval"],
    &["rnn"],
    &["rnn", "train"],
    &["rnn", "eval"],
    &["exp"],
    &["exp", "run"],
    &["exp", "report"],
    &["exp", "check"],
];

#[test]
fn help_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut all = String::new();
    for page in HELP_PAGES {
        let mut args = page.to_vec();
        args.push("--help");
        let o = subreg(dir.path(), &args);
        assert!(o.status.success());
        all.push_str(&format!("$ subreg {}\n{}\n", args.join(" "), stdout(&o)));
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &all).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file exists (run with UPDATE_GOLDEN=1)");
    assert_eq!(all, expected);
}
