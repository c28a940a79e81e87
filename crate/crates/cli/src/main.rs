//! `subreg`: compile grammars, generate and verify corpora, run RPNI and the recurrent
//! learners, and drive the experiment matrix.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "subreg", version, about = "Strictly local and strictly piecewise language learning laboratory")]
pub struct Cli {
    /// Seed for corpus generation and model initialization [default: 42]
    #[arg(long, global = true, env = "SUBREG_SEED")]
    pub seed: Option<u64>,

    /// Render word boundaries as `>` and `<` instead of ⋊ and ⋉
    #[arg(long, global = true)]
    pub ascii: bool,

    /// Overwrite existing output files whose contents would change
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile and inspect grammars
    #[command(subcommand)]
    Grammar(GrammarCmd),
    /// Generate and verify corpora
    #[command(subcommand)]
    Data(DataCmd),
    /// Learn automata with RPNI
    #[command(subcommand)]
    Rpni(RpniCmd),
    /// Train and evaluate recurrent classifiers
    #[command(subcommand)]
    Rnn(RnnCmd),
    /// Run the experiment matrix and summarize it
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GrammarSource {
    /// Built-in language (SL2, SL4, SL8, SP2, SP4, SP8)
    #[arg(long)]
    pub lang: Option<String>,
    /// Grammar JSON file
    #[arg(long)]
    pub grammar: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GrammarCmd {
    /// Compile a grammar to its minimal DFA (JSON)
    Compile {
        #[command(flatten)]
        source: GrammarSource,
        /// Output DFA file
        #[arg(long)]
        out: PathBuf,
        /// Also write a Graphviz rendering
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print a grammar, or summarize a compiled DFA
    Show {
        /// Built-in language
        #[arg(long, conflicts_with_all = ["grammar", "dfa"])]
        lang: Option<String>,
        /// Grammar JSON file
        #[arg(long, conflicts_with = "dfa")]
        grammar: Option<PathBuf>,
        /// DFA JSON file
        #[arg(long)]
        dfa: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DataCmd {
    /// Generate Train, Test1 and Test2 for one language and regimen
    Gen {
        /// Built-in language
        #[arg(long)]
        lang: String,
        /// 1k, 10k or 100k
        #[arg(long)]
        regimen: String,
        /// Output directory
        #[arg(long, default_value = "data")]
        dir: PathBuf,
    },
    /// Check every corpus invariant of a generated set
    Verify {
        /// Built-in language
        #[arg(long)]
        lang: String,
        /// 1k, 10k or 100k
        #[arg(long)]
        regimen: String,
        /// Directory holding the corpora
        #[arg(long, default_value = "data")]
        dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum RpniCmd {
    /// Learn a DFA from a training corpus
    Learn {
        /// Training corpus (TSV)
        #[arg(long)]
        train: PathBuf,
        /// Output DFA file
        #[arg(long)]
        out: PathBuf,
        /// Write the merge log here
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Score a DFA on corpora
    Eval {
        /// DFA JSON file
        #[arg(long)]
        dfa: PathBuf,
        /// Corpus to score (repeatable)
        #[arg(long = "corpus", required = true)]
        corpora: Vec<PathBuf>,
        /// Also report whether the DFA equals this built-in language
        #[arg(long)]
        target: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CellArg {
    Lstm,
    Elman,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReadoutArg {
    /// State after each word's last symbol
    Last,
    /// State after the final padded step
    Final,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    /// N(0, 1/sqrt(d))
    Scaled,
    /// N(0, 1)
    Unit,
}

#[derive(Debug, Subcommand)]
pub enum RnnCmd {
    /// Train a classifier and save a checkpoint
    Train {
        /// Training corpus (TSV)
        #[arg(long)]
        train: PathBuf,
        /// Test corpus scored after every epoch (repeatable)
        #[arg(long = "test")]
        tests: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "lstm")]
        cell: CellArg,
        /// Hidden and embedding size
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch_size: usize,
        #[arg(long, value_enum, default_value = "adam")]
        optimizer: OptimizerArg,
        /// Learning rate (defaults: 0.001 for adam, 0.1 for sgd)
        #[arg(long)]
        lr: Option<f64>,
        /// Global L2 gradient clipping threshold
        #[arg(long, default_value_t = 1.0)]
        clip: f64,
        /// Hold out 10% of the training data and keep the best validation epoch
        #[arg(long)]
        early_stop: bool,
        #[arg(long, value_enum, default_value = "last")]
        readout: ReadoutArg,
        #[arg(long, value_enum, default_value = "scaled")]
        init: InitArg,
        /// Checkpoint file
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch CSV log
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Score a checkpoint on corpora
    Eval {
        /// Checkpoint file
        #[arg(long)]
        model: PathBuf,
        /// Corpus to score (repeatable)
        #[arg(long = "corpus", required = true)]
        corpora: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ExpSource {
    /// Built-in matrix
    #[arg(long, value_parser = ["desk", "full"], conflicts_with = "config")]
    pub preset: Option<String>,
    /// Matrix specification (JSON)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the specification)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExpCmd {
    /// Run every missing cell of the matrix
    Run {
        #[command(flatten)]
        source: ExpSource,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the number of model seeds
        #[arg(long)]
        seeds: Option<u64>,
        /// Override the number of epochs
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Aggregate result files into summary.csv and summary.md
    Report {
        #[command(flatten)]
        source: ExpSource,
    },
    /// Evaluate the trend checks; exits 1 unless all pass
    Check {
        #[command(flatten)]
        source: ExpSource,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
