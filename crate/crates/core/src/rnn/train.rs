use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{RnnConfig, RnnModel};
use super::network::{loss_and_gradient, Batch};
use super::optim::{clip_global_norm, Optimizer};
use crate::datagen::{Label, LabeledCorpus, Split};
use crate::error::{Error, Result};
use crate::eval::evaluate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_acc: Option<f64>,
    pub test1_acc: Option<f64>,
    pub test2_acc: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainState {
    pub model: RnnModel,
    pub optimizer: Optimizer,
    /// Completed epochs.
    pub epoch: usize,
    pub metrics: Vec<EpochMetrics>,
    /// Epoch whose snapshot `model` holds when early stopping was used.
    pub best_epoch: Option<usize>,
    pub rng: ChaCha8Rng,
}

impl TrainState {
    pub fn new(config: &RnnConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let model = RnnModel::init(config, &mut rng)?;
        let optimizer = Optimizer::new(config.optimizer, model.num_params(), config.learning_rate);
        Ok(Self {
            model,
            optimizer,
            epoch: 0,
            metrics: Vec::new(),
            best_epoch: None,
            rng,
        })
    }

    pub fn config(&self) -> &RnnConfig {
        &self.model.config
    }

    /// One pass over `data`: length-sorted blocks in shuffled order. Returns the mean loss.
    pub fn run_epoch(&mut self, data: &[(&[u8], Label)]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InvalidParameter("cannot train on an empty corpus".into()));
        }
        let cfg = self.model.config.clone();
        let pad = self.model.layout.pad();
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by_key(|&i| data[i].0.len());
        let mut blocks: Vec<Vec<usize>> = order.chunks(cfg.batch_size).map(<[usize]>::to_vec).collect();
        blocks.shuffle(&mut self.rng);
        for b in &mut blocks {
            b.shuffle(&mut self.rng);
        }

        let epoch = self.epoch + 1;
        let mut total = 0.0;
        for (bi, block) in blocks.iter().enumerate() {
            let words: Vec<&[u8]> = block.iter().map(|&i| data[i].0).collect();
            let labels: Vec<Label> = block.iter().map(|&i| data[i].1).collect();
            let (loss, mut grad) = loss_and_gradient(&self.model, &Batch::from_sequences(&words, pad), &labels)?;
            let max_grad = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let diverged = |loss| Error::Diverged {
                epoch,
                batch: bi,
                loss,
                max_grad,
            };
            if !loss.is_finite() || !max_grad.is_finite() {
                return Err(diverged(loss));
            }
            clip_global_norm(&mut grad, cfg.clip_norm);
            self.optimizer.step(&mut self.model.params, &grad);
            self.model.pin_pad();
            if !self.model.is_finite() {
                return Err(diverged(loss));
            }
            total += loss * block.len() as f64;
        }
        self.epoch = epoch;
        Ok(total / data.len() as f64)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            config: self.model.config.clone(),
            params: self.model.params.clone(),
            epoch: self.epoch,
            best_epoch: self.best_epoch,
            metrics: self.metrics.clone(),
            optimizer: self.optimizer.clone(),
            rng: RngState {
                seed: hex(&self.rng.get_seed()),
                stream: self.rng.get_stream(),
                word_pos: self.rng.get_word_pos().to_string(),
            },
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self> {
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint {} v{}", c.format, c.version)));
        }
        let mut model = RnnModel::zeros(&c.config)?;
        if c.params.len() != model.num_params() {
            return Err(Error::Format(format!(
                "checkpoint has {} parameters, config needs {}",
                c.params.len(),
                model.num_params()
            )));
        }
        model.params = c.params;
        let seed: [u8; 32] = unhex(&c.rng.seed)?
            .try_into()
            .map_err(|_| Error::Format("rng seed must be 32 bytes".into()))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(c.rng.stream);
        rng.set_word_pos(c.rng.word_pos.parse().map_err(|_| Error::Format("bad rng word_pos".into()))?);
        Ok(Self {
            model,
            optimizer: c.optimizer,
            epoch: c.epoch,
            metrics: c.metrics,
            best_epoch: c.best_epoch,
            rng,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

const CHECKPOINT_FORMAT: &str = "subreg-rnn";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: String,
    pub stream: u64,
    pub word_pos: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: RnnConfig,
    pub params: Vec<f64>,
    pub epoch: usize,
    pub best_epoch: Option<usize>,
    pub metrics: Vec<EpochMetrics>,
    pub optimizer: Optimizer,
    pub rng: RngState,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn unhex(s: &str) -> Result<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return Err(Error::Format("odd-length hex string".into()));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|_| Error::Format(format!("bad hex {s:?}"))))
        .collect()
}

fn check_alphabet(config: &RnnConfig, corpus: &LabeledCorpus) -> Result<()> {
    if corpus.alphabet.len() != config.alphabet_size {
        return Err(Error::InvalidParameter(format!(
            "model expects {} symbols, corpus {} has {}",
            config.alphabet_size,
            corpus.language,
            corpus.alphabet.len()
        )));
    }
    Ok(())
}

/// Trains a fresh model. With `early_stop`, a random tenth of `train` is held out and
/// the returned model is the snapshot with the best validation accuracy.
pub fn train(config: &RnnConfig, train: &LabeledCorpus, tests: &[&LabeledCorpus], early_stop: bool) -> Result<TrainState> {
    train_with(config, train, tests, early_stop, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with(
    config: &RnnConfig,
    train: &LabeledCorpus,
    tests: &[&LabeledCorpus],
    early_stop: bool,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainState> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidParameter("training corpus is empty".into()));
    }
    check_alphabet(config, train)?;
    for t in tests {
        check_alphabet(config, t)?;
    }
    let mut state = TrainState::new(config)?;

    let mut idx: Vec<usize> = (0..train.len()).collect();
    let mut validation = None;
    if early_stop {
        idx.shuffle(&mut state.rng);
        let n_val = ((train.len() as f64 * config.validation_fraction).round() as usize).clamp(1, train.len() - 1);
        let mut held = train.clone();
        held.entries = idx[..n_val].iter().map(|&i| train.entries[i].clone()).collect();
        validation = Some(held);
        idx = idx[n_val..].to_vec();
        idx.sort_unstable();
    }
    let data: Vec<(&[u8], Label)> = idx.iter().map(|&i| (&train.entries[i].word[..], train.entries[i].label)).collect();

    let test_acc = |model: &RnnModel, split: Split| -> Result<Option<f64>> {
        tests.iter().find(|t| t.split == split).map(|t| evaluate(model, t)).transpose()
    };
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for _ in 0..config.epochs {
        let train_loss = state.run_epoch(&data)?;
        let val_acc = validation.as_ref().map(|v| evaluate(&state.model, v)).transpose()?;
        let m = EpochMetrics {
            epoch: state.epoch,
            train_loss,
            val_acc,
            test1_acc: test_acc(&state.model, Split::Test1)?,
            test2_acc: test_acc(&state.model, Split::Test2)?,
        };
        if let Some(acc) = val_acc {
            if best.as_ref().is_none_or(|b| acc > b.0) {
                best = Some((acc, state.epoch, state.model.params.clone()));
            }
        }
        on_epoch(&m);
        state.metrics.push(m);
    }
    if let Some((_, epoch, params)) = best {
        state.model.params = params;
        state.best_epoch = Some(epoch);
    }
    Ok(state)
}

/// Training log with one row per epoch; missing values are left empty.
pub fn metrics_csv(metrics: &[EpochMetrics]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("epoch,train_loss,val_acc,test1_acc,test2_acc\n");
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.epoch,
            m.train_loss,
            opt(m.val_acc),
            opt(m.test1_acc),
            opt(m.test2_acc)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_tests, generate_train, Regimen};
    use crate::grammar::builtin_language;
    use crate::rnn::model::CellKind;

    fn corpora() -> (LabeledCorpus, LabeledCorpus, LabeledCorpus) {
        let g = builtin_language("SL2").unwrap();
        let train = generate_train("SL2", &g, Regimen::K1, 7).unwrap();
        let (t1, t2) = generate_tests("SL2", &g, Regimen::K1, &train, 7).unwrap();
        (train, t1, t2)
    }

    fn small_config() -> RnnConfig {
        let mut cfg = RnnConfig::new(CellKind::Lstm, 4, 4);
        cfg.epochs = 2;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn training_is_deterministic_and_keeps_pad_zero() {
        let (train_c, t1, t2) = corpora();
        let cfg = small_config();
        let a = train(&cfg, &train_c, &[&t1, &t2], false).unwrap();
        let b = train(&cfg, &train_c, &[&t1, &t2], false).unwrap();
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.metrics.len(), 2);
        assert!(a.model.params[a.model.layout.pad_row()].iter().all(|&v| v == 0.0));
        assert_eq!(a.optimizer.steps(), 2 * 8);
        assert!(a.metrics.iter().all(|m| m.test1_acc.is_some() && m.test2_acc.is_some() && m.val_acc.is_none()));
    }

    #[test]
    fn early_stopping_returns_best_snapshot() {
        let (train_c, t1, _) = corpora();
        let mut cfg = small_config();
        cfg.epochs = 3;
        let s = train(&cfg, &train_c, &[&t1], true).unwrap();
        let best = s.best_epoch.unwrap();
        let top = s.metrics.iter().map(|m| m.val_acc.unwrap()).fold(f64::MIN, f64::max);
        assert_eq!(s.metrics[best - 1].val_acc.unwrap(), top);
        assert!(s.metrics.iter().all(|m| m.test2_acc.is_none()));
    }

    #[test]
    fn checkpoint_round_trip_resumes_identically() {
        let (train_c, _, _) = corpora();
        let cfg = small_config();
        let data: Vec<(&[u8], Label)> = train_c.entries.iter().map(|e| (&e.word[..], e.label)).collect();
        let mut a = TrainState::new(&cfg).unwrap();
        a.run_epoch(&data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        a.save(&path).unwrap();
        let mut b = TrainState::load(&path).unwrap();
        assert_eq!(b.model, a.model);
        a.run_epoch(&data).unwrap();
        b.run_epoch(&data).unwrap();
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn csv_log_layout() {
        let m = [EpochMetrics {
            epoch: 1,
            train_loss: 0.5,
            val_acc: None,
            test1_acc: Some(0.75),
            test2_acc: Some(0.5),
        }];
        assert_eq!(metrics_csv(&m), "epoch,train_loss,val_acc,test1_acc,test2_acc\n1,0.5,,0.75,0.5\n");
    }

    #[test]
    fn rejects_mismatched_alphabet() {
        let (train_c, _, _) = corpora();
        let cfg = RnnConfig::new(CellKind::Elman, 3, 2);
        assert!(train(&cfg, &train_c, &[], false).is_err());
    }
}
