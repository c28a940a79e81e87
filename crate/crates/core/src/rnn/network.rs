//! Batched forward pass and backpropagation through time for the full classifier.

use super::cell::{elman_backward, elman_forward, lstm_backward, lstm_forward, ElmanStep, LstmStep};
use super::linalg::{add_bias, matmul_a_bt_acc, matmul_acc, matmul_at_b_acc, sum_rows_acc};
use super::model::{Readout, RnnModel};
use crate::datagen::Label;
use crate::error::{Error, Result};

/// Right-padded index sequences, row-major `rows × steps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub rows: usize,
    pub steps: usize,
    pub tokens: Vec<usize>,
    pub lengths: Vec<usize>,
}

impl Batch {
    /// Pads `seqs` with `pad` up to the longest one.
    pub fn from_sequences<S: AsRef<[u8]>>(seqs: &[S], pad: usize) -> Self {
        let steps = seqs.iter().map(|s| s.as_ref().len()).max().unwrap_or(0);
        let mut tokens = Vec::with_capacity(seqs.len() * steps);
        for s in seqs {
            let s = s.as_ref();
            tokens.extend(s.iter().map(|&t| t as usize));
            tokens.extend(std::iter::repeat_n(pad, steps - s.len()));
        }
        Self {
            rows: seqs.len(),
            steps,
            tokens,
            lengths: seqs.iter().map(|s| s.as_ref().len()).collect(),
        }
    }

    /// Appends `extra` pad columns.
    pub fn padded_by(&self, extra: usize, pad: usize) -> Self {
        let steps = self.steps + extra;
        let mut tokens = Vec::with_capacity(self.rows * steps);
        for row in self.tokens.chunks(self.steps.max(1)).take(self.rows) {
            tokens.extend_from_slice(row);
            tokens.extend(std::iter::repeat_n(pad, extra));
        }
        Self {
            rows: self.rows,
            steps,
            tokens,
            lengths: self.lengths.clone(),
        }
    }

    fn validate(&self, vocab: usize) -> Result<()> {
        let pad = vocab - 1;
        if self.tokens.len() != self.rows * self.steps || self.lengths.len() != self.rows {
            return Err(Error::InvalidParameter("batch shape does not match its tokens".into()));
        }
        for (r, &len) in self.lengths.iter().enumerate() {
            if len == 0 {
                return Err(Error::InvalidParameter(format!("sequence {r} has length 0")));
            }
            if len > self.steps {
                return Err(Error::InvalidParameter(format!("sequence {r} is longer than the batch")));
            }
            for (t, &tok) in self.tokens[r * self.steps..(r + 1) * self.steps].iter().enumerate() {
                if tok >= vocab {
                    return Err(Error::InvalidParameter(format!("token {tok} out of range (vocabulary {vocab})")));
                }
                if (t < len) == (tok == pad) {
                    return Err(Error::InvalidParameter(format!(
                        "sequence {r}: pad must appear exactly after position {len}"
                    )));
                }
            }
        }
        Ok(())
    }
}

enum Steps {
    Lstm(Vec<LstmStep>),
    Elman(Vec<ElmanStep>),
}

struct Trace {
    steps: Steps,
    /// Timestep read by the head, per row.
    read_at: Vec<usize>,
    /// Hidden states fed to the head, `rows × d`.
    readout: Vec<f64>,
    probs: Vec<[f64; 2]>,
}

fn embed(model: &RnnModel, batch: &Batch, t: usize) -> Vec<f64> {
    let d = model.layout.d;
    let table = &model.params[model.layout.embed.clone()];
    let mut x = Vec::with_capacity(batch.rows * d);
    for r in 0..batch.rows {
        let tok = batch.tokens[r * batch.steps + t];
        x.extend_from_slice(&table[tok * d..(tok + 1) * d]);
    }
    x
}

fn softmax(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

fn run(model: &RnnModel, batch: &Batch) -> Result<Trace> {
    let l = &model.layout;
    batch.validate(l.vocab)?;
    let (rows, d) = (batch.rows, l.d);
    let cell = l.cell(&model.params);
    let read_at: Vec<usize> = match model.config.readout {
        Readout::LastSymbol => batch.lengths.iter().map(|&n| n - 1).collect(),
        Readout::FinalStep => vec![batch.steps - 1; rows],
    };
    let mut readout = vec![0.0; rows * d];
    let gather = |h: &[f64], t: usize, readout: &mut [f64]| {
        for r in (0..rows).filter(|&r| read_at[r] == t) {
            readout[r * d..(r + 1) * d].copy_from_slice(&h[r * d..(r + 1) * d]);
        }
    };

    let steps = match model.config.cell {
        super::CellKind::Lstm => {
            let mut out: Vec<LstmStep> = Vec::with_capacity(batch.steps);
            for t in 0..batch.steps {
                let (h, c) = match out.last() {
                    Some(s) => (s.h.clone(), s.c.clone()),
                    None => (vec![0.0; rows * d], vec![0.0; rows * d]),
                };
                let step = lstm_forward(&cell, embed(model, batch, t), h, c, rows);
                gather(&step.h, t, &mut readout);
                out.push(step);
            }
            Steps::Lstm(out)
        }
        super::CellKind::Elman => {
            let mut out: Vec<ElmanStep> = Vec::with_capacity(batch.steps);
            for t in 0..batch.steps {
                let h = out.last().map_or_else(|| vec![0.0; rows * d], |s| s.h.clone());
                let step = elman_forward(&cell, embed(model, batch, t), h, rows);
                gather(&step.h, t, &mut readout);
                out.push(step);
            }
            Steps::Elman(out)
        }
    };

    let mut logits = vec![0.0; rows * 2];
    add_bias(&mut logits, &model.params[l.head_b.clone()]);
    matmul_acc(&readout, &model.params[l.head_w.clone()], &mut logits, rows, d, 2);
    let probs = logits.chunks(2).map(|z| softmax([z[0], z[1]])).collect();
    Ok(Trace {
        steps,
        read_at,
        readout,
        probs,
    })
}

/// Per-sequence `(p_positive, p_negative)`.
pub fn forward(model: &RnnModel, batch: &Batch) -> Result<Vec<[f64; 2]>> {
    Ok(run(model, batch)?.probs)
}

fn class(label: Label) -> usize {
    if label.is_positive() {
        0
    } else {
        1
    }
}

/// Mean cross-entropy of the batch and its exact gradient w.r.t. every parameter.
/// The pad embedding row always receives a zero gradient.
pub fn loss_and_gradient(model: &RnnModel, batch: &Batch, labels: &[Label]) -> Result<(f64, Vec<f64>)> {
    if labels.len() != batch.rows {
        return Err(Error::InvalidParameter("one label per sequence is required".into()));
    }
    let trace = run(model, batch)?;
    let l = &model.layout;
    let (rows, d, steps) = (batch.rows, l.d, batch.steps);
    let scale = 1.0 / rows as f64;

    let mut loss = 0.0;
    let mut dlogits = vec![0.0; rows * 2];
    for (r, (p, &label)) in trace.probs.iter().zip(labels).enumerate() {
        let y = class(label);
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for k in 0..2 {
            dlogits[r * 2 + k] = (p[k] - if k == y { 1.0 } else { 0.0 }) * scale;
        }
    }
    loss *= scale;

    let mut grad = vec![0.0; l.len()];
    let cell = l.cell(&model.params);
    let (g_embed, mut g_cell, g_head_w, g_head_b) = l.split_mut(&mut grad);
    matmul_at_b_acc(&trace.readout, &dlogits, g_head_w, rows, d, 2);
    sum_rows_acc(&dlogits, g_head_b);
    let mut d_read = vec![0.0; rows * d];
    matmul_a_bt_acc(&dlogits, &model.params[l.head_w.clone()], &mut d_read, rows, d, 2);

    let mut dh_next = vec![0.0; rows * d];
    let mut dc_next = vec![0.0; rows * d];
    for t in (0..steps).rev() {
        let mut dh = std::mem::replace(&mut dh_next, vec![0.0; rows * d]);
        for r in (0..rows).filter(|&r| trace.read_at[r] == t) {
            for j in 0..d {
                dh[r * d + j] += d_read[r * d + j];
            }
        }
        let mut dx = vec![0.0; rows * d];
        match &trace.steps {
            Steps::Lstm(s) => {
                let dc = std::mem::replace(&mut dc_next, vec![0.0; rows * d]);
                lstm_backward(&cell, &s[t], &dh, &dc, &mut g_cell, &mut dx, &mut dh_next, &mut dc_next);
            }
            Steps::Elman(s) => elman_backward(&cell, &s[t], &dh, &mut g_cell, &mut dx, &mut dh_next),
        }
        for r in 0..rows {
            let tok = batch.tokens[r * steps + t];
            for (g, v) in g_embed[tok * d..(tok + 1) * d].iter_mut().zip(&dx[r * d..(r + 1) * d]) {
                *g += v;
            }
        }
    }
    grad[l.pad_row()].fill(0.0);
    Ok((loss, grad))
}

/// Largest relative discrepancy between the analytic gradient and central finite
/// differences with step `eps`, over every parameter. Coordinates where both values
/// are below `1e-6` in magnitude are compared absolutely, since central differences
/// at `eps = 1e-5` carry round-off of order `1e-11`.
pub fn gradient_check(model: &RnnModel, batch: &Batch, labels: &[Label], eps: f64) -> Result<f64> {
    let (_, grad) = loss_and_gradient(model, batch, labels)?;
    let pad = model.layout.pad_row();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, &analytic) in grad.iter().enumerate() {
        if pad.contains(&i) {
            continue;
        }
        let orig = probe.params[i];
        probe.params[i] = orig + eps;
        let up = loss_and_gradient(&probe, batch, labels)?.0;
        probe.params[i] = orig - eps;
        let down = loss_and_gradient(&probe, batch, labels)?.0;
        probe.params[i] = orig;
        let num = (up - down) / (2.0 * eps);
        worst = worst.max((analytic - num).abs() / analytic.abs().max(num.abs()).max(1e-6));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::model::{CellKind, RnnConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(cell: CellKind, d: usize, seed: u64) -> RnnModel {
        let mut cfg = RnnConfig::new(cell, d, 4);
        cfg.seed = seed;
        RnnModel::seeded(&cfg).unwrap()
    }

    fn random_words(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> Vec<Vec<u8>> {
        (0..n)
            .map(|_| {
                let len = rng.random_range(1..=max_len);
                (0..len).map(|_| rng.random_range(0..4u8)).collect()
            })
            .collect()
    }

    #[test]
    fn outputs_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cell in [CellKind::Lstm, CellKind::Elman] {
            let m = random_model(cell, 6, 11);
            let words = random_words(&mut rng, 9, 12);
            for p in forward(&m, &Batch::from_sequences(&words, 4)).unwrap() {
                assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
                assert!(p[0] > 0.0 && p[1] > 0.0);
            }
        }
    }

    #[test]
    fn batching_and_padding_are_semantics_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for cell in [CellKind::Lstm, CellKind::Elman] {
            let m = random_model(cell, 5, 2);
            let words = random_words(&mut rng, 7, 15);
            let batch = Batch::from_sequences(&words, 4);
            let together = forward(&m, &batch).unwrap();
            for (w, p) in words.iter().zip(&together) {
                let alone = forward(&m, &Batch::from_sequences(&[w], 4)).unwrap();
                assert_eq!(alone[0], *p);
            }
            assert_eq!(forward(&m, &batch.padded_by(6, 4)).unwrap(), together);
        }
    }

    #[test]
    fn final_step_readout_sees_pads() {
        let mut cfg = RnnConfig::new(CellKind::Lstm, 5, 4);
        cfg.readout = Readout::FinalStep;
        let m = RnnModel::seeded(&cfg).unwrap();
        let b = Batch::from_sequences(&[vec![0u8, 1, 2]], 4);
        assert_ne!(forward(&m, &b).unwrap(), forward(&m, &b.padded_by(3, 4)).unwrap());
    }

    #[test]
    fn rejects_malformed_batches() {
        let m = random_model(CellKind::Elman, 3, 0);
        let bad_token = Batch {
            rows: 1,
            steps: 2,
            tokens: vec![0, 7],
            lengths: vec![2],
        };
        assert!(forward(&m, &bad_token).is_err());
        let empty = Batch {
            rows: 1,
            steps: 1,
            tokens: vec![4],
            lengths: vec![0],
        };
        assert!(forward(&m, &empty).is_err());
        let early_pad = Batch {
            rows: 1,
            steps: 2,
            tokens: vec![4, 0],
            lengths: vec![2],
        };
        assert!(forward(&m, &early_pad).is_err());
    }

    #[test]
    fn zero_head_gives_ln2() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut m = random_model(CellKind::Lstm, 7, 5);
        let l = m.layout.clone();
        m.params[l.head_w.clone()].fill(0.0);
        m.params[l.head_b.clone()].fill(0.0);
        let words = random_words(&mut rng, 10, 9);
        let labels: Vec<Label> = (0..10).map(|i| Label::from_membership(i % 3 == 0)).collect();
        let (loss, _) = loss_and_gradient(&m, &Batch::from_sequences(&words, 4), &labels).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn full_bptt_matches_finite_differences() {
        for seed in 0..4 {
            for cell in [CellKind::Lstm, CellKind::Elman] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = rng.random_range(1..=8);
                let mut cfg = RnnConfig::new(cell, d, 4);
                cfg.seed = seed;
                let m = RnnModel::seeded(&cfg).unwrap();
                let rows = rng.random_range(1..=4);
                let words = random_words(&mut rng, rows, 10);
                let labels: Vec<Label> = (0..rows).map(|_| Label::from_membership(rng.random())).collect();
                let err = gradient_check(&m, &Batch::from_sequences(&words, 4), &labels, 1e-5).unwrap();
                assert!(err < 1e-4, "{cell} seed {seed}: {err}");
            }
        }
    }
}
