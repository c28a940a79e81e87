use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::cell::{CellGrads, CellParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Elman,
    Lstm,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Elman => "elman",
            CellKind::Lstm => "lstm",
        }
    }

    fn gates(self) -> usize {
        match self {
            CellKind::Elman => 1,
            CellKind::Lstm => 4,
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elman" | "srnn" | "s-rnn" | "rnn" => Ok(CellKind::Elman),
            "lstm" => Ok(CellKind::Lstm),
            _ => Err(Error::InvalidParameter(format!("unknown cell {s:?} (expected lstm or elman)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::Adam => 1e-3,
            OptimizerKind::Sgd => 0.1,
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            _ => Err(Error::InvalidParameter(format!("unknown optimizer {s:?} (expected adam or sgd)"))),
        }
    }
}

/// Standard deviation used for ordinary weights. Forget-gate parameters are always N(1, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// N(0, 1/√d)
    Scaled,
    /// N(0, 1)
    Unit,
}

/// Which hidden state feeds the softmax head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// State after each sequence's last real symbol.
    LastSymbol,
    /// State after the final padded timestep.
    FinalStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnnConfig {
    pub cell: CellKind,
    /// Hidden and embedding size.
    pub d: usize,
    /// Number of real symbols; the embedding has one extra pad row.
    pub alphabet_size: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub init: InitScheme,
    pub readout: Readout,
    pub validation_fraction: f64,
}

impl RnnConfig {
    pub fn new(cell: CellKind, d: usize, alphabet_size: usize) -> Self {
        Self {
            cell,
            d,
            alphabet_size,
            optimizer: OptimizerKind::Adam,
            learning_rate: OptimizerKind::Adam.default_learning_rate(),
            clip_norm: 1.0,
            batch_size: 128,
            epochs: 100,
            seed: 42,
            init: InitScheme::Scaled,
            readout: Readout::LastSymbol,
            validation_fraction: 0.1,
        }
    }

    /// Switches optimizer and resets the learning rate to that optimizer's default.
    pub fn with_optimizer(mut self, optimizer: OptimizerKind) -> Self {
        self.optimizer = optimizer;
        self.learning_rate = optimizer.default_learning_rate();
        self
    }

    /// Size label such as `v10`.
    pub fn size_label(&self) -> String {
        format!("v{}", self.d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if self.alphabet_size == 0 {
            return bad("alphabet must be non-empty");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip_norm must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.cell, self.d, self.alphabet_size + 1)
    }
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub d: usize,
    pub vocab: usize,
    pub gates: usize,
    pub embed: Range<usize>,
    pub w: Range<usize>,
    pub u: Range<usize>,
    pub b: Range<usize>,
    pub head_w: Range<usize>,
    pub head_b: Range<usize>,
}

impl Layout {
    fn new(cell: CellKind, d: usize, vocab: usize) -> Self {
        let gates = cell.gates() * d;
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        Self {
            d,
            vocab,
            gates,
            embed: take(vocab * d),
            w: take(d * gates),
            u: take(d * gates),
            b: take(gates),
            head_w: take(d * 2),
            head_b: take(2),
        }
    }

    pub fn len(&self) -> usize {
        self.head_b.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pad(&self) -> usize {
        self.vocab - 1
    }

    pub fn pad_row(&self) -> Range<usize> {
        let start = self.embed.start + self.pad() * self.d;
        start..start + self.d
    }

    pub(crate) fn cell<'a>(&self, p: &'a [f64]) -> CellParams<'a> {
        CellParams {
            d: self.d,
            w: &p[self.w.clone()],
            u: &p[self.u.clone()],
            b: &p[self.b.clone()],
        }
    }

    /// Splits a gradient buffer into `(embed, cell, head_w, head_b)`.
    pub(crate) fn split_mut<'a>(&self, g: &'a mut [f64]) -> (&'a mut [f64], CellGrads<'a>, &'a mut [f64], &'a mut [f64]) {
        let (embed, rest) = g.split_at_mut(self.w.start);
        let (w, rest) = rest.split_at_mut(self.w.len());
        let (u, rest) = rest.split_at_mut(self.u.len());
        let (b, rest) = rest.split_at_mut(self.b.len());
        let (head_w, head_b) = rest.split_at_mut(self.head_w.len());
        (embed, CellGrads { w, u, b }, head_w, head_b)
    }
}

/// Parameters of one classifier: embed → recurrent cell → softmax head.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnModel {
    pub config: RnnConfig,
    pub layout: Layout,
    pub params: Vec<f64>,
}

impl RnnModel {
    pub fn zeros(config: &RnnConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        Ok(Self {
            config: config.clone(),
            params: vec![0.0; layout.len()],
            layout,
        })
    }

    /// Random initialization. Recurrent and head biases start at zero; the LSTM
    /// forget-gate weights and bias are drawn from N(1, 1).
    pub fn init(config: &RnnConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let l = model.layout.clone();
        let std = match config.init {
            InitScheme::Scaled => 1.0 / (config.d as f64).sqrt(),
            InitScheme::Unit => 1.0,
        };
        let normal = Normal::new(0.0, std).map_err(|e| Error::Numeric(e.to_string()))?;
        let forget = Normal::new(1.0, 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
        let p = &mut model.params;
        for r in [l.embed.clone(), l.w.clone(), l.u.clone(), l.head_w.clone()] {
            for v in &mut p[r] {
                *v = normal.sample(rng);
            }
        }
        if config.cell == CellKind::Lstm {
            let d = l.d;
            let forget_cols = 2 * d..3 * d;
            for base in [l.w.start, l.u.start] {
                for row in 0..d {
                    for col in forget_cols.clone() {
                        p[base + row * l.gates + col] = forget.sample(rng);
                    }
                }
            }
            for col in forget_cols {
                p[l.b.start + col] = forget.sample(rng);
            }
        }
        model.pin_pad();
        Ok(model)
    }

    pub fn pin_pad(&mut self) {
        let r = self.layout.pad_row();
        self.params[r].fill(0.0);
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    /// Draws a fresh model from `config.seed` alone.
    pub fn seeded(config: &RnnConfig) -> Result<Self> {
        use rand::SeedableRng;
        Self::init(config, &mut ChaCha8Rng::seed_from_u64(config.seed))
    }
}
