//! Recurrent sequence classifiers trained from scratch: an embedding layer, an Elman
//! or LSTM cell, and a two-way softmax head reading the state after the last symbol.
//! All arithmetic is `f64`, and every reduction has a fixed order, so a run is
//! reproducible bit for bit from its seed.

pub mod cell;
mod linalg;
pub mod model;
pub mod network;
pub mod optim;
pub mod train;

pub use cell::{elman_cell, lstm_cell, CellParams};
pub use model::{CellKind, InitScheme, Layout, OptimizerKind, Readout, RnnConfig, RnnModel};
pub use network::{forward, gradient_check, loss_and_gradient, Batch};
pub use optim::{clip_global_norm, Adam, Optimizer};
pub use train::{metrics_csv, train, train_with, Checkpoint, EpochMetrics, TrainState};
