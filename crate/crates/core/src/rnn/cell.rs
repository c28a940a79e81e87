//! Recurrent cells with hand-written backward passes.
//!
//! LSTM gate layout inside the `4d` pre-activation is `[input, block, forget, output]`:
//!
//! ```text
//! i = σ(W_i x + U_i h + b_i)    z = tanh(W_z x + U_z h + b_z)
//! f = σ(W_f x + U_f h + b_f)    o = σ(W_o x + U_o h + b_o)
//! c' = f ⊙ c + i ⊙ z            h' = o ⊙ tanh(c')
//! ```
//!
//! No peephole connections. The Elman cell is `h' = tanh(W x + U h + b)`.

use super::linalg::{add_bias, matmul_a_bt_acc, matmul_acc, matmul_at_b_acc, sigmoid, sum_rows_acc};
use crate::error::{Error, Result};

/// Borrowed weights of one cell: `w` is `d × gates`, `u` is `d × gates`, `b` is `gates`.
#[derive(Clone, Copy, Debug)]
pub struct CellParams<'a> {
    pub d: usize,
    pub w: &'a [f64],
    pub u: &'a [f64],
    pub b: &'a [f64],
}

/// Gradient accumulators matching [`CellParams`].
#[derive(Debug)]
pub struct CellGrads<'a> {
    pub w: &'a mut [f64],
    pub u: &'a mut [f64],
    pub b: &'a mut [f64],
}

impl CellParams<'_> {
    fn gates(&self) -> usize {
        self.b.len()
    }

    /// `x W + h U + b` for a batch of rows.
    fn pre_activation(&self, x: &[f64], h: &[f64], rows: usize) -> Vec<f64> {
        let g = self.gates();
        let mut a = vec![0.0; rows * g];
        add_bias(&mut a, self.b);
        matmul_acc(x, self.w, &mut a, rows, self.d, g);
        matmul_acc(h, self.u, &mut a, rows, self.d, g);
        a
    }

    /// Pushes `da` back into parameter gradients, `dx` and `dh_prev`.
    #[allow(clippy::too_many_arguments)]
    fn backward_linear(
        &self,
        x: &[f64],
        h_prev: &[f64],
        da: &[f64],
        rows: usize,
        grads: &mut CellGrads<'_>,
        dx: &mut [f64],
        dh_prev: &mut [f64],
    ) {
        let g = self.gates();
        matmul_at_b_acc(x, da, grads.w, rows, self.d, g);
        matmul_at_b_acc(h_prev, da, grads.u, rows, self.d, g);
        sum_rows_acc(da, grads.b);
        matmul_a_bt_acc(da, self.w, dx, rows, self.d, g);
        matmul_a_bt_acc(da, self.u, dh_prev, rows, self.d, g);
    }
}

/// Forward cache of one LSTM step over `rows` sequences.
#[derive(Clone, Debug)]
pub struct LstmStep {
    pub rows: usize,
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates, `rows × 4d`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn lstm_forward(p: &CellParams<'_>, x: Vec<f64>, h_prev: Vec<f64>, c_prev: Vec<f64>, rows: usize) -> LstmStep {
    let d = p.d;
    let mut gates = p.pre_activation(&x, &h_prev, rows);
    let mut c = vec![0.0; rows * d];
    let mut tanh_c = vec![0.0; rows * d];
    let mut h = vec![0.0; rows * d];
    for r in 0..rows {
        let row = &mut gates[r * 4 * d..(r + 1) * 4 * d];
        for j in 0..d {
            let i = sigmoid(row[j]);
            let z = row[d + j].tanh();
            let f = sigmoid(row[2 * d + j]);
            let o = sigmoid(row[3 * d + j]);
            row[j] = i;
            row[d + j] = z;
            row[2 * d + j] = f;
            row[3 * d + j] = o;
            let k = r * d + j;
            c[k] = f * c_prev[k] + i * z;
            tanh_c[k] = c[k].tanh();
            h[k] = o * tanh_c[k];
        }
    }
    LstmStep {
        rows,
        x,
        h_prev,
        c_prev,
        gates,
        c,
        tanh_c,
        h,
    }
}

/// Backward through one LSTM step. `dh`/`dc` are gradients w.r.t. this step's
/// outputs; `dx`, `dh_prev` and `dc_prev` are accumulated into.
#[allow(clippy::too_many_arguments)]
pub fn lstm_backward(
    p: &CellParams<'_>,
    step: &LstmStep,
    dh: &[f64],
    dc: &[f64],
    grads: &mut CellGrads<'_>,
    dx: &mut [f64],
    dh_prev: &mut [f64],
    dc_prev: &mut [f64],
) {
    let d = p.d;
    let rows = step.rows;
    let mut da = vec![0.0; rows * 4 * d];
    for r in 0..rows {
        let gate = &step.gates[r * 4 * d..(r + 1) * 4 * d];
        let da_row = &mut da[r * 4 * d..(r + 1) * 4 * d];
        for j in 0..d {
            let k = r * d + j;
            let (i, z, f, o) = (gate[j], gate[d + j], gate[2 * d + j], gate[3 * d + j]);
            let tc = step.tanh_c[k];
            let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
            da_row[j] = dct * z * i * (1.0 - i);
            da_row[d + j] = dct * i * (1.0 - z * z);
            da_row[2 * d + j] = dct * step.c_prev[k] * f * (1.0 - f);
            da_row[3 * d + j] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] += dct * f;
        }
    }
    p.backward_linear(&step.x, &step.h_prev, &da, rows, grads, dx, dh_prev);
}

/// Forward cache of one Elman step.
#[derive(Clone, Debug)]
pub struct ElmanStep {
    pub rows: usize,
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn elman_forward(p: &CellParams<'_>, x: Vec<f64>, h_prev: Vec<f64>, rows: usize) -> ElmanStep {
    let mut h = p.pre_activation(&x, &h_prev, rows);
    h.iter_mut().for_each(|v| *v = v.tanh());
    ElmanStep { rows, x, h_prev, h }
}

pub fn elman_backward(
    p: &CellParams<'_>,
    step: &ElmanStep,
    dh: &[f64],
    grads: &mut CellGrads<'_>,
    dx: &mut [f64],
    dh_prev: &mut [f64],
) {
    let da: Vec<f64> = dh.iter().zip(&step.h).map(|(g, h)| g * (1.0 - h * h)).collect();
    p.backward_linear(&step.x, &step.h_prev, &da, step.rows, grads, dx, dh_prev);
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{name} contains a non-finite value")))
    }
}

fn check_shapes(p: &CellParams<'_>, gates: usize, inputs: &[(&str, &[f64])]) -> Result<()> {
    let d = p.d;
    if p.w.len() != d * gates || p.u.len() != d * gates || p.b.len() != gates {
        return Err(Error::InvalidParameter("cell parameter shapes do not match d".into()));
    }
    for (name, v) in inputs {
        if v.len() != d {
            return Err(Error::InvalidParameter(format!("{name} has length {}, expected {d}", v.len())));
        }
        check_finite(name, v)?;
    }
    Ok(())
}

/// One LSTM step on single vectors; returns `(h, c)`.
pub fn lstm_cell(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &CellParams<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    check_shapes(p, 4 * p.d, &[("x", x), ("h_prev", h_prev), ("c_prev", c_prev)])?;
    let step = lstm_forward(p, x.to_vec(), h_prev.to_vec(), c_prev.to_vec(), 1);
    Ok((step.h, step.c))
}

/// One Elman step on single vectors.
pub fn elman_cell(x: &[f64], h_prev: &[f64], p: &CellParams<'_>) -> Result<Vec<f64>> {
    check_shapes(p, p.d, &[("x", x), ("h_prev", h_prev)])?;
    Ok(elman_forward(p, x.to_vec(), h_prev.to_vec(), 1).h)
}
