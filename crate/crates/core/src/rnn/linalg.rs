//! Row-major dense kernels. Every reduction runs in a fixed order so results are
//! bitwise reproducible and independent of how rows are batched.

/// `out[rows×n] += a[rows×m] · b[m×n]`
pub(crate) fn matmul_acc(a: &[f64], b: &[f64], out: &mut [f64], rows: usize, m: usize, n: usize) {
    debug_assert_eq!(a.len(), rows * m);
    debug_assert_eq!(b.len(), m * n);
    for r in 0..rows {
        let out_row = &mut out[r * n..(r + 1) * n];
        for (i, &ai) in a[r * m..(r + 1) * m].iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (o, &bij) in out_row.iter_mut().zip(&b[i * n..(i + 1) * n]) {
                *o += ai * bij;
            }
        }
    }
}

/// `out[m×n] += aᵀ · b` with `a[rows×m]`, `b[rows×n]`.
pub(crate) fn matmul_at_b_acc(a: &[f64], b: &[f64], out: &mut [f64], rows: usize, m: usize, n: usize) {
    for r in 0..rows {
        let b_row = &b[r * n..(r + 1) * n];
        for (i, &ai) in a[r * m..(r + 1) * m].iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (o, &bj) in out[i * n..(i + 1) * n].iter_mut().zip(b_row) {
                *o += ai * bj;
            }
        }
    }
}

/// `out[rows×m] += a[rows×n] · bᵀ` with `b[m×n]`.
pub(crate) fn matmul_a_bt_acc(a: &[f64], b: &[f64], out: &mut [f64], rows: usize, m: usize, n: usize) {
    for r in 0..rows {
        let a_row = &a[r * n..(r + 1) * n];
        for i in 0..m {
            let dot: f64 = a_row.iter().zip(&b[i * n..(i + 1) * n]).map(|(x, y)| x * y).sum();
            out[r * m + i] += dot;
        }
    }
}

/// Adds `bias[n]` to every row of `out[rows×n]`.
pub(crate) fn add_bias(out: &mut [f64], bias: &[f64]) {
    for row in out.chunks_mut(bias.len()) {
        for (o, b) in row.iter_mut().zip(bias) {
            *o += b;
        }
    }
}

/// `out[n] += Σ_rows a[rows×n]`
pub(crate) fn sum_rows_acc(a: &[f64], out: &mut [f64]) {
    for row in a.chunks(out.len()) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += x;
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
