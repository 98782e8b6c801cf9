//! Minimal dense linear algebra and the Adam optimizer.
//!
//! Everything downstream (network, training, event engine) builds on this
//! module; there is deliberately no external math dependency. All values are
//! 64-bit floats so the finite-difference gradient checks can resolve 1e-4
//! relative error.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense row-major matrix. Weights are indexed `[postsynaptic i][presynaptic j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from row-major data; rejects wrong lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix data length {} != {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::from_vec(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// `out[i] = sum_j m[i,j] * v[j]`
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant for the per-timestep hot path.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec: vector length {} != cols {}",
                v.len(),
                self.cols
            )));
        }
        if out.len() != self.rows {
            return Err(Error::Dimension(format!(
                "matvec: output length {} != rows {}",
                out.len(),
                self.rows
            )));
        }
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(v) {
                acc += w * x;
            }
            *o = acc;
        }
        Ok(())
    }

    /// `out[j] = sum_i m[i,j] * v[i]` (the backward pass needs wᵀδ).
    pub fn matvec_transposed(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.matvec_transposed_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_transposed_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "matvec_transposed: vector length {} != rows {}",
                v.len(),
                self.rows
            )));
        }
        if out.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec_transposed: output length {} != cols {}",
                out.len(),
                self.cols
            )));
        }
        out.fill(0.0);
        for (i, x) in v.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
        Ok(())
    }

    /// `self[i,j] += scale * u[i] * v[j]` (gradient accumulation).
    pub fn rank_one_update(&mut self, u: &[f64], v: &[f64], scale: f64) -> Result<()> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "rank_one_update: {}x{} += {}x{}",
                self.rows,
                self.cols,
                u.len(),
                v.len()
            )));
        }
        for (i, ui) in u.iter().enumerate() {
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            let s = scale * ui;
            for (w, vj) in row.iter_mut().zip(v) {
                *w += s * vj;
            }
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &Matrix, scale: f64) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Dimension("add_scaled: shape mismatch".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }
}

/// Numerically stabilized softmax: subtracts `max(v)` before exponentiation,
/// so huge inputs cannot overflow. Output sums to 1.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Moment estimates for one parameter matrix.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Matrix,
    second_moment: Matrix,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Standard defaults; only the learning rate is passed per step.
    pub fn new(rows: usize, cols: usize) -> Self {
        AdamState::with_hyper(rows, cols, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(rows: usize, cols: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        AdamState {
            first_moment: Matrix::zeros(rows, cols),
            second_moment: Matrix::zeros(rows, cols),
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One bias-corrected Adam update in place. Increments `state.step_count`.
pub fn adam_step(param: &mut Matrix, grad: &Matrix, state: &mut AdamState, lr: f64) -> Result<()> {
    if !param.same_shape(grad) || !param.same_shape(&state.first_moment) {
        return Err(Error::Dimension("adam_step: shape mismatch".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for idx in 0..param.data.len() {
        let g = grad.data[idx];
        let m = &mut state.first_moment.data[idx];
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        let v = &mut state.second_moment.data[idx];
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        param.data[idx] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    if let Some(bad) = param.data.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!(
            "adam_step produced non-finite parameter {bad}"
        )));
    }
    Ok(())
}
