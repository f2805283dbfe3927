//! Forward pass, binary cross-entropy and backpropagation through time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{lit, Architecture, ModelParams, ParamSet, Scalar, INPUT_SIZE};
use super::ClassifierError;
use crate::windowing::Window;

pub const BN_EPSILON: f64 = 1e-3;
pub const BN_MOMENTUM: f64 = 0.99;
pub const PROB_CLAMP: f64 = 1e-7;

/// Samples per gradient accumulation chunk. Fixed so that the reduction order
/// (and therefore the result) does not depend on the number of threads.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Batch-norm uses the statistics of the current batch.
    Train,
    /// Batch-norm uses the running statistics.
    Eval,
}

/// Windows packed as one contiguous `len × steps × 3` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch<T> {
    data: Vec<T>,
    steps: usize,
}

impl<T: Scalar> SequenceBatch<T> {
    pub fn new(data: Vec<T>, steps: usize) -> Result<Self, ClassifierError> {
        if steps == 0 || !data.len().is_multiple_of(steps * INPUT_SIZE) {
            return Err(ClassifierError::Shape(format!(
                "{} values do not form windows of {steps} steps × {INPUT_SIZE}",
                data.len()
            )));
        }
        Ok(Self { data, steps })
    }

    pub fn from_windows(windows: &[Window]) -> Result<Self, ClassifierError> {
        let steps = windows.first().map(Window::len).ok_or(ClassifierError::EmptyInput("windows"))?;
        if let Some(w) = windows.iter().find(|w| w.len() != steps) {
            return Err(ClassifierError::Shape(format!("window of {} steps among windows of {steps}", w.len())));
        }
        let data = windows.iter().flat_map(|w| w.values.iter().flatten()).map(|v| lit::<T>(*v)).collect();
        Self::new(data, steps)
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.steps * INPUT_SIZE)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn window(&self, i: usize) -> &[T] {
        let w = self.steps * INPUT_SIZE;
        &self.data[i * w..(i + 1) * w]
    }

    /// Gathers the given windows into a new batch.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.steps * INPUT_SIZE);
        for &i in indices {
            data.extend_from_slice(self.window(i));
        }
        Self { data, steps: self.steps }
    }
}

pub fn labels_of(windows: &[Window]) -> Vec<u8> {
    windows.iter().map(|w| w.label().as_target()).collect()
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Per-step activations of one sequence, kept for backpropagation.
struct LstmTrace<T> {
    /// `(steps + 1) × H`, row 0 is the zero initial state.
    h: Vec<T>,
    /// `(steps + 1) × H`
    c: Vec<T>,
    /// `steps × 4H` activated gates (i, f, g, o).
    gates: Vec<T>,
    /// `steps × H`
    tanh_c: Vec<T>,
}

fn lstm_forward<T: Scalar>(w: &ParamSet<T>, hidden: usize, x: &[T], steps: usize, keep: bool) -> LstmTrace<T> {
    let h4 = 4 * hidden;
    let rows = if keep { steps + 1 } else { 2 };
    let mut hs = vec![T::zero(); rows * hidden];
    let mut cs = vec![T::zero(); rows * hidden];
    let mut gates = if keep { vec![T::zero(); steps * h4] } else { vec![T::zero(); h4] };
    let mut tanh_c = if keep { vec![T::zero(); steps * hidden] } else { vec![T::zero(); hidden] };
    let mut z = vec![T::zero(); h4];

    for t in 0..steps {
        let (prev, cur) = if keep { (t, t + 1) } else { (t % 2, (t + 1) % 2) };
        let xt = &x[t * INPUT_SIZE..(t + 1) * INPUT_SIZE];
        {
            let h_prev = &hs[prev * hidden..(prev + 1) * hidden];
            for (r, zr) in z.iter_mut().enumerate() {
                let wi = &w.w_ih[r * INPUT_SIZE..(r + 1) * INPUT_SIZE];
                *zr = w.b_lstm[r]
                    + wi[0] * xt[0]
                    + wi[1] * xt[1]
                    + wi[2] * xt[2]
                    + dot(&w.w_hh[r * hidden..(r + 1) * hidden], h_prev);
            }
        }
        let g_off = if keep { t * h4 } else { 0 };
        let tc_off = if keep { t * hidden } else { 0 };
        for k in 0..hidden {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[hidden + k]);
            let g = z[2 * hidden + k].tanh();
            let o = sigmoid(z[3 * hidden + k]);
            let c = f * cs[prev * hidden + k] + i * g;
            let tc = c.tanh();
            cs[cur * hidden + k] = c;
            hs[cur * hidden + k] = o * tc;
            gates[g_off + k] = i;
            gates[g_off + hidden + k] = f;
            gates[g_off + 2 * hidden + k] = g;
            gates[g_off + 3 * hidden + k] = o;
            tanh_c[tc_off + k] = tc;
        }
    }
    if !keep && steps.is_multiple_of(2) {
        // Final state sits in row 0; move it to row 1 so callers read `last_hidden`.
        let (a, b) = hs.split_at_mut(hidden);
        b.copy_from_slice(a);
    }
    LstmTrace { h: hs, c: cs, gates, tanh_c }
}

impl<T: Scalar> LstmTrace<T> {
    fn last_hidden(&self, hidden: usize) -> &[T] {
        &self.h[self.h.len() - hidden..]
    }
}

/// Accumulates this sequence's LSTM gradients into `grad` given dL/dh at the last step.
fn lstm_backward<T: Scalar>(
    w: &ParamSet<T>,
    hidden: usize,
    x: &[T],
    steps: usize,
    trace: &LstmTrace<T>,
    dh_last: &[T],
    grad: &mut ParamSet<T>,
) {
    let h4 = 4 * hidden;
    let mut dh = dh_last.to_vec();
    let mut dc = vec![T::zero(); hidden];
    let mut dz = vec![T::zero(); h4];
    let one = T::one();

    for t in (0..steps).rev() {
        let gates = &trace.gates[t * h4..(t + 1) * h4];
        let tc = &trace.tanh_c[t * hidden..(t + 1) * hidden];
        let c_prev = &trace.c[t * hidden..(t + 1) * hidden];
        for k in 0..hidden {
            let (i, f, g, o) = (gates[k], gates[hidden + k], gates[2 * hidden + k], gates[3 * hidden + k]);
            let d_o = dh[k] * tc[k];
            let dck = dc[k] + dh[k] * o * (one - tc[k] * tc[k]);
            dz[k] = dck * g * i * (one - i);
            dz[hidden + k] = dck * c_prev[k] * f * (one - f);
            dz[2 * hidden + k] = dck * i * (one - g * g);
            dz[3 * hidden + k] = d_o * o * (one - o);
            dc[k] = dck * f;
        }

        let xt = &x[t * INPUT_SIZE..(t + 1) * INPUT_SIZE];
        let h_prev = &trace.h[t * hidden..(t + 1) * hidden];
        dh.fill(T::zero());
        for (r, &dzr) in dz.iter().enumerate() {
            grad.b_lstm[r] = grad.b_lstm[r] + dzr;
            let gi = &mut grad.w_ih[r * INPUT_SIZE..(r + 1) * INPUT_SIZE];
            for a in 0..INPUT_SIZE {
                gi[a] = gi[a] + dzr * xt[a];
            }
            axpy(dzr, h_prev, &mut grad.w_hh[r * hidden..(r + 1) * hidden]);
            axpy(dzr, &w.w_hh[r * hidden..(r + 1) * hidden], &mut dh);
        }
    }
}

/// Batch statistics observed by a train-mode pass, used for the running averages.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

struct HeadTrace<T> {
    /// `B × D` dense1 pre-activation.
    z1: Vec<T>,
    /// `B × D` normalized activations.
    xhat: Vec<T>,
    /// `B × D` batch-norm output.
    y: Vec<T>,
    inv_std: Vec<T>,
    probs: Vec<T>,
    stats: BatchNormStats<T>,
}

fn check_finite<T: Scalar>(values: &[T], layer: &'static str) -> Result<(), ClassifierError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ClassifierError::NonFinite { layer })
    }
}

fn head_forward<T: Scalar>(model: &ModelParams<T>, hs: &[T], batch: usize, mode: Mode) -> Result<HeadTrace<T>, ClassifierError> {
    let Architecture { hidden, dense } = model.arch;
    let w = &model.weights;
    let mut z1 = vec![T::zero(); batch * dense];
    let mut r = vec![T::zero(); batch * dense];
    for b in 0..batch {
        let h = &hs[b * hidden..(b + 1) * hidden];
        for j in 0..dense {
            let v = w.b1[j] + dot(&w.w1[j * hidden..(j + 1) * hidden], h);
            z1[b * dense + j] = v;
            r[b * dense + j] = v.max(T::zero());
        }
    }
    check_finite(&z1, "dense1")?;

    let eps: T = lit(BN_EPSILON);
    let bf: T = lit(batch as f64);
    let (mean, var) = match mode {
        Mode::Train => {
            let mut mean = vec![T::zero(); dense];
            let mut var = vec![T::zero(); dense];
            for j in 0..dense {
                let m = (0..batch).fold(T::zero(), |s, b| s + r[b * dense + j]) / bf;
                let v = (0..batch).fold(T::zero(), |s, b| {
                    let d = r[b * dense + j] - m;
                    s + d * d
                }) / bf;
                mean[j] = m;
                var[j] = v;
            }
            (mean, var)
        }
        Mode::Eval => (model.running_mean.clone(), model.running_var.clone()),
    };
    let inv_std: Vec<T> = var.iter().map(|v| T::one() / (*v + eps).sqrt()).collect();
    let mut xhat = vec![T::zero(); batch * dense];
    let mut y = vec![T::zero(); batch * dense];
    for b in 0..batch {
        for j in 0..dense {
            let k = b * dense + j;
            xhat[k] = (r[k] - mean[j]) * inv_std[j];
            y[k] = w.gamma[j] * xhat[k] + w.beta[j];
        }
    }
    check_finite(&y, "batchnorm")?;

    let probs: Vec<T> = (0..batch)
        .map(|b| sigmoid(w.b2[0] + dot(&w.w2, &y[b * dense..(b + 1) * dense])))
        .collect();
    check_finite(&probs, "output")?;
    Ok(HeadTrace { z1, xhat, y, inv_std, probs, stats: BatchNormStats { mean, var } })
}

fn last_hidden_states<T: Scalar>(model: &ModelParams<T>, inputs: &SequenceBatch<T>) -> Result<Vec<T>, ClassifierError> {
    let hidden = model.arch.hidden;
    let steps = inputs.steps();
    let rows: Vec<Vec<T>> = (0..inputs.len())
        .into_par_iter()
        .map(|i| lstm_forward(&model.weights, hidden, inputs.window(i), steps, false).last_hidden(hidden).to_vec())
        .collect();
    let hs: Vec<T> = rows.concat();
    check_finite(&hs, "lstm")?;
    Ok(hs)
}

/// Fall probabilities for a batch of standardized windows.
pub fn forward<T: Scalar>(model: &ModelParams<T>, inputs: &SequenceBatch<T>, mode: Mode) -> Result<Vec<T>, ClassifierError> {
    if inputs.is_empty() {
        return Err(ClassifierError::EmptyInput("batch"));
    }
    let hs = last_hidden_states(model, inputs)?;
    Ok(head_forward(model, &hs, inputs.len(), mode)?.probs)
}

/// Mean binary cross-entropy with probabilities clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce<T: Scalar>(probs: &[T], labels: &[u8]) -> T {
    let lo: T = lit(PROB_CLAMP);
    let hi = T::one() - lo;
    let sum = probs.iter().zip(labels).fold(T::zero(), |s, (&p, &y)| {
        let p = p.max(lo).min(hi);
        s - if y != 0 { p.ln() } else { (T::one() - p).ln() }
    });
    sum / lit(probs.len() as f64)
}

/// Result of a train-mode pass with gradients.
pub struct LossAndGradients<T> {
    pub loss: T,
    pub gradients: ParamSet<T>,
    pub batch_stats: BatchNormStats<T>,
    pub probabilities: Vec<T>,
}

/// Train-mode forward and full backward pass. The model is not modified.
pub fn loss_and_gradients<T: Scalar>(
    model: &ModelParams<T>,
    inputs: &SequenceBatch<T>,
    labels: &[u8],
) -> Result<LossAndGradients<T>, ClassifierError> {
    let batch = inputs.len();
    if batch == 0 {
        return Err(ClassifierError::EmptyInput("batch"));
    }
    if labels.len() != batch {
        return Err(ClassifierError::Shape(format!("{} labels for {batch} windows", labels.len())));
    }
    let Architecture { hidden, dense } = model.arch;
    let steps = inputs.steps();
    let w = &model.weights;

    let traces: Vec<LstmTrace<T>> = (0..batch)
        .into_par_iter()
        .map(|i| lstm_forward(w, hidden, inputs.window(i), steps, true))
        .collect();
    let hs: Vec<T> = traces.iter().flat_map(|t| t.last_hidden(hidden).iter().copied()).collect();
    check_finite(&hs, "lstm")?;
    let head = head_forward(model, &hs, batch, Mode::Train)?;
    let loss = bce(&head.probs, labels);
    if !loss.is_finite() {
        return Err(ClassifierError::NonFinite { layer: "loss" });
    }

    let mut grad = ParamSet::zeros(model.arch);
    let bf: T = lit(batch as f64);
    let lo: T = lit(PROB_CLAMP);
    let hi = T::one() - lo;
    // dL/dz2 = (p − y)/B outside the clamp region, 0 inside it.
    let dz2: Vec<T> = head
        .probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            if p < lo || p > hi {
                T::zero()
            } else {
                (p - if y != 0 { T::one() } else { T::zero() }) / bf
            }
        })
        .collect();

    grad.b2[0] = dz2.iter().fold(T::zero(), |s, d| s + *d);
    let mut dxhat = vec![T::zero(); batch * dense];
    for (b, &dz) in dz2.iter().enumerate() {
        for j in 0..dense {
            let k = b * dense + j;
            grad.w2[j] = grad.w2[j] + dz * head.y[k];
            let dy = dz * w.w2[j];
            grad.gamma[j] = grad.gamma[j] + dy * head.xhat[k];
            grad.beta[j] = grad.beta[j] + dy;
            dxhat[k] = dy * w.gamma[j];
        }
    }

    let mut dz1 = vec![T::zero(); batch * dense];
    for j in 0..dense {
        let (mut sum, mut sum_x) = (T::zero(), T::zero());
        for b in 0..batch {
            let k = b * dense + j;
            sum = sum + dxhat[k];
            sum_x = sum_x + dxhat[k] * head.xhat[k];
        }
        for b in 0..batch {
            let k = b * dense + j;
            let dr = head.inv_std[j] / bf * (bf * dxhat[k] - sum - head.xhat[k] * sum_x);
            dz1[k] = if head.z1[k] > T::zero() { dr } else { T::zero() };
        }
    }

    let mut dh = vec![T::zero(); batch * hidden];
    for b in 0..batch {
        let h = &hs[b * hidden..(b + 1) * hidden];
        for j in 0..dense {
            let d = dz1[b * dense + j];
            grad.b1[j] = grad.b1[j] + d;
            axpy(d, h, &mut grad.w1[j * hidden..(j + 1) * hidden]);
            axpy(d, &w.w1[j * hidden..(j + 1) * hidden], &mut dh[b * hidden..(b + 1) * hidden]);
        }
    }

    let chunks: Vec<ParamSet<T>> = (0..batch)
        .collect::<Vec<_>>()
        .par_chunks(GRAD_CHUNK)
        .map(|idx| {
            let mut g = ParamSet::zeros(model.arch);
            for &b in idx {
                lstm_backward(w, hidden, inputs.window(b), steps, &traces[b], &dh[b * hidden..(b + 1) * hidden], &mut g);
            }
            g
        })
        .collect();
    for g in &chunks {
        grad.w_ih.iter_mut().zip(&g.w_ih).for_each(|(a, b)| *a = *a + *b);
        grad.w_hh.iter_mut().zip(&g.w_hh).for_each(|(a, b)| *a = *a + *b);
        grad.b_lstm.iter_mut().zip(&g.b_lstm).for_each(|(a, b)| *a = *a + *b);
    }
    if !grad.all_finite() {
        return Err(ClassifierError::NonFinite { layer: "gradients" });
    }

    Ok(LossAndGradients { loss, gradients: grad, batch_stats: head.stats, probabilities: head.probs })
}

/// Folds one batch's statistics into the running averages.
pub fn update_running_stats<T: Scalar>(model: &mut ModelParams<T>, stats: &BatchNormStats<T>) {
    let m: T = lit(BN_MOMENTUM);
    let rest = T::one() - m;
    for (r, s) in model.running_mean.iter_mut().zip(&stats.mean) {
        *r = m * *r + rest * *s;
    }
    for (r, s) in model.running_var.iter_mut().zip(&stats.var) {
        *r = m * *r + rest * *s;
    }
}
