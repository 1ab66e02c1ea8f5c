//! Fully connected network with tanh hidden layers, trained by full-batch
//! gradient descent. With no hidden layers and a softmax output it is
//! multinomial logistic regression.

use ndarray::{Array1, Array2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// One linear unit, squared error.
    Linear,
    /// Softmax over `n` classes, cross-entropy.
    Softmax(usize),
}

/// Training targets in the form the loss consumes.
#[derive(Debug, Clone, Copy)]
pub enum MlpTarget<'a> {
    Real(&'a [f64]),
    Class(&'a [usize]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.05,
        }
    }
}

/// Per-column affine map `(x - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub shift: Array1<f64>,
    pub scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let shift = x.sum_axis(Axis(0)) / n;
        let scale = x
            .columns()
            .into_iter()
            .zip(shift.iter())
            .map(|(c, m)| {
                let v = c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                if v > 0.0 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { shift, scale }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            shift: Array1::zeros(p),
            scale: Array1::ones(p),
        }
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        (x - &self.shift) / &self.scale
    }
}

/// Weights are stored `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    output: Output,
    l2: f64,
}

/// Gradient with the same layout as the network parameters.
#[derive(Debug, Clone)]
pub struct MlpGrad {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrad {
    pub fn flatten(&self) -> Vec<f64> {
        flatten(&self.weights, &self.biases)
    }
}

fn flatten(w: &[Array2<f64>], b: &[Array1<f64>]) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in w.iter().zip(b) {
        out.extend(w.iter());
        out.extend(b.iter());
    }
    out
}

impl Mlp {
    /// `sizes` lists every layer width from input to output.
    pub fn init(sizes: &[usize], output: Output, l2: f64, seed: u64) -> Self {
        let mut rng = rng_for(seed, "mlp/init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || {
                rng.random_range(-0.5..0.5)
            }));
            biases.push(Array1::from_shape_simple_fn(fan_out, || rng.random_range(-0.5..0.5)));
        }
        Self {
            weights,
            biases,
            output,
            l2,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output(&self) -> Output {
        self.output
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.weights[..self.weights.len() - 1]
            .iter()
            .map(|w| w.nrows())
            .collect()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        flatten(&self.weights, &self.biases)
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().for_each(|v| *v = it.next().expect("parameter count"));
            b.iter_mut().for_each(|v| *v = it.next().expect("parameter count"));
        }
        assert!(it.next().is_none(), "parameter count");
    }

    /// Activations of every layer; the last entry is the raw output (before
    /// softmax).
    fn forward_all(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        let mut acts = vec![x.clone()];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(&w.t()) + b;
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        acts
    }

    /// Raw outputs (logits for softmax networks).
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_all(x).pop().expect("output layer")
    }

    /// Activations of the last hidden layer.
    pub fn hidden(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut a = x.clone();
        for (w, b) in self.weights[..self.weights.len() - 1].iter().zip(&self.biases) {
            a = a.dot(&w.t()) + b;
            a.mapv_inplace(f64::tanh);
        }
        a
    }

    /// Mean loss plus `l2/2 * sum(w^2)` over weights, and its gradient.
    pub fn loss_and_grad(&self, x: &Array2<f64>, target: MlpTarget<'_>) -> (f64, MlpGrad) {
        let n = x.nrows() as f64;
        let acts = self.forward_all(x);
        let out = acts.last().expect("output layer");
        let (data_loss, mut delta) = match (self.output, target) {
            (Output::Linear, MlpTarget::Real(y)) => {
                let mut d = out.clone();
                let mut loss = 0.0;
                for (i, yi) in y.iter().enumerate() {
                    let r = out[[i, 0]] - yi;
                    loss += 0.5 * r * r;
                    d[[i, 0]] = r / n;
                }
                (loss / n, d)
            }
            (Output::Softmax(k), MlpTarget::Class(labels)) => {
                let mut d = Array2::zeros((out.nrows(), k));
                let mut loss = 0.0;
                for (i, &c) in labels.iter().enumerate() {
                    let row = out.row(i);
                    let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
                    loss += m + z.ln() - row[c];
                    for j in 0..k {
                        let pj = (row[j] - m).exp() / z;
                        d[[i, j]] = (pj - if j == c { 1.0 } else { 0.0 }) / n;
                    }
                }
                (loss / n, d)
            }
            _ => panic!("target does not match network output"),
        };
        let mut reg = 0.0;
        let n_layers = self.weights.len();
        let mut gw = vec![Array2::zeros((0, 0)); n_layers];
        let mut gb = vec![Array1::zeros(0); n_layers];
        for l in (0..n_layers).rev() {
            let w = &self.weights[l];
            reg += 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>();
            gw[l] = delta.t().dot(&acts[l]) + &(w * self.l2);
            gb[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(w);
                back.zip_mut_with(&acts[l], |d, a| *d *= 1.0 - a * a);
                delta = back;
            }
        }
        (
            data_loss + reg,
            MlpGrad {
                weights: gw,
                biases: gb,
            },
        )
    }

    /// Full-batch gradient descent. Fails when the loss stops being finite.
    pub fn train(&mut self, x: &Array2<f64>, target: MlpTarget<'_>, cfg: &MlpConfig) -> Result<f64> {
        let mut loss = f64::NAN;
        for epoch in 0..cfg.epochs {
            let (l, g) = self.loss_and_grad(x, target);
            if !l.is_finite() {
                return Err(Error::Divergent(format!(
                    "non-finite loss at epoch {epoch} (learning_rate {})",
                    cfg.learning_rate
                )));
            }
            loss = l;
            for (w, gw) in self.weights.iter_mut().zip(&g.weights) {
                w.scaled_add(-cfg.learning_rate, gw);
            }
            for (b, gb) in self.biases.iter_mut().zip(&g.biases) {
                b.scaled_add(-cfg.learning_rate, gb);
            }
        }
        if cfg.epochs > 0 {
            let (l, _) = self.loss_and_grad(x, target);
            if !l.is_finite() {
                return Err(Error::Divergent(format!(
                    "non-finite final loss (learning_rate {})",
                    cfg.learning_rate
                )));
            }
            loss = l;
        }
        Ok(loss)
    }

    /// Drops the output layer, keeping the hidden stack.
    pub(crate) fn without_output(&self) -> Vec<(Array2<f64>, Array1<f64>)> {
        let k = self.weights.len() - 1;
        self.weights[..k]
            .iter()
            .cloned()
            .zip(self.biases[..k].iter().cloned())
            .collect()
    }
}

/// Row-wise argmax; ties resolve to the lowest class.
pub(crate) fn argmax_rows(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|r| {
            let mut best = 0;
            for (j, v) in r.iter().enumerate() {
                if *v > r[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
