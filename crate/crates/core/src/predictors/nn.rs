//! One-hidden-layer network `W2 tanh(W1 (z, t) + b1) + b2`, trained by plain
//! mini-batch gradient descent on squared error.
//!
//! Covariates are standardized with training means and deviations, the
//! treatment coordinate enters as `+-1`, and the target is standardized
//! before training and mapped back on prediction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TreatmentArm};
use crate::error::{Error, Result};

use super::{RegressionFn, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            lr: 0.01,
            batch: 32,
            seed: 0,
        }
    }
}

/// Raw network parameters. Inputs are whatever the caller feeds in; no
/// scaling happens at this level.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    /// `hidden x inputs`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Mlp {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            inputs,
            hidden,
            w1: vec![0.0; hidden * inputs],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(inputs, hidden);
        let a1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        for w in &mut net.w1 {
            *w = rng.random_range(-a1..a1);
        }
        for w in &mut net.w2 {
            *w = rng.random_range(-a2..a2);
        }
        net
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn n_params(&self) -> usize {
        self.hidden * (self.inputs + 2) + 1
    }

    /// Flattened parameters: `w1`, `b1`, `w2`, `b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let (w1, rest) = p.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    pub fn forward(&self, input: &[f64]) -> f64 {
        let mut out = self.b2;
        for j in 0..self.hidden {
            out += self.w2[j] * self.activation(j, input).tanh();
        }
        out
    }

    fn activation(&self, j: usize, input: &[f64]) -> f64 {
        let w = &self.w1[j * self.inputs..(j + 1) * self.inputs];
        self.b1[j] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Mean squared error over row-major `inputs` and `targets`.
    pub fn loss(&self, inputs: &[f64], targets: &[f64]) -> f64 {
        if targets.is_empty() {
            return 0.0;
        }
        let s: f64 = targets
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let r = self.forward(&inputs[i * self.inputs..(i + 1) * self.inputs]) - y;
                r * r
            })
            .sum();
        s / targets.len() as f64
    }

    /// Loss and its gradient with respect to [`Mlp::params`].
    pub fn loss_and_gradient(&self, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n_params()];
        let mut hbuf = vec![0.0; self.hidden];
        let idx: Vec<usize> = (0..targets.len()).collect();
        let loss = self.accumulate(inputs, targets, &idx, &mut grad, &mut hbuf);
        (loss, grad)
    }

    /// Adds the gradient of the mean squared error over rows `idx` into
    /// `grad` and returns that loss.
    fn accumulate(&self, inputs: &[f64], targets: &[f64], idx: &[usize], grad: &mut [f64], hbuf: &mut [f64]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let scale = 2.0 / idx.len() as f64;
        let nw1 = self.w1.len();
        let (gw1, rest) = grad.split_at_mut(nw1);
        let (gb1, rest) = rest.split_at_mut(self.hidden);
        let (gw2, gb2) = rest.split_at_mut(self.hidden);
        let mut sq = 0.0;
        for &i in idx {
            let input = &inputs[i * self.inputs..(i + 1) * self.inputs];
            let mut out = self.b2;
            for (j, h) in hbuf.iter_mut().enumerate() {
                *h = self.activation(j, input).tanh();
                out += self.w2[j] * *h;
            }
            let r = out - targets[i];
            sq += r * r;
            let g = scale * r;
            gb2[0] += g;
            for j in 0..self.hidden {
                let h = hbuf[j];
                gw2[j] += g * h;
                let da = g * self.w2[j] * (1.0 - h * h);
                gb1[j] += da;
                let row = &mut gw1[j * self.inputs..(j + 1) * self.inputs];
                for (gw, x) in row.iter_mut().zip(input) {
                    *gw += da * x;
                }
            }
        }
        sq / idx.len() as f64
    }

    fn step(&mut self, grad: &[f64], lr: f64) {
        let nw1 = self.w1.len();
        let h = self.hidden;
        for (w, g) in self.w1.iter_mut().zip(&grad[..nw1]) {
            *w -= lr * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grad[nw1..nw1 + h]) {
            *b -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grad[nw1 + h..nw1 + 2 * h]) {
            *w -= lr * g;
        }
        self.b2 -= lr * grad[nw1 + 2 * h];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnFit {
    scaler: Standardizer,
    y_mean: f64,
    y_sd: f64,
    net: Mlp,
    initial_loss: f64,
    final_loss: f64,
}

impl NnFit {
    pub fn predict(&self, x: &[f64], t: TreatmentArm) -> f64 {
        let d = x.len();
        let mut input = vec![0.0; d + 1];
        self.scaler.apply_into(x, &mut input[..d]);
        input[d] = t.value();
        self.y_mean + self.y_sd * self.net.forward(&input)
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    /// Training-set loss (standardized target) before the first update.
    pub fn initial_loss(&self) -> f64 {
        self.initial_loss
    }

    /// Training-set loss (standardized target) after the last epoch.
    pub fn final_loss(&self) -> f64 {
        self.final_loss
    }
}

pub fn fit_nn(ds: &Dataset, hidden: usize, cfg: &TrainConfig) -> Result<RegressionFn> {
    if hidden == 0 {
        return Err(Error::InvalidTrainConfig("hidden must be at least 1".into()));
    }
    if cfg.batch == 0 {
        return Err(Error::InvalidTrainConfig("batch must be at least 1".into()));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::InvalidTrainConfig(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    let n = ds.len();
    if n == 0 {
        return Ok(RegressionFn::Zero);
    }

    let d = ds.dim();
    let inputs = d + 1;
    let scaler = Standardizer::fit(ds);
    let mut x = vec![0.0; n * inputs];
    for i in 0..n {
        let row = &mut x[i * inputs..(i + 1) * inputs];
        scaler.apply_into(ds.row(i), &mut row[..d]);
        row[d] = ds.arm(i).value();
    }
    let y_mean = ds.outcomes().iter().sum::<f64>() / n as f64;
    let var = ds.outcomes().iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64;
    let y_sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    let y: Vec<f64> = ds.outcomes().iter().map(|v| (v - y_mean) / y_sd).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Mlp::random(inputs, hidden, &mut rng);
    let initial_loss = net.loss(&x, &y);

    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; net.n_params()];
    let mut hbuf = vec![0.0; hidden];
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            epoch_loss += net.accumulate(&x, &y, batch, &mut grad, &mut hbuf) * batch.len() as f64;
            net.step(&grad, cfg.lr);
        }
        if !epoch_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    let final_loss = net.loss(&x, &y);
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs });
    }

    Ok(RegressionFn::Nn(NnFit {
        scaler,
        y_mean,
        y_sd,
        net,
        initial_loss,
        final_loss,
    }))
}
