//! Single-hidden-layer feedforward regressor with a linear output neuron.
//!
//! Training minimizes mean squared error over mini-batches. Weight updates
//! follow the classic momentum form
//!
//! ```text
//! step_t   = -lr * grad_t + momentum * step_{t-1}
//! w_{t+1}  = w_t + step_t
//! ```
//!
//! for the plain stochastic optimizer, with rmsprop, adam, and adagrad as
//! adaptive alternatives. Initialization draws weights uniformly from
//! +-sqrt(6 / (fan_in + fan_out)); hidden and output biases start at zero.
//! Epochs cap at `max_epochs`, with a plateau rule that stops earlier once
//! the full-data loss stops improving.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FitError;
use crate::util::seeded_rng;

pub const DEFAULT_MAX_EPOCHS: usize = 2000;
/// Epochs of no relative improvement tolerated before training stops.
const PLATEAU_PATIENCE: usize = 150;
const PLATEAU_REL_IMPROVEMENT: f64 = 1e-6;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const DECAY_RATE: f64 = 0.9;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanhdot,
    Relu,
    Sigmoid,
    Softrelu,
}

impl Activation {
    pub fn from_name(name: &str) -> Result<Self, FitError> {
        match name {
            "tanhdot" => Ok(Activation::Tanhdot),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "softrelu" => Ok(Activation::Softrelu),
            other => Err(FitError::BadConfig(format!("unknown activation `{other}`"))),
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanhdot => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            // Softplus, computed in the overflow-safe branch form.
            Activation::Softrelu => {
                if z > 30.0 {
                    z
                } else {
                    z.exp().ln_1p()
                }
            }
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Tanhdot => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Softrelu => sigmoid(z),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "optimizer", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd { momentum: f64 },
    Rmsprop,
    Adam,
    Adagrad,
}

impl OptimizerKind {
    pub fn from_name(name: &str, momentum: f64) -> Result<Self, FitError> {
        match name {
            "sgd" => Ok(OptimizerKind::Sgd { momentum }),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            "adam" => Ok(OptimizerKind::Adam),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            other => Err(FitError::BadConfig(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnParams {
    pub hidden: usize,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
}

impl AnnParams {
    pub fn new(
        hidden: usize,
        activation: Activation,
        optimizer: OptimizerKind,
        batch_size: usize,
        learning_rate: f64,
    ) -> Self {
        AnnParams {
            hidden,
            activation,
            optimizer,
            batch_size,
            learning_rate,
            max_epochs: DEFAULT_MAX_EPOCHS,
        }
    }

    fn validate(&self) -> Result<(), FitError> {
        if self.hidden == 0 {
            return Err(FitError::BadConfig("need at least one hidden neuron".into()));
        }
        if self.batch_size == 0 {
            return Err(FitError::BadConfig("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(FitError::BadConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let OptimizerKind::Sgd { momentum } = self.optimizer {
            if !(0.0..1.0).contains(&momentum) {
                return Err(FitError::BadConfig(format!(
                    "momentum must lie in [0, 1), got {momentum}"
                )));
            }
        }
        Ok(())
    }
}

/// The network itself: a flat parameter vector `[w1 | b1 | w2 | b2]` with
/// `w1` stored row-per-hidden-neuron. Keeping parameters flat makes the
/// optimizers and gradient checks uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnNet {
    pub inputs: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub params: Vec<f64>,
}

impl AnnNet {
    pub fn param_count(inputs: usize, hidden: usize) -> usize {
        hidden * inputs + hidden + hidden + 1
    }

    pub fn new(inputs: usize, hidden: usize, activation: Activation, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), Self::param_count(inputs, hidden));
        AnnNet { inputs, hidden, activation, params }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (d, h) = (self.inputs, self.hidden);
        let w1 = &self.params[0..h * d];
        let b1 = &self.params[h * d..h * d + h];
        let w2 = &self.params[h * d + h..h * d + 2 * h];
        let b2 = self.params[h * d + 2 * h];
        (w1, b1, w2, b2)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.inputs);
        let (w1, b1, w2, b2) = self.split();
        let mut out = b2;
        for j in 0..self.hidden {
            let mut z = b1[j];
            for (d, xv) in x.iter().enumerate() {
                z += w1[j * self.inputs + d] * xv;
            }
            out += w2[j] * self.activation.apply(z);
        }
        out
    }

    /// Mean squared error over a batch.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        let m = xs.len() as f64;
        xs.iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = self.predict(x) - y;
                e * e
            })
            .sum::<f64>()
            / m
    }

    /// Gradient of the batch mean squared error in parameter layout order.
    pub fn grad(&self, xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
        let (d, h) = (self.inputs, self.hidden);
        let (w1, b1, w2, _) = self.split();
        let mut g = vec![0.0; self.params.len()];
        let m = xs.len() as f64;
        let mut z = vec![0.0; h];
        let mut a = vec![0.0; h];
        for (x, y) in xs.iter().zip(ys) {
            for j in 0..h {
                let mut s = b1[j];
                for (k, xv) in x.iter().enumerate() {
                    s += w1[j * d + k] * xv;
                }
                z[j] = s;
                a[j] = self.activation.apply(s);
            }
            let out = w2.iter().zip(&a).map(|(w, av)| w * av).sum::<f64>()
                + self.params[h * d + 2 * h];
            let delta = 2.0 * (out - y) / m;
            for j in 0..h {
                g[h * d + h + j] += delta * a[j];
                let d1 = delta * w2[j] * self.activation.derivative(z[j]);
                g[h * d + j] += d1;
                for (k, xv) in x.iter().enumerate() {
                    g[j * d + k] += d1 * xv;
                }
            }
            g[h * d + 2 * h] += delta;
        }
        g
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnModel {
    pub net: AnnNet,
    /// Epochs actually run before the cap or the plateau rule ended training.
    pub epochs_run: usize,
    pub final_loss: f64,
}

impl AnnModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.net.predict(x)
    }
}

/// Per-parameter optimizer state.
struct OptimizerState {
    kind: OptimizerKind,
    lr: f64,
    prev_step: Vec<f64>,
    acc: Vec<f64>,
    second: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    fn new(kind: OptimizerKind, lr: f64, dim: usize) -> Self {
        OptimizerState {
            kind,
            lr,
            prev_step: vec![0.0; dim],
            acc: vec![0.0; dim],
            second: vec![0.0; dim],
            t: 0,
        }
    }

    fn apply(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                for (i, g) in grad.iter().enumerate() {
                    let step = -self.lr * g + momentum * self.prev_step[i];
                    params[i] += step;
                    self.prev_step[i] = step;
                }
            }
            OptimizerKind::Rmsprop => {
                for (i, g) in grad.iter().enumerate() {
                    self.acc[i] = DECAY_RATE * self.acc[i] + (1.0 - DECAY_RATE) * g * g;
                    params[i] -= self.lr * g / (self.acc[i].sqrt() + EPS);
                }
            }
            OptimizerKind::Adam => {
                let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                for (i, g) in grad.iter().enumerate() {
                    self.acc[i] = ADAM_BETA1 * self.acc[i] + (1.0 - ADAM_BETA1) * g;
                    self.second[i] = ADAM_BETA2 * self.second[i] + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = self.acc[i] / bc1;
                    let v_hat = self.second[i] / bc2;
                    params[i] -= self.lr * m_hat / (v_hat.sqrt() + EPS);
                }
            }
            OptimizerKind::Adagrad => {
                for (i, g) in grad.iter().enumerate() {
                    self.acc[i] += g * g;
                    params[i] -= self.lr * g / (self.acc[i].sqrt() + EPS);
                }
            }
        }
    }
}

/// Glorot-uniform layer weights, zero biases.
fn init_params(inputs: usize, hidden: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let mut params = vec![0.0; AnnNet::param_count(inputs, hidden)];
    let lim1 = (6.0 / (inputs + hidden) as f64).sqrt();
    for p in params.iter_mut().take(hidden * inputs) {
        *p = (rng.gen::<f64>() * 2.0 - 1.0) * lim1;
    }
    let lim2 = (6.0 / (hidden + 1) as f64).sqrt();
    for j in 0..hidden {
        params[hidden * inputs + hidden + j] = (rng.gen::<f64>() * 2.0 - 1.0) * lim2;
    }
    params
}

/// Trains a network on `(xs, ys)`. Deterministic in `(data, params, seed)`.
pub fn ann_fit(
    xs: &[Vec<f64>],
    ys: &[f64],
    params: AnnParams,
    seed: u64,
) -> Result<AnnModel, FitError> {
    params.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(FitError::BadData(format!(
            "need equal nonzero row counts, got {} features and {} responses",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    let inputs = xs[0].len();
    let batch = params.batch_size.min(n);
    let mut rng = seeded_rng(seed, 0x414e_4e);
    let mut net = AnnNet::new(
        inputs,
        params.hidden,
        params.activation,
        init_params(inputs, params.hidden, &mut rng),
    );
    let mut opt = OptimizerState::new(params.optimizer, params.learning_rate, net.params.len());

    let mut order: Vec<usize> = (0..n).collect();
    let mut best_loss = f64::INFINITY;
    let mut stall = 0usize;
    let mut epochs_run = 0usize;
    let mut final_loss = net.loss(xs, ys);

    let mut bx: Vec<Vec<f64>> = Vec::with_capacity(batch);
    let mut by: Vec<f64> = Vec::with_capacity(batch);
    for epoch in 0..params.max_epochs {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(xs[i].clone());
                by.push(ys[i]);
            }
            let g = net.grad(&bx, &by);
            opt.apply(&mut net.params, &g);
        }
        let loss = net.loss(xs, ys);
        if !loss.is_finite() {
            return Err(FitError::Divergence { epoch });
        }
        epochs_run = epoch + 1;
        final_loss = loss;
        if loss < best_loss * (1.0 - PLATEAU_REL_IMPROVEMENT) {
            best_loss = loss;
            stall = 0;
        } else {
            best_loss = best_loss.min(loss);
            stall += 1;
            if stall >= PLATEAU_PATIENCE {
                break;
            }
        }
        if loss <= 1e-12 {
            break;
        }
    }

    Ok(AnnModel { net, epochs_run, final_loss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_update_matches_hand_steps() {
        // One weight, constant gradient 0.5, lr 0.1, momentum 0.9:
        // step1 = -0.05 -> w = 0.95; step2 = -0.05 + 0.9*(-0.05) -> w = 0.855.
        let mut state = OptimizerState::new(OptimizerKind::Sgd { momentum: 0.9 }, 0.1, 1);
        let mut w = vec![1.0];
        state.apply(&mut w, &[0.5]);
        assert!((w[0] - 0.95).abs() < 1e-15);
        state.apply(&mut w, &[0.5]);
        assert!((w[0] - 0.855).abs() < 1e-15);
    }

    fn wave_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        use rand::Rng;
        let mut rng = crate::util::seeded_rng(seed, 0);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 0.5 + 0.3 * (3.0 * x[0]).sin() * x[1])
            .collect();
        (xs, ys)
    }

    #[test]
    fn training_reduces_loss_for_every_optimizer() {
        let (xs, ys) = wave_data(80, 1);
        for opt in [
            OptimizerKind::Sgd { momentum: 0.9 },
            OptimizerKind::Rmsprop,
            OptimizerKind::Adam,
            OptimizerKind::Adagrad,
        ] {
            let lr = match opt {
                OptimizerKind::Sgd { .. } => 0.1,
                _ => 0.01,
            };
            let params = AnnParams::new(8, Activation::Tanhdot, opt, 20, lr);
            let init_loss = {
                let mut rng = crate::util::seeded_rng(42, 0x414e_4e);
                let net = AnnNet::new(2, 8, Activation::Tanhdot, init_params(2, 8, &mut rng));
                net.loss(&xs, &ys)
            };
            let model = ann_fit(&xs, &ys, params, 42).unwrap();
            assert!(
                model.final_loss < init_loss * 0.5,
                "{opt:?}: {} not well below {init_loss}",
                model.final_loss
            );
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (xs, ys) = wave_data(40, 2);
        let params = AnnParams::new(6, Activation::Sigmoid, OptimizerKind::Adam, 16, 0.01);
        let a = ann_fit(&xs, &ys, params.clone(), 7).unwrap();
        let b = ann_fit(&xs, &ys, params.clone(), 7).unwrap();
        let c = ann_fit(&xs, &ys, params, 8).unwrap();
        assert_eq!(a.net.params, b.net.params);
        assert_ne!(a.net.params, c.net.params);
    }

    #[test]
    fn plateau_rule_stops_before_the_epoch_cap() {
        let (xs, ys) = wave_data(30, 3);
        let params = AnnParams::new(4, Activation::Tanhdot, OptimizerKind::Adam, 30, 0.05);
        let model = ann_fit(&xs, &ys, params, 5).unwrap();
        assert!(model.epochs_run <= DEFAULT_MAX_EPOCHS);
    }

    #[test]
    fn exploding_rate_reports_divergence() {
        let (xs, mut ys) = wave_data(30, 4);
        for y in &mut ys {
            *y *= 1e3;
        }
        let params = AnnParams::new(32, Activation::Relu, OptimizerKind::Sgd { momentum: 0.99 }, 5, 1e3);
        match ann_fit(&xs, &ys, params, 6) {
            Err(FitError::Divergence { .. }) => {}
            Ok(m) => assert!(m.final_loss.is_finite()),
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn batch_larger_than_data_is_clamped() {
        let (xs, ys) = wave_data(12, 5);
        let params = AnnParams::new(3, Activation::Softrelu, OptimizerKind::Adam, 500, 0.01);
        let model = ann_fit(&xs, &ys, params, 9).unwrap();
        assert!(model.final_loss.is_finite());
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let (xs, ys) = wave_data(10, 6);
        let bad_lr = AnnParams::new(3, Activation::Relu, OptimizerKind::Adam, 4, 0.0);
        assert!(ann_fit(&xs, &ys, bad_lr, 1).is_err());
        let bad_momentum =
            AnnParams::new(3, Activation::Relu, OptimizerKind::Sgd { momentum: 1.0 }, 4, 0.1);
        assert!(ann_fit(&xs, &ys, bad_momentum, 1).is_err());
        let no_hidden = AnnParams::new(0, Activation::Relu, OptimizerKind::Adam, 4, 0.1);
        assert!(ann_fit(&xs, &ys, no_hidden, 1).is_err());
    }
}
