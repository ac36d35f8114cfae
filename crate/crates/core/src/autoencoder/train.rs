use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::network::{encode, loss_grads_outputs, Dense, Grads, MlpParams, TrainPair};
use super::{AeError, Result};
use crate::channel::Channel;

/// Non-trainable layer between encoder and decoder.
pub trait LambdaLayer {
    /// Maps an interleaved transmit block to the received block.
    fn forward(&self, e: &[f64], rng: &mut dyn RngCore) -> Vec<f64>;
}

impl LambdaLayer for Channel {
    fn forward(&self, e: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        self.transmit(e, rng).expect("encoder output length matches channel")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    GradientDescent,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Fresh channel realizations per block per epoch.
    pub noise_realizations: usize,
    /// Codewords per training window.
    pub window: usize,
    /// Blocks per gradient step.
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    /// Train only on this leading fraction of each codeword's blocks.
    pub pilot_fraction: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 200,
            noise_realizations: 1,
            window: 8,
            batch_size: 8,
            optimizer: OptimizerKind::Adam,
            pilot_fraction: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AeError::BadConfig(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if self.window == 0 {
            return bad("window must be >= 1".into());
        }
        if self.noise_realizations == 0 || self.batch_size == 0 {
            return bad("noise_realizations and batch_size must be >= 1".into());
        }
        if let Some(f) = self.pilot_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("pilot_fraction must be in (0, 1], got {f}"));
            }
        }
        Ok(())
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Optimizer state for the decoder parameters.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: i32,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, p: &MlpParams) -> Self {
        let zeros = p.zero_grads().0;
        Optimizer {
            kind,
            lr,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn apply(&mut self, p: &mut MlpParams, g: &Grads) {
        match self.kind {
            OptimizerKind::GradientDescent => {
                for (layer, gl) in p.decoder.iter_mut().zip(&g.0) {
                    layer.scaled_add(-self.lr, gl);
                }
            }
            OptimizerKind::Adam => {
                self.step += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(self.step);
                let c2 = 1.0 - ADAM_BETA2.powi(self.step);
                let step = self.lr * c2.sqrt() / c1;
                for (((layer, gl), m), v) in p.decoder.iter_mut().zip(&g.0).zip(&mut self.m).zip(&mut self.v) {
                    let params = layer.weight.as_mut_slice().iter_mut().chain(layer.bias.as_mut_slice());
                    let grads = gl.weight.as_slice().iter().chain(gl.bias.as_slice());
                    let ms = m.weight.as_mut_slice().iter_mut().chain(m.bias.as_mut_slice());
                    let vs = v.weight.as_mut_slice().iter_mut().chain(v.bias.as_mut_slice());
                    for (((w, &gr), mi), vi) in params.zip(grads).zip(ms).zip(vs) {
                        *mi = ADAM_BETA1 * *mi + (1.0 - ADAM_BETA1) * gr;
                        *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * gr * gr;
                        *w -= step * *mi / (vi.sqrt() + ADAM_EPS * c2.sqrt());
                    }
                }
            }
        }
    }
}

/// A block the decoder is trained on (or evaluated against).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBlock {
    /// Interleaved real symbols, length 2N.
    pub d: Vec<f64>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-block loss of each epoch.
    pub loss_curve: Vec<f64>,
    /// Residual variance per real dimension over the final epoch,
    /// floored at [`MIN_RESIDUAL_VAR`].
    pub residual_var: f64,
    /// Final-epoch residuals `d̂ − d` on unmasked coordinates.
    pub residuals: Vec<f64>,
}

/// Floor applied to the residual variance estimate.
pub const MIN_RESIDUAL_VAR: f64 = 1e-6;

/// Trains the decoder on one window of blocks.
///
/// Every epoch draws fresh channel realizations for all blocks, shuffles the
/// resulting pairs, and takes one optimizer step per mini-batch. The encoder
/// layer is left untouched.
pub fn train_window(
    p: &mut MlpParams,
    blocks: &[WindowBlock],
    cfg: &TrainConfig,
    channel: &dyn LambdaLayer,
    opt: &mut Optimizer,
    rng: &mut dyn RngCore,
) -> Result<TrainReport> {
    cfg.validate()?;
    let encoded: Vec<Vec<f64>> = blocks.iter().map(|b| encode(&b.d, p).e).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    let mut residuals = Vec::new();

    for epoch in 0..cfg.epochs {
        let mut pairs: Vec<TrainPair> = Vec::with_capacity(blocks.len() * cfg.noise_realizations);
        for (b, e) in blocks.iter().zip(&encoded) {
            for _ in 0..cfg.noise_realizations {
                pairs.push(TrainPair {
                    d: b.d.clone(),
                    r: channel.forward(e, rng),
                    mask: b.mask.clone(),
                });
            }
        }
        pairs.shuffle(rng);
        let last = epoch + 1 == cfg.epochs;
        if last {
            residuals.clear();
        }
        let mut total = 0.0;
        for batch in pairs.chunks(cfg.batch_size) {
            let (loss, grads, out) = loss_grads_outputs(batch, p);
            if !loss.is_finite() {
                return Err(AeError::Diverged { epoch });
            }
            total += loss * batch.len() as f64;
            if last {
                for (j, pair) in batch.iter().enumerate() {
                    for (i, (&d, &m)) in pair.d.iter().zip(&pair.mask).enumerate() {
                        if m {
                            residuals.push(out[(i, j)] - d);
                        }
                    }
                }
            }
            opt.apply(p, &grads);
            if !p.is_finite() {
                return Err(AeError::Diverged { epoch });
            }
        }
        loss_curve.push(total / pairs.len().max(1) as f64);
    }

    Ok(TrainReport {
        loss_curve,
        residual_var: sample_variance(&residuals).max(MIN_RESIDUAL_VAR),
        residuals,
    })
}

pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Means of consecutive non-overlapping groups of `width` epochs.
pub fn moving_average(curve: &[f64], width: usize) -> Vec<f64> {
    curve
        .chunks_exact(width.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Autoencoder output for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct AeBlockResult {
    pub d_hat: Vec<f64>,
    /// `d_hat − d`, exactly.
    pub residual: Vec<f64>,
}

/// Encoder → channel → decoder for one block.
pub fn infer_block(d: &[f64], p: &MlpParams, channel: &dyn LambdaLayer, rng: &mut dyn RngCore) -> AeBlockResult {
    let e = encode(d, p);
    let r = channel.forward(&e.e, rng);
    let d_hat = super::network::decode(&r, p);
    let residual = d_hat.iter().zip(d).map(|(a, b)| a - b).collect();
    AeBlockResult { d_hat, residual }
}
