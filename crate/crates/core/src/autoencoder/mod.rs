//! The inner code: a fully connected autoencoder whose encoder is a frozen
//! random linear layer, whose middle is the channel, and whose decoder is a
//! trained ReLU network minimizing squared error.
//!
//! Blocks of `N` complex symbols are handled as real vectors of length `2N`
//! in interleaved layout `(re0, im0, re1, im1, …)`.

pub mod checkpoint;
mod network;
mod train;

pub use network::{
    decode, decode_jvp, encode, encode_affine, loss_and_grads, AeDims, Dense, Encoded, Grads, MlpParams, TrainPair,
    DECODER_LAYERS,
};
pub use train::{
    infer_block, moving_average, train_window, AeBlockResult, LambdaLayer, Optimizer, OptimizerKind, TrainConfig,
    TrainReport, WindowBlock, MIN_RESIDUAL_VAR,
};

use num_complex::Complex64;

use crate::ldpc::LlrVector;
use crate::modem::{real_to_complex, BlockPartition, Constellation, ModemError};

#[derive(Debug, thiserror::Error)]
pub enum AeError {
    #[error("invalid autoencoder configuration: {0}")]
    BadConfig(String),
    #[error("training diverged (non-finite loss or parameters) in epoch {epoch}; lower the learning rate")]
    Diverged { epoch: usize },
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error(transparent)]
    Modem(#[from] ModemError),
}

pub type Result<T> = std::result::Result<T, AeError>;

/// Soft bits for a whole codeword from the decoder outputs of its blocks,
/// treating `d̂ = d + v` with Gaussian `v` of variance `residual_var` per
/// real dimension. Padding symbols are dropped before demapping.
pub fn llr_from_residuals(
    d_hat_blocks: &[Vec<f64>],
    partition: &BlockPartition,
    residual_var: f64,
    constellation: &Constellation,
) -> Result<LlrVector> {
    if !(residual_var > 0.0 && residual_var.is_finite()) {
        return Err(AeError::BadConfig(format!(
            "residual variance must be positive, got {residual_var}"
        )));
    }
    let symbols: Vec<Vec<Complex64>> = d_hat_blocks.iter().map(|b| real_to_complex(b)).collect();
    let received = partition.reassemble(&symbols);
    Ok(constellation.demap_llr(&received, residual_var)?)
}
