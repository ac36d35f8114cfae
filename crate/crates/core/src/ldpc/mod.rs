//! LDPC codes: parity-check matrices, systematic encoding and
//! sum-product decoding on log-likelihood ratios.
//!
//! LLR sign convention throughout: positive means bit 0 is more likely.

mod codes;
mod decoder;
mod encoder;
mod matrix;

pub use codes::{hamming_7_4, long_64800_r12, staircase_qc, wifi_648_r12};
pub use decoder::{DecodeOutcome, LLR_CLAMP};
pub use matrix::ParityCheckMatrix;

use encoder::Encoder;

/// Default belief-propagation iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum LdpcError {
    #[error("alist line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("invalid parity-check matrix: {0}")]
    Invalid(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite LLR at position {0}")]
    NonFiniteLlr(usize),
    #[error("unknown builtin code {0:?}")]
    UnknownCode(String),
}

pub type Result<T> = std::result::Result<T, LdpcError>;

/// Per-bit log-likelihood ratios, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        match values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(LdpcError::NonFiniteLlr(i)),
            None => Ok(LlrVector(values)),
        }
    }

    /// Saturated LLRs for a known word: `+mag` for 0 bits, `-mag` for 1 bits.
    pub fn from_bits(bits: &[u8], mag: f64) -> Self {
        LlrVector(bits.iter().map(|&b| if b & 1 == 0 { mag } else { -mag }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.0.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

/// A codeword together with the information bits it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub bits: Vec<u8>,
    pub info_bits: Vec<u8>,
}

/// A parity-check matrix with its precomputed systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    encoder: Encoder,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix) -> Self {
        let encoder = Encoder::new(&h);
        let code = LdpcCode { h, encoder };
        if code.is_rate_adjusted() {
            log::warn!(
                "parity-check matrix is rank deficient (rank {} of {} rows); using rate {:.4}",
                code.rank(),
                code.h.rows(),
                code.rate()
            );
        }
        code
    }

    /// Looks up a builtin code by id.
    pub fn builtin(id: &str) -> Result<Self> {
        let h = match id {
            "hamming-7-4" => hamming_7_4(),
            "wifi-648-r12" => wifi_648_r12(),
            "qc-64800-r12" => long_64800_r12(),
            other => return Err(LdpcError::UnknownCode(other.to_string())),
        };
        Ok(Self::new(h))
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        ParityCheckMatrix::from_alist(text).map(Self::new)
    }

    pub fn h(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Codeword length in bits.
    pub fn len(&self) -> usize {
        self.h.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn info_len(&self) -> usize {
        self.encoder.info_len()
    }

    /// GF(2) rank of `H`.
    pub fn rank(&self) -> usize {
        self.encoder.rank(&self.h)
    }

    /// True when `H` has dependent rows and the information length was
    /// raised to `cols - rank`.
    pub fn is_rate_adjusted(&self) -> bool {
        self.rank() < self.h.rows()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.len() as f64
    }

    /// Codeword positions holding the information bits, in info order.
    pub fn info_positions(&self) -> Vec<usize> {
        self.encoder.info_positions()
    }

    pub fn encode(&self, info_bits: &[u8]) -> Result<Codeword> {
        let bits = self.encoder.encode(&self.h, info_bits)?;
        Ok(Codeword {
            bits,
            info_bits: info_bits.iter().map(|b| b & 1).collect(),
        })
    }

    /// Reads the information bits back out of a full codeword.
    pub fn extract_info(&self, bits: &[u8]) -> Vec<u8> {
        self.info_positions().into_iter().map(|p| bits[p]).collect()
    }

    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        self.h.syndrome(bits)
    }

    /// Sum-product decoding with early termination on a zero syndrome.
    pub fn decode_bp(&self, llrs: &LlrVector, max_iters: usize) -> Result<DecodeOutcome> {
        if llrs.len() != self.len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.len(),
                got: llrs.len(),
            });
        }
        Ok(decoder::decode_sum_product(&self.h, llrs, max_iters.max(1)))
    }
}

#[cfg(test)]
mod tests;
