//! Gray-mapped square QAM, exact log-domain soft demapping and
//! partitioning of a codeword's symbols into fixed-size blocks.

use num_complex::Complex64;

use crate::ldpc::{LlrVector, LLR_CLAMP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModemError {
    #[error("unsupported modulation order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),
    #[error("bit count {len} is not a multiple of {per_symbol}")]
    LengthNotDivisible { len: usize, per_symbol: usize },
    #[error("noise variance must be positive and finite, got {0}")]
    BadNoiseVar(f64),
    #[error("block size must be at least 1")]
    ZeroBlockSize,
}

pub type Result<T> = std::result::Result<T, ModemError>;

/// Square QAM constellation with per-axis Gray labels and unit average energy.
///
/// A label's first `log2(M)/2` bits (MSB first) select the in-phase level,
/// the remaining bits the quadrature level. Level index 0 is the most
/// positive amplitude, so an all-zero label sits in the first quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

fn gray(j: usize) -> usize {
    j ^ (j >> 1)
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        let bits_per_symbol = match order {
            4 => 2,
            16 => 4,
            64 => 6,
            other => return Err(ModemError::UnsupportedOrder(other)),
        };
        let per_axis = bits_per_symbol / 2;
        let side = 1usize << per_axis;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |j: usize| ((side - 1) as f64 - 2.0 * j as f64) / scale;
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        for ji in 0..side {
            for jq in 0..side {
                let label = (gray(ji) << per_axis) | gray(jq);
                points[label] = Complex64::new(level(ji), level(jq));
            }
        }
        Ok(Constellation {
            order,
            bits_per_symbol,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit `k` (0 = first transmitted) of `label`.
    pub fn label_bit(&self, label: usize, k: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - k)) & 1) as u8
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let m = self.bits_per_symbol;
        if !bits.len().is_multiple_of(m) {
            return Err(ModemError::LengthNotDivisible {
                len: bits.len(),
                per_symbol: m,
            });
        }
        Ok(bits
            .chunks_exact(m)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
                self.points[label]
            })
            .collect())
    }

    /// Exact per-bit LLRs (log-sum-exp over the constellation partition)
    /// under circular Gaussian noise with variance `noise_var` per real
    /// dimension. Results are clamped to the decoder's message range.
    pub fn demap_llr(&self, received: &[Complex64], noise_var: f64) -> Result<LlrVector> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(ModemError::BadNoiseVar(noise_var));
        }
        let m = self.bits_per_symbol;
        let inv = 1.0 / (2.0 * noise_var);
        let mut out = Vec::with_capacity(received.len() * m);
        let mut metrics = vec![0.0; self.order];
        for r in received {
            for (metric, p) in metrics.iter_mut().zip(&self.points) {
                *metric = -(r - p).norm_sqr() * inv;
            }
            for k in 0..m {
                let (mut zero, mut one) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (label, &metric) in metrics.iter().enumerate() {
                    if self.label_bit(label, k) == 0 {
                        zero = log_add(zero, metric);
                    } else {
                        one = log_add(one, metric);
                    }
                }
                out.push((zero - one).clamp(-LLR_CLAMP, LLR_CLAMP));
            }
        }
        Ok(LlrVector::new(out).expect("clamped LLRs are finite"))
    }

    /// Nearest-point hard decisions, as bits.
    pub fn hard_demap(&self, received: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(received.len() * self.bits_per_symbol);
        for r in received {
            let label = (0..self.order)
                .min_by(|&a, &b| {
                    (r - self.points[a])
                        .norm_sqr()
                        .total_cmp(&(r - self.points[b]).norm_sqr())
                })
                .expect("constellation is nonempty");
            bits.extend((0..self.bits_per_symbol).map(|k| self.label_bit(label, k)));
        }
        bits
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Gray-mapped QAM modulation of `bits`.
pub fn map_qam(bits: &[u8], order: usize) -> Result<Vec<Complex64>> {
    Constellation::new(order)?.map(bits)
}

/// Soft demapping; see [`Constellation::demap_llr`].
pub fn demap_llr(received: &[Complex64], order: usize, noise_var: f64) -> Result<LlrVector> {
    Constellation::new(order)?.demap_llr(received, noise_var)
}

/// One autoencoder input block of `N` coded symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub index: usize,
    pub symbols: Vec<Complex64>,
}

impl SymbolBlock {
    /// Interleaved real representation `(re0, im0, re1, im1, ...)`.
    pub fn to_real(&self) -> Vec<f64> {
        complex_to_real(&self.symbols)
    }
}

pub fn complex_to_real(symbols: &[Complex64]) -> Vec<f64> {
    symbols.iter().flat_map(|s| [s.re, s.im]).collect()
}

pub fn real_to_complex(values: &[f64]) -> Vec<Complex64> {
    values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// A codeword's symbols split into equal blocks, the last zero padded.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub blocks: Vec<SymbolBlock>,
    pub block_size: usize,
    /// Zero symbols appended to the final block.
    pub padding: usize,
}

impl BlockPartition {
    /// Number of real symbols before padding.
    pub fn symbol_count(&self) -> usize {
        self.blocks.len() * self.block_size - self.padding
    }

    /// Per-block validity mask over the interleaved real coordinates:
    /// `true` for data, `false` for padding.
    pub fn real_mask(&self, block: usize) -> Vec<bool> {
        let valid = if block + 1 == self.blocks.len() {
            self.block_size - self.padding
        } else {
            self.block_size
        };
        (0..2 * self.block_size).map(|i| i / 2 < valid).collect()
    }

    /// Concatenates per-block vectors and drops the padded tail.
    pub fn reassemble(&self, blocks: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = blocks.iter().flatten().copied().collect();
        out.truncate(self.symbol_count());
        out
    }
}

/// Splits `symbols` into `ceil(len / n)` blocks of `n`, zero padding the last.
pub fn partition_blocks(symbols: &[Complex64], n: usize) -> Result<BlockPartition> {
    if n == 0 {
        return Err(ModemError::ZeroBlockSize);
    }
    let count = symbols.len().div_ceil(n);
    let padding = count * n - symbols.len();
    let blocks = (0..count)
        .map(|i| {
            let mut chunk = symbols[i * n..symbols.len().min((i + 1) * n)].to_vec();
            chunk.resize(n, Complex64::new(0.0, 0.0));
            SymbolBlock {
                index: i,
                symbols: chunk,
            }
        })
        .collect();
    Ok(BlockPartition {
        blocks,
        block_size: n,
        padding,
    })
}
