//! The three transmission chains, one codeword (or window) at a time.

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use super::config::ExperimentConfig;
use super::{HarnessError, Result};
use crate::autoencoder::{
    infer_block, llr_from_residuals, train_window, AeDims, MlpParams, Optimizer, TrainReport, WindowBlock,
};
use crate::channel::{es_n0_to_sigma, quantize, Channel};
use crate::ldpc::LdpcCode;
use crate::modem::{partition_blocks, BlockPartition, Constellation};

/// Everything a chain needs at one sweep point.
pub struct PointContext<'a> {
    pub code: &'a LdpcCode,
    pub constellation: Constellation,
    pub rho: f64,
    /// Noise variance per real dimension.
    pub noise_var: f64,
    pub max_iters: usize,
}

impl<'a> PointContext<'a> {
    pub fn new(code: &'a LdpcCode, cfg: &ExperimentConfig, es_n0_db: f64) -> Result<Self> {
        Ok(PointContext {
            code,
            constellation: Constellation::new(cfg.modulation)?,
            rho: cfg.channel.rho,
            noise_var: es_n0_to_sigma(es_n0_db, cfg.channel.rho)?,
            max_iters: cfg.decoder.max_iters,
        })
    }
}

pub fn random_bits(len: usize, rng: &mut dyn RngCore) -> Vec<u8> {
    (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
}

/// Symbols for a codeword, zero padded to a whole number of symbols.
fn modulate(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>> {
    let m = c.bits_per_symbol();
    let mut padded = bits.to_vec();
    padded.resize(bits.len().div_ceil(m) * m, 0);
    Ok(c.map(&padded)?)
}

fn soft_decode(llrs: Vec<f64>, ctx: &PointContext) -> Result<Vec<u8>> {
    let mut llrs = llrs;
    llrs.truncate(ctx.code.len());
    let llrs = crate::ldpc::LlrVector::new(llrs)?;
    let out = ctx.code.decode_bp(&llrs, ctx.max_iters)?;
    Ok(ctx.code.extract_info(&out.bits))
}

/// Orthogonal (G = 1) AWGN transmission: the ISI operator is the identity,
/// so each sample is `√ρ·s + σ·w` independently.
fn awgn(symbols: &[Complex64], ctx: &PointContext, quantized: bool, rng: &mut dyn RngCore) -> Vec<Complex64> {
    let amp = ctx.rho.sqrt();
    let sd = ctx.noise_var.sqrt();
    let mut rail = |x: f64| {
        let n: f64 = StandardNormal.sample(rng);
        let y = amp * x + sd * n;
        if quantized {
            quantize(y)
        } else {
            y
        }
    };
    symbols.iter().map(|s| Complex64::new(rail(s.re), rail(s.im))).collect()
}

/// Unquantized baseline: exact soft demapping of `y / √ρ` with noise
/// variance `σ² / ρ`. Returns the decoded info bits.
pub fn chain_unquantized(info: &[u8], ctx: &PointContext, rng: &mut dyn RngCore) -> Result<Vec<u8>> {
    let cw = ctx.code.encode(info)?;
    let y = awgn(&modulate(&cw.bits, &ctx.constellation)?, ctx, false, rng);
    let scale = ctx.rho.sqrt().recip();
    let y: Vec<Complex64> = y.iter().map(|v| v * scale).collect();
    let llrs = ctx.constellation.demap_llr(&y, ctx.noise_var / ctx.rho)?;
    soft_decode(llrs.into_inner(), ctx)
}

/// One-bit baseline: the quantized samples `(±1 ± j)/√2` are fed to the
/// soft demapper as if they were received constellation values, with the
/// channel noise variance. The mismatch is deliberate; no better receiver
/// is defined for this baseline.
pub fn chain_onebit_baseline(info: &[u8], ctx: &PointContext, rng: &mut dyn RngCore) -> Result<Vec<u8>> {
    let cw = ctx.code.encode(info)?;
    let q = awgn(&modulate(&cw.bits, &ctx.constellation)?, ctx, true, rng);
    let q: Vec<Complex64> = q.iter().map(|v| v * std::f64::consts::FRAC_1_SQRT_2).collect();
    let llrs = ctx.constellation.demap_llr(&q, ctx.noise_var / ctx.rho)?;
    soft_decode(llrs.into_inner(), ctx)
}

/// Stateful autoencoder receiver; parameters and optimizer moments carry
/// over from one window to the next.
pub struct AeChain {
    pub params: MlpParams,
    optimizer: Optimizer,
    channel: Channel,
    n: usize,
    train: crate::autoencoder::TrainConfig,
    windows: usize,
}

/// Per-window output.
pub struct WindowOutcome {
    pub decoded: Vec<Vec<u8>>,
    pub report: TrainReport,
}

impl AeChain {
    pub fn new(cfg: &ExperimentConfig, es_n0_db: f64, seed: u64) -> Result<Self> {
        let ae = &cfg.autoencoder;
        let g = cfg.channel.g;
        let channel = Channel::from_es_n0(cfg.channel.to_config(g, cfg.channel.quantized), ae.n, es_n0_db)?;
        let params = MlpParams::init(AeDims::new(ae.n, g, ae.k), ae.sigma_theta2, ae.sigma_b2, seed)?;
        let optimizer = Optimizer::new(cfg.train.optimizer, cfg.train.learning_rate, &params);
        Ok(AeChain {
            params,
            optimizer,
            channel,
            n: ae.n,
            train: cfg.train.clone(),
            windows: 0,
        })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    /// Blocks of one codeword, its partition, and the real layout of each
    /// block.
    fn blocks(&self, bits: &[u8], c: &Constellation) -> Result<(BlockPartition, Vec<Vec<f64>>)> {
        let part = partition_blocks(&modulate(bits, c)?, self.n)?;
        let reals = part.blocks.iter().map(|b| b.to_real()).collect();
        Ok((part, reals))
    }

    /// Trains on the window's codewords, then decodes each of them.
    pub fn run_window(
        &mut self,
        infos: &[Vec<u8>],
        ctx: &PointContext,
        rng: &mut dyn RngCore,
    ) -> Result<WindowOutcome> {
        let index = self.windows;
        self.windows += 1;
        let mut parts = Vec::with_capacity(infos.len());
        let mut train_blocks = Vec::new();
        for info in infos {
            let cw = ctx.code.encode(info)?;
            let (part, reals) = self.blocks(&cw.bits, &ctx.constellation)?;
            let used = match self.train.pilot_fraction {
                Some(f) => ((f * reals.len() as f64).ceil() as usize).clamp(1, reals.len()),
                None => reals.len(),
            };
            for (b, d) in reals.iter().enumerate().take(used) {
                train_blocks.push(WindowBlock {
                    d: d.clone(),
                    mask: part.real_mask(b),
                });
            }
            parts.push((part, reals));
        }
        let report = train_window(
            &mut self.params,
            &train_blocks,
            &self.train,
            &self.channel,
            &mut self.optimizer,
            rng,
        )
        .map_err(|source| HarnessError::Window { index, source })?;

        let mut decoded = Vec::with_capacity(infos.len());
        for (part, reals) in &parts {
            let d_hat: Vec<Vec<f64>> = reals
                .iter()
                .map(|d| infer_block(d, &self.params, &self.channel, rng).d_hat)
                .collect();
            let llrs = llr_from_residuals(&d_hat, part, report.residual_var, &ctx.constellation)?;
            decoded.push(soft_decode(llrs.into_inner(), ctx)?);
        }
        Ok(WindowOutcome { decoded, report })
    }

    /// Residuals `d̂ − d` of every valid coordinate of the given codewords
    /// under fresh channel draws, grouped by coordinate index in the block.
    pub fn residuals_by_coordinate(
        &self,
        infos: &[Vec<u8>],
        ctx: &PointContext,
        realizations: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Vec<f64>>> {
        let mut by_coord = vec![Vec::new(); 2 * self.n];
        for _ in 0..realizations {
            for info in infos {
                let cw = ctx.code.encode(info)?;
                let (part, reals) = self.blocks(&cw.bits, &ctx.constellation)?;
                for (b, d) in reals.iter().enumerate() {
                    let res = infer_block(d, &self.params, &self.channel, rng).residual;
                    for (i, (v, ok)) in res.iter().zip(part.real_mask(b)).enumerate() {
                        if ok {
                            by_coord[i].push(*v);
                        }
                    }
                }
            }
        }
        Ok(by_coord)
    }
}
