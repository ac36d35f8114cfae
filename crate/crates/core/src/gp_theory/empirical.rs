//! Monte-Carlo estimate of the output covariance of randomly initialized
//! finite-width autoencoders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{autoencoder_stack, compose_kernel, ChannelKernel, GpError, KernelState, Result};
use crate::autoencoder::{decode, encode, AeDims, MlpParams};
use crate::channel::{Channel, ChannelConfig};

/// Base architecture; width multiplier `m` scales the rail to `G·N·m` and
/// the hidden layers to `K·N·m` while the input stays `2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProbe {
    pub n: usize,
    pub g: usize,
    pub k: usize,
    pub sigma_theta2: f64,
    pub sigma_b2: f64,
    pub channel: ChannelConfig,
    /// Channel noise variance per real dimension.
    pub noise_var: f64,
}

impl KernelProbe {
    pub fn dims(&self, width_multiplier: usize) -> AeDims {
        AeDims {
            input: 2 * self.n,
            rail: self.g * self.n * width_multiplier,
            hidden: self.k * self.n * width_multiplier,
        }
    }

    fn channel(&self, width_multiplier: usize) -> Result<Channel> {
        let mut cfg = self.channel.clone();
        cfg.g = self.g;
        Ok(Channel::with_rail_len(
            cfg,
            self.g * self.n * width_multiplier,
            self.noise_var,
        )?)
    }

    /// Infinite-width covariance of the output for the given width's
    /// channel (the row energies depend on the rail length).
    pub fn analytic(&self, d: &[f64], d_hat: &[f64], width_multiplier: usize) -> Result<KernelState> {
        let ch = self.channel(width_multiplier)?;
        let stack = autoencoder_stack(ChannelKernel::from_channel(&ch, true), self.channel.quantized);
        compose_kernel(
            KernelState::from_inputs(d, d_hat)?,
            &stack,
            self.sigma_theta2,
            self.sigma_b2,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub width_multiplier: usize,
    pub nets: usize,
    pub empirical: KernelState,
    pub analytic: KernelState,
    /// Relative error of `(k_zz, k_zhz, k_hzhz)`.
    pub rel_err: [f64; 3],
    pub max_rel_err: f64,
    /// 95% bootstrap interval of `max_rel_err`, resampling nets.
    pub max_rel_err_ci: [f64; 2],
}

const BOOTSTRAP_RESAMPLES: usize = 400;

fn net_seed(seed: u64, width: usize, net: usize) -> u64 {
    let mut z = seed ^ ((width as u64) << 40) ^ net as u64;
    // splitmix64 finalizer, to decorrelate neighbouring indices
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-net output second moments, averaged over the output units.
fn one_net(probe: &KernelProbe, ch: &Channel, dims: AeDims, d: &[f64], d_hat: &[f64], seed: u64) -> Result<[f64; 3]> {
    let p = MlpParams::init(dims, probe.sigma_theta2, probe.sigma_b2, seed)?;
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);
    let mut shared = noise.clone();
    let r = ch.transmit(&encode(d, &p).e, &mut noise)?;
    let r_hat = ch.transmit(&encode(d_hat, &p).e, &mut shared)?;
    let y = decode(&r, &p);
    let y_hat = decode(&r_hat, &p);
    let l = y.len() as f64;
    let mut m = [0.0; 3];
    for (a, b) in y.iter().zip(&y_hat) {
        m[0] += a * a;
        m[1] += a * b;
        m[2] += b * b;
    }
    Ok(m.map(|v| v / l))
}

fn rel_errors(est: &[f64; 3], ana: &KernelState) -> [f64; 3] {
    let a = [ana.k_zz, ana.k_zhz, ana.k_hzhz];
    [0, 1, 2].map(|i| ((est[i] - a[i]) / a[i]).abs())
}

fn mean3(rows: &[[f64; 3]], pick: impl Iterator<Item = usize>) -> [f64; 3] {
    let mut s = [0.0; 3];
    let mut n = 0usize;
    for i in pick {
        for j in 0..3 {
            s[j] += rows[i][j];
        }
        n += 1;
    }
    s.map(|v| v / n as f64)
}

/// Estimates the output covariance of the pair `(d, d̂)` for each width
/// multiplier (ascending) from `nets` independent random networks, with a
/// shared channel noise draw for both inputs of a net.
pub fn empirical_kernel(
    probe: &KernelProbe,
    d: &[f64],
    d_hat: &[f64],
    width_multipliers: &[usize],
    nets: usize,
    seed: u64,
) -> Result<Vec<EmpiricalRow>> {
    if d.len() != 2 * probe.n || d_hat.len() != 2 * probe.n {
        return Err(GpError::DimensionMismatch(format!(
            "input pair lengths {} and {} (expected {})",
            d.len(),
            d_hat.len(),
            2 * probe.n
        )));
    }
    if width_multipliers.is_empty() || width_multipliers.windows(2).any(|w| w[0] >= w[1]) || width_multipliers[0] == 0 {
        return Err(GpError::BadParam(
            "width multipliers must be positive and ascending".into(),
        ));
    }
    if nets < 2 {
        return Err(GpError::BadParam("need at least two nets".into()));
    }
    let mut rows = Vec::with_capacity(width_multipliers.len());
    for &m in width_multipliers {
        let ch = probe.channel(m)?;
        let dims = probe.dims(m);
        let per_net = (0..nets)
            .into_par_iter()
            .map(|i| one_net(probe, &ch, dims, d, d_hat, net_seed(seed, m, i)))
            .collect::<Result<Vec<_>>>()?;
        let analytic = probe.analytic(d, d_hat, m)?;
        let est = mean3(&per_net, 0..nets);
        let rel_err = rel_errors(&est, &analytic);
        let max_rel_err = rel_err.iter().copied().fold(0.0, f64::max);

        let mut rng = ChaCha8Rng::seed_from_u64(net_seed(seed, m, usize::MAX));
        let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let idx: Vec<usize> = (0..nets).map(|_| rng.random_range(0..nets)).collect();
                let e = mean3(&per_net, idx.into_iter());
                rel_errors(&e, &analytic).iter().copied().fold(0.0, f64::max)
            })
            .collect();
        boot.sort_by(f64::total_cmp);
        let q = |f: f64| boot[((f * (BOOTSTRAP_RESAMPLES - 1) as f64).round()) as usize];

        rows.push(EmpiricalRow {
            width_multiplier: m,
            nets,
            empirical: KernelState {
                k_zz: est[0],
                k_zhz: est[1],
                k_hzhz: est[2],
            },
            analytic,
            rel_err,
            max_rel_err,
            max_rel_err_ci: [q(0.025), q(0.975)],
        });
    }
    Ok(rows)
}
