//! Faster-than-Nyquist AWGN channel with optional one-bit quantization.
//!
//! Within one block of `G·N` samples per rail the matched-filter output is
//! `y = sqrt(rho) · G_isi · e + z`, where `G_isi` is the Toeplitz matrix of
//! pulse autocorrelations at lags `m·T/G` and `z` has covariance
//! `sigma² · G_isi`. There is no interference across block boundaries.
//! In-phase and quadrature rails see the same operator and independent,
//! identically correlated noise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid channel parameter: {0}")]
    BadParam(String),
    #[error("noise covariance factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

/// Lowest Es/N0 accepted by [`es_n0_to_sigma`].
pub const MIN_ES_N0_DB: f64 = -40.0;

/// Diagonal loading applied to `G_isi` before the Cholesky factorization.
pub const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    RootRaisedCosine,
    Rectangular,
}

/// Transmit pulse `h(t)`; the receiver uses the matched filter `h(-t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Roll-off factor (root-raised-cosine only).
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    /// Truncation span in symbol periods, used by time-domain checks.
    #[serde(default = "default_span")]
    pub span: usize,
    /// Samples per symbol period for numeric autocorrelation.
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
}

fn default_rolloff() -> f64 {
    0.3
}
fn default_span() -> usize {
    16
}
fn default_oversampling() -> usize {
    64
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec {
            kind: PulseKind::RootRaisedCosine,
            rolloff: default_rolloff(),
            span: default_span(),
            oversampling: default_oversampling(),
        }
    }
}

impl PulseSpec {
    pub fn rectangular() -> Self {
        PulseSpec {
            kind: PulseKind::Rectangular,
            ..Self::default()
        }
    }

    pub fn root_raised_cosine(rolloff: f64) -> Self {
        PulseSpec {
            rolloff,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == PulseKind::RootRaisedCosine && !(0.0..=1.0).contains(&self.rolloff) {
            return Err(ChannelError::BadParam(format!(
                "rolloff {} outside [0, 1]",
                self.rolloff
            )));
        }
        Ok(())
    }

    /// Autocorrelation `∫h(τ)h(τ - t)dτ` at `t` symbol periods, normalized
    /// to 1 at `t = 0`.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        match self.kind {
            PulseKind::Rectangular => (1.0 - t.abs()).max(0.0),
            PulseKind::RootRaisedCosine => raised_cosine(t, self.rolloff),
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Raised-cosine pulse at `t` symbol periods.
fn raised_cosine(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    // Exact zero crossings at nonzero integer multiples of T.
    if t.fract() == 0.0 {
        return 0.0;
    }
    let x = 2.0 * beta * t;
    if beta > 0.0 && (x.abs() - 1.0).abs() < 1e-12 {
        return std::f64::consts::FRAC_PI_4 * sinc(1.0 / (2.0 * beta));
    }
    sinc(t) * (std::f64::consts::PI * beta * t).cos() / (1.0 - x * x)
}

/// `[g[0], …, g[length-1]]` with `g[m]` the pulse autocorrelation at lag
/// `m·T/G`.
pub fn pulse_autocorr(pulse: &PulseSpec, g: usize, length: usize) -> Result<Vec<f64>> {
    pulse.validate()?;
    if g == 0 || length == 0 {
        return Err(ChannelError::BadParam("G and length must be at least 1".into()));
    }
    Ok((0..length)
        .map(|m| {
            if m % g == 0 {
                // Both supported pulses are Nyquist: exactly 1 at 0, 0 at kT.
                f64::from(u8::from(m == 0))
            } else {
                pulse.autocorrelation(m as f64 / g as f64)
            }
        })
        .collect())
}

/// Symmetric Toeplitz ISI operator `G_isi` for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiOperator {
    first_row: Vec<f64>,
}

impl IsiOperator {
    pub fn from_first_row(first_row: Vec<f64>) -> Self {
        IsiOperator { first_row }
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_row[i.abs_diff(j)]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| self.first_row[i.abs_diff(j)] * v)
                    .sum()
            })
            .collect()
    }

    /// Sum over `n` of `g[k-n]²` for each output position `k`.
    pub fn row_energies(&self) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|k| (0..n).map(|j| self.entry(k, j).powi(2)).sum()).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds the `G·N`-square ISI operator.
pub fn build_isi(g: usize, n: usize, pulse: &PulseSpec) -> Result<IsiOperator> {
    if n == 0 {
        return Err(ChannelError::BadParam("block size must be at least 1".into()));
    }
    Ok(IsiOperator::from_first_row(pulse_autocorr(pulse, g, g * n)?))
}

/// Correlated Gaussian noise with covariance `variance · G_isi`.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    variance: f64,
    factor: DMatrix<f64>,
}

impl NoiseModel {
    pub fn new(isi: &IsiOperator, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(ChannelError::BadParam(format!("noise variance {variance}")));
        }
        let n = isi.size();
        let mut cov = isi.matrix();
        for i in 0..n {
            cov[(i, i)] += CHOLESKY_JITTER;
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| ChannelError::Factorization("G_isi + jitter is not positive definite".into()))?;
        let factor = chol.l() * variance.sqrt();

        let target = isi.matrix() * variance;
        let err = (&factor * factor.transpose() - &target).norm();
        let scale = target.norm();
        if scale > 0.0 && err / scale > 1e-8 {
            return Err(ChannelError::Factorization(format!(
                "relative reconstruction error {:.3e}",
                err / scale
            )));
        }
        Ok(NoiseModel { variance, factor })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn size(&self) -> usize {
        self.factor.nrows()
    }

    /// Lower-triangular `L` with `L·Lᵀ ≈ variance · G_isi`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// One noise vector for a single rail.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.size();
        let w = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if self.variance == 0.0 {
            return vec![0.0; n];
        }
        (&self.factor * w).as_slice().to_vec()
    }
}

/// Noise variance per real dimension for a given Es/N0, with `Es = 1`:
/// `sigma² = rho / (2 · 10^(Es/N0 / 10))`.
pub fn es_n0_to_sigma(es_n0_db: f64, rho: f64) -> Result<f64> {
    if !es_n0_db.is_finite() || es_n0_db < MIN_ES_N0_DB {
        return Err(ChannelError::BadParam(format!(
            "Es/N0 {es_n0_db} dB below {MIN_ES_N0_DB} dB"
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(ChannelError::BadParam(format!("rho must be positive, got {rho}")));
    }
    Ok(rho / (2.0 * 10f64.powf(es_n0_db / 10.0)))
}

/// One-bit quantizer with `sign(0) = +1`.
pub fn quantize(y: f64) -> f64 {
    if y >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Transmit power scale.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Faster-than-Nyquist compression factor.
    pub g: usize,
    pub quantized: bool,
    #[serde(default)]
    pub pulse: PulseSpec,
}

fn default_rho() -> f64 {
    1.0
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.g == 0 {
            return Err(ChannelError::BadParam("G must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(ChannelError::BadParam(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        self.pulse.validate()
    }
}

/// Applies the channel to one block, rail by rail.
///
/// `e_i` and `e_q` must be power normalized already.
pub fn apply_channel<R: Rng + ?Sized>(
    e_i: &[f64],
    e_q: &[f64],
    cfg: &ChannelConfig,
    isi: &IsiOperator,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = isi.size();
    for rail in [e_i, e_q] {
        if rail.len() != n {
            return Err(ChannelError::LengthMismatch {
                expected: n,
                got: rail.len(),
            });
        }
    }
    if noise.size() != n {
        return Err(ChannelError::LengthMismatch {
            expected: n,
            got: noise.size(),
        });
    }
    let amp = cfg.rho.sqrt();
    let mut rail = |e: &[f64]| {
        let z = noise.sample(rng);
        isi.apply(e)
            .into_iter()
            .zip(z)
            .map(|(s, z)| {
                let y = amp * s + z;
                if cfg.quantized {
                    quantize(y)
                } else {
                    y
                }
            })
            .collect::<Vec<_>>()
    };
    let y_i = rail(e_i);
    let y_q = rail(e_q);
    Ok((y_i, y_q))
}

/// The autoencoder's non-trainable lambda layer: ISI, colored noise and the
/// quantizer for a fixed block size and operating point.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    isi: IsiOperator,
    noise: NoiseModel,
}

impl Channel {
    /// Channel for blocks of `n` symbols (`G·n` samples per rail) at the
    /// given noise variance per real dimension.
    pub fn new(cfg: ChannelConfig, n: usize, noise_var: f64) -> Result<Self> {
        Self::with_rail_len(cfg.clone(), cfg.g * n, noise_var)
    }

    /// Same as [`Channel::new`] with an explicit rail length.
    pub fn with_rail_len(cfg: ChannelConfig, rail_len: usize, noise_var: f64) -> Result<Self> {
        cfg.validate()?;
        if rail_len == 0 {
            return Err(ChannelError::BadParam("rail length must be at least 1".into()));
        }
        let isi = IsiOperator::from_first_row(pulse_autocorr(&cfg.pulse, cfg.g, rail_len)?);
        let noise = NoiseModel::new(&isi, noise_var)?;
        Ok(Channel { cfg, isi, noise })
    }

    pub fn from_es_n0(cfg: ChannelConfig, n: usize, es_n0_db: f64) -> Result<Self> {
        let var = es_n0_to_sigma(es_n0_db, cfg.rho)?;
        Self::new(cfg, n, var)
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    pub fn isi(&self) -> &IsiOperator {
        &self.isi
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Samples per rail.
    pub fn rail_len(&self) -> usize {
        self.isi.size()
    }

    /// Transmits an interleaved `(i0, q0, i1, q1, …)` block of length
    /// `2 · rail_len` and returns the received block in the same layout.
    pub fn transmit<R: Rng + ?Sized>(&self, e: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if e.len() != 2 * self.rail_len() {
            return Err(ChannelError::LengthMismatch {
                expected: 2 * self.rail_len(),
                got: e.len(),
            });
        }
        let e_i: Vec<f64> = e.iter().step_by(2).copied().collect();
        let e_q: Vec<f64> = e.iter().skip(1).step_by(2).copied().collect();
        let (y_i, y_q) = apply_channel(&e_i, &e_q, &self.cfg, &self.isi, &self.noise, rng)?;
        Ok(y_i.into_iter().zip(y_q).flat_map(|(a, b)| [a, b]).collect())
    }
}
