//! Infinite-width Gaussian-process view of the autoencoder.
//!
//! At initialization every pre-activation of a wide layer is a zero-mean
//! Gaussian process over inputs. For a pair of inputs `(d, d̂)` its 2×2
//! covariance evolves layer by layer; [`compose_kernel`] folds that map over
//! the autoencoder stack and [`empirical_kernel`] estimates the same
//! quantity from randomly initialized networks of finite width.

mod drift;
mod empirical;
mod normality;
pub mod quadrature;
pub mod report;

pub use report::{quadrature_grid, KernelReport, PairReport, QuadratureCheck, ResidualReport};

pub use drift::{linearization_drift, DriftReport};
pub use empirical::{empirical_kernel, EmpiricalRow, KernelProbe};
pub use normality::{normality_test, NormalityReport, MIN_NORMALITY_SAMPLES};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::channel::Channel;

#[derive(Debug, thiserror::Error)]
pub enum GpError {
    #[error("kernel state is not positive semidefinite: [[{0}, {1}], [{1}, {2}]]")]
    NotPsd(f64, f64, f64),
    #[error("empty layer specification")]
    EmptySpec,
    #[error("normality test needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Autoencoder(#[from] crate::autoencoder::AeError),
}

pub type Result<T> = std::result::Result<T, GpError>;

/// Covariance of a pre-activation pair `(z, ẑ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelState {
    pub k_zz: f64,
    pub k_zhz: f64,
    pub k_hzhz: f64,
}

const PSD_TOL: f64 = 1e-12;

impl KernelState {
    pub fn new(k_zz: f64, k_zhz: f64, k_hzhz: f64) -> Result<Self> {
        let s = KernelState { k_zz, k_zhz, k_hzhz };
        s.check()?;
        Ok(s)
    }

    /// Input gram `(d·d / L, d·d̂ / L, d̂·d̂ / L)`, the covariance produced by
    /// a first layer with weight variance `1 / L`.
    pub fn from_inputs(d: &[f64], d_hat: &[f64]) -> Result<Self> {
        if d.len() != d_hat.len() || d.is_empty() {
            return Err(GpError::DimensionMismatch(format!(
                "input pair lengths {} and {}",
                d.len(),
                d_hat.len()
            )));
        }
        let l = d.len() as f64;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / l;
        Self::new(dot(d, d), dot(d, d_hat), dot(d_hat, d_hat))
    }

    pub fn check(&self) -> Result<()> {
        let KernelState {
            k_zz: a,
            k_zhz: b,
            k_hzhz: c,
        } = *self;
        let finite = a.is_finite() && b.is_finite() && c.is_finite();
        let scale = a.abs().max(c.abs()).max(1.0);
        if !finite
            || a < -PSD_TOL * scale
            || c < -PSD_TOL * scale
            || b * b > a.max(0.0) * c.max(0.0) + PSD_TOL * scale * scale
        {
            return Err(GpError::NotPsd(a, b, c));
        }
        Ok(())
    }

    /// Correlation coefficient, clamped to `[-1, 1]`; `None` when either
    /// variance is zero.
    pub fn correlation(&self) -> Option<f64> {
        if self.k_zz <= 0.0 || self.k_hzhz <= 0.0 {
            return None;
        }
        Some((self.k_zhz / (self.k_zz * self.k_hzhz).sqrt()).clamp(-1.0, 1.0))
    }

    fn affine(self, sigma_theta2: f64, sigma_b2: f64) -> Self {
        KernelState {
            k_zz: sigma_b2 + sigma_theta2 * self.k_zz,
            k_zhz: sigma_b2 + sigma_theta2 * self.k_zhz,
            k_hzhz: sigma_b2 + sigma_theta2 * self.k_hzhz,
        }
    }

    fn mean(states: &[KernelState]) -> Self {
        let n = states.len() as f64;
        let sum = |f: fn(&KernelState) -> f64| states.iter().map(f).sum::<f64>() / n;
        KernelState {
            k_zz: sum(|s| s.k_zz),
            k_zhz: sum(|s| s.k_zhz),
            k_hzhz: sum(|s| s.k_hzhz),
        }
    }
}

/// Pointwise nonlinearity applied before an affine layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Linear,
    Relu,
    Sign,
    /// `tanh(x / T)`, a smooth stand-in for the quantizer; evaluated by
    /// quadrature.
    TemperedSign {
        temperature: f64,
    },
}

/// `E[φ(z) φ(ẑ)]` (and the two diagonal moments) for `(z, ẑ) ~ N(0, state)`.
pub fn activation_moments(state: &KernelState, act: Activation) -> Result<KernelState> {
    state.check()?;
    let KernelState { k_zz: a, k_hzhz: c, .. } = *state;
    let (a, c) = (a.max(0.0), c.max(0.0));
    Ok(match act {
        Activation::Linear => *state,
        Activation::Relu => {
            let off = match state.correlation() {
                None => 0.0,
                Some(rho) => {
                    let theta = rho.acos();
                    (a * c).sqrt() * (theta.sin() + (PI - theta) * rho) / (2.0 * PI)
                }
            };
            KernelState {
                k_zz: a / 2.0,
                k_zhz: off,
                k_hzhz: c / 2.0,
            }
        }
        Activation::Sign => {
            // sign(0) = +1, so a degenerate unit is the constant 1.
            let off = match (a > 0.0, c > 0.0) {
                (true, true) => 2.0 / PI * state.correlation().unwrap_or(0.0).asin(),
                (false, false) => 1.0,
                _ => 0.0,
            };
            KernelState {
                k_zz: 1.0,
                k_zhz: off,
                k_hzhz: 1.0,
            }
        }
        Activation::TemperedSign { temperature } => {
            if !(temperature > 0.0 && temperature.is_finite()) {
                return Err(GpError::BadParam(format!(
                    "temperature must be positive, got {temperature}"
                )));
            }
            quadrature::tempered_sign_moments(state, temperature)
        }
    })
}

/// One layer of the recursion: nonlinearity, then a Gaussian affine layer
/// with weight variance `σ_θ² / fan_in` and bias variance `σ_b²`.
pub fn kernel_step(state: KernelState, act: Activation, sigma_theta2: f64, sigma_b2: f64) -> Result<KernelState> {
    check_variances(sigma_theta2, sigma_b2)?;
    Ok(activation_moments(&state, act)?.affine(sigma_theta2, sigma_b2))
}

fn check_variances(sigma_theta2: f64, sigma_b2: f64) -> Result<()> {
    for (name, v) in [("sigma_theta2", sigma_theta2), ("sigma_b2", sigma_b2)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(GpError::BadParam(format!("{name} must be >= 0, got {v}")));
        }
    }
    Ok(())
}

/// Covariance map of the channel lambda layer.
///
/// The encoder output is power normalized, so each transmitted sample has
/// unit variance and the pair correlation `c` of the previous layer. After
/// ISI, output sample `k` carries signal covariance `ρ·E_k·[[1, c], [c, 1]]`
/// with `E_k = Σ_n g[k−n]²`, plus noise of variance `σ_z²` that is shared
/// between the two inputs when they see the same noise draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelKernel {
    pub rho: f64,
    pub noise_var: f64,
    pub row_energies: Vec<f64>,
    pub shared_noise: bool,
}

impl ChannelKernel {
    pub fn from_channel(ch: &Channel, shared_noise: bool) -> Self {
        ChannelKernel {
            rho: ch.config().rho,
            noise_var: ch.noise().variance(),
            row_energies: ch.isi().row_energies(),
            shared_noise,
        }
    }

    fn unit_states(&self, prev: &KernelState) -> Vec<KernelState> {
        let c = match prev.correlation() {
            Some(c) => c,
            None => f64::from(u8::from(prev.k_zz <= 0.0 && prev.k_hzhz <= 0.0)),
        };
        let cross_noise = if self.shared_noise { self.noise_var } else { 0.0 };
        self.row_energies
            .iter()
            .map(|&e| KernelState {
                k_zz: self.rho * e + self.noise_var,
                k_zhz: self.rho * e * c + cross_noise,
                k_hzhz: self.rho * e + self.noise_var,
            })
            .collect()
    }
}

/// One entry of a layer stack for [`compose_kernel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerSpec {
    /// Nonlinearity followed by a Gaussian affine layer.
    Dense(Activation),
    /// The channel lambda layer; its units are not identically distributed,
    /// so the following layer averages over them.
    Channel(ChannelKernel),
}

/// Folds the layer recursion over `layers`, starting from the input gram.
pub fn compose_kernel(
    input_gram: KernelState,
    layers: &[LayerSpec],
    sigma_theta2: f64,
    sigma_b2: f64,
) -> Result<KernelState> {
    if layers.is_empty() {
        return Err(GpError::EmptySpec);
    }
    check_variances(sigma_theta2, sigma_b2)?;
    input_gram.check()?;
    let mut mixture = vec![input_gram];
    for layer in layers {
        mixture = match layer {
            LayerSpec::Dense(act) => {
                let moments = mixture
                    .iter()
                    .map(|s| activation_moments(s, *act))
                    .collect::<Result<Vec<_>>>()?;
                vec![KernelState::mean(&moments).affine(sigma_theta2, sigma_b2)]
            }
            LayerSpec::Channel(ch) => {
                if ch.row_energies.is_empty() {
                    return Err(GpError::BadParam("channel kernel has no units".into()));
                }
                mixture.iter().flat_map(|s| ch.unit_states(s)).collect()
            }
        };
    }
    Ok(KernelState::mean(&mixture))
}

/// The autoencoder stack: encoder affine layer, channel, quantizer (or
/// identity without quantization) into the first decoder layer, then three
/// ReLU layers, the last of which feeds the linear output.
pub fn autoencoder_stack(channel: ChannelKernel, quantized: bool) -> Vec<LayerSpec> {
    let first = if quantized {
        Activation::Sign
    } else {
        Activation::Linear
    };
    vec![
        LayerSpec::Dense(Activation::Linear),
        LayerSpec::Channel(channel),
        LayerSpec::Dense(first),
        LayerSpec::Dense(Activation::Relu),
        LayerSpec::Dense(Activation::Relu),
        LayerSpec::Dense(Activation::Relu),
    ]
}

#[cfg(test)]
mod tests;
