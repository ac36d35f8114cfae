//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::autoencoder::TrainConfig;
use crate::channel::{ChannelConfig, PulseSpec};
use crate::ldpc::{LdpcCode, DEFAULT_MAX_ITERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    /// Orthogonal transmission (G = 1), no quantizer, exact soft demapping.
    UnquantizedBaseline,
    /// Orthogonal transmission, one-bit quantizer, LDPC decoding alone.
    OnebitBaseline,
    /// FTN + one-bit channel wrapped by the autoencoder, then LDPC.
    OnebitAe,
}

impl ChainKind {
    pub fn id(self) -> &'static str {
        match self {
            ChainKind::UnquantizedBaseline => "unquantized-baseline",
            ChainKind::OnebitBaseline => "onebit-baseline",
            ChainKind::OnebitAe => "onebit-ae",
        }
    }

    pub fn parse(id: &str) -> Option<Self> {
        [
            ChainKind::UnquantizedBaseline,
            ChainKind::OnebitBaseline,
            ChainKind::OnebitAe,
        ]
        .into_iter()
        .find(|c| c.id() == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub rho: f64,
    /// FTN factor of the autoencoder chain; the baselines always use 1.
    pub g: usize,
    /// Quantizer in the autoencoder chain (the baselines fix it by kind).
    pub quantized: bool,
    pub pulse: PulseSpec,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            rho: 1.0,
            g: 10,
            quantized: true,
            pulse: PulseSpec::default(),
        }
    }
}

impl ChannelSection {
    pub fn to_config(&self, g: usize, quantized: bool) -> ChannelConfig {
        ChannelConfig {
            rho: self.rho,
            g,
            quantized,
            pulse: self.pulse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutoencoderSection {
    /// Symbols per block.
    pub n: usize,
    /// Hidden width multiplier.
    pub k: usize,
    pub sigma_theta2: f64,
    pub sigma_b2: f64,
}

impl Default for AutoencoderSection {
    fn default() -> Self {
        AutoencoderSection {
            n: 24,
            k: 20,
            sigma_theta2: 2.0,
            sigma_b2: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSection {
    pub min_bit_errors: u64,
    pub max_codewords: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderSection {
    pub max_iters: usize,
}

impl Default for DecoderSection {
    fn default() -> Self {
        DecoderSection {
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Settings for `kernel-report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    /// Base architecture of the random networks (scaled by the width
    /// multipliers).
    pub n: usize,
    pub g: usize,
    pub k: usize,
    pub width_multipliers: Vec<usize>,
    pub nets: usize,
    /// Random 16-QAM input pairs.
    pub pairs: usize,
    pub es_n0_db: f64,
    /// Operating point of the residual study; omitted to skip it.
    pub residual_es_n0_db: Option<f64>,
    /// Channel realizations per block when collecting residuals.
    pub residual_realizations: usize,
    pub alpha: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            n: 4,
            g: 2,
            k: 2,
            width_multipliers: vec![1, 4, 16, 64],
            nets: 2000,
            pairs: 5,
            es_n0_db: 10.0,
            residual_es_n0_db: None,
            residual_realizations: 10,
            alpha: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin code id or path to an alist file (relative to the config).
    pub code: String,
    pub modulation: usize,
    pub chain: ChainKind,
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Fill the `seconds` CSV column with wall time (breaks byte-identical
    /// output across runs).
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub autoencoder: AutoencoderSection,
    #[serde(default)]
    pub train: TrainConfig,
    pub stop: Option<StopSection>,
    #[serde(default)]
    pub decoder: DecoderSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Publishable points want at least this many errors.
pub const RECOMMENDED_MIN_ERRORS: u64 = 50;

fn field(path: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{path}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.code.trim().is_empty() {
            return Err(field("code", "must name a builtin code or an alist file"));
        }
        if ![4, 16, 64].contains(&self.modulation) {
            return Err(field("modulation", format!("unsupported order {}", self.modulation)));
        }
        if self.sweep.is_empty() {
            return Err(field("sweep", "must not be empty"));
        }
        if let Some(x) = self.sweep.iter().find(|x| !x.is_finite()) {
            return Err(field("sweep", format!("non-finite point {x}")));
        }
        if self.sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field("sweep", "must be strictly increasing"));
        }
        if let Some(x) = self.sweep.iter().find(|&&x| x < -40.0) {
            return Err(field("sweep", format!("{x} dB is below the supported -40 dB")));
        }
        if !(self.channel.rho > 0.0 && self.channel.rho.is_finite()) {
            return Err(field("channel.rho", "must be positive"));
        }
        if self.channel.g == 0 {
            return Err(field("channel.g", "must be at least 1"));
        }
        self.channel.pulse.validate().map_err(|e| field("channel.pulse", e))?;
        let ae = &self.autoencoder;
        if ae.n == 0 {
            return Err(field("autoencoder.n", "must be at least 1"));
        }
        if ae.k == 0 {
            return Err(field("autoencoder.k", "must be at least 1"));
        }
        for (name, v) in [
            ("autoencoder.sigma_theta2", ae.sigma_theta2),
            ("autoencoder.sigma_b2", ae.sigma_b2),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(field(name, format!("must be >= 0, got {v}")));
            }
        }
        self.train.validate().map_err(|e| field("train", e))?;
        if let Some(stop) = &self.stop {
            if stop.min_bit_errors == 0 {
                return Err(field("stop.min_bit_errors", "must be at least 1"));
            }
            if stop.max_codewords == 0 {
                return Err(field("stop.max_codewords", "must be at least 1"));
            }
        }
        if self.decoder.max_iters == 0 {
            return Err(field("decoder.max_iters", "must be at least 1"));
        }
        let k = &self.kernel;
        if k.n == 0 || k.g == 0 || k.k == 0 {
            return Err(field("kernel", "n, g and k must be at least 1"));
        }
        if k.width_multipliers.is_empty()
            || k.width_multipliers[0] == 0
            || k.width_multipliers.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(field(
                "kernel.width_multipliers",
                "must be positive and strictly increasing",
            ));
        }
        if k.nets < 2 {
            return Err(field("kernel.nets", "must be at least 2"));
        }
        if !(k.alpha > 0.0 && k.alpha < 1.0) {
            return Err(field("kernel.alpha", "must lie in (0, 1)"));
        }
        if k.residual_realizations == 0 {
            return Err(field("kernel.residual_realizations", "must be at least 1"));
        }
        Ok(())
    }

    /// Stopping rule, defaulting by code length.
    pub fn stop_rule(&self, code_len: usize) -> StopSection {
        self.stop.clone().unwrap_or(StopSection {
            min_bit_errors: 100,
            max_codewords: if code_len > 10_000 { 50 } else { 2000 },
        })
    }

    /// Warnings that do not invalidate the config.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Some(stop) = &self.stop {
            if stop.min_bit_errors < RECOMMENDED_MIN_ERRORS {
                w.push(format!(
                    "stop.min_bit_errors = {} is below {RECOMMENDED_MIN_ERRORS}; BER estimates will be noisy",
                    stop.min_bit_errors
                ));
            }
        }
        w
    }

    pub fn load_code(&self) -> Result<LdpcCode> {
        if let Ok(code) = LdpcCode::builtin(&self.code) {
            return Ok(code);
        }
        let path = match &self.base_dir {
            Some(dir) if Path::new(&self.code).is_relative() => dir.join(&self.code),
            _ => PathBuf::from(&self.code),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| {
            field(
                "code",
                format!("not a builtin id and {} is unreadable: {e}", path.display()),
            )
        })?;
        LdpcCode::from_alist(&text).map_err(|e| field("code", e))
    }
}
