//! How far training moves the decoder away from its first-order Taylor
//! model around the initialization.

use serde::{Deserialize, Serialize};

use super::{GpError, Result};
use crate::autoencoder::{decode, decode_jvp, Dense, Grads, MlpParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// `‖f(w+Δw) − f(w) − J Δw‖ / ‖f(w+Δw) − f(w)‖` per probe; 0 where the
    /// output did not move.
    pub per_probe: Vec<f64>,
    pub median: f64,
    /// `‖Δw‖` over the trainable (decoder) parameters.
    pub delta_norm: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Linearization drift of the decoder between `before` and `after` on the
/// received vectors `probes`.
pub fn linearization_drift(before: &MlpParams, after: &MlpParams, probes: &[Vec<f64>]) -> Result<DriftReport> {
    if before.dims != after.dims || before.decoder.len() != after.decoder.len() {
        return Err(GpError::DimensionMismatch(format!(
            "architectures differ: {:?} vs {:?}",
            before.dims, after.dims
        )));
    }
    let want = before.dims.encoded();
    if let Some(p) = probes.iter().find(|p| p.len() != want) {
        return Err(GpError::DimensionMismatch(format!(
            "probe length {} (expected {want})",
            p.len()
        )));
    }
    let delta = Grads(
        before
            .decoder
            .iter()
            .zip(&after.decoder)
            .map(|(b, a)| Dense {
                weight: &a.weight - &b.weight,
                bias: &a.bias - &b.bias,
            })
            .collect(),
    );
    let per_probe: Vec<f64> = probes
        .iter()
        .map(|r| {
            let f0 = decode(r, before);
            let f1 = decode(r, after);
            let jd = decode_jvp(r, before, &delta);
            let moved: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
            let residual: Vec<f64> = moved.iter().zip(&jd).map(|(m, j)| m - j).collect();
            let denom = norm(&moved);
            if denom == 0.0 {
                0.0
            } else {
                norm(&residual) / denom
            }
        })
        .collect();
    let mut sorted = per_probe.clone();
    sorted.sort_by(f64::total_cmp);
    let median = match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    };
    Ok(DriftReport {
        per_probe,
        median,
        delta_norm: delta.norm(),
    })
}
