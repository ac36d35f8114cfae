//! D'Agostino-Pearson omnibus test of normality.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{GpError, Result};

pub const MIN_NORMALITY_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `K² = Z_skew² + Z_kurt²`, chi-square with 2 degrees of freedom under
    /// the null.
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub rejected: bool,
    /// Largest gap between the empirical CDF and the fitted normal CDF.
    pub ks_distance: f64,
    /// False for degenerate (zero variance) samples; the test result is then
    /// meaningless and `rejected` is false.
    pub valid: bool,
}

fn skew_z(g1: f64, n: f64) -> f64 {
    let y = g1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 =
        3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let y = if y == 0.0 { 1.0 } else { y };
    delta * (y / alpha).asinh()
}

fn kurtosis_z(b2: f64, n: f64) -> f64 {
    let mean = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - mean) / var.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Tests `samples` for normality at significance `alpha`.
pub fn normality_test(samples: &[f64], alpha: f64) -> Result<NormalityReport> {
    if samples.len() < MIN_NORMALITY_SAMPLES {
        return Err(GpError::TooFewSamples {
            min: MIN_NORMALITY_SAMPLES,
            got: samples.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GpError::BadParam(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(GpError::BadParam("non-finite sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let central = |p: i32| samples.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / n;
    let m2 = central(2);
    let mut report = NormalityReport {
        samples: samples.len(),
        mean,
        variance: m2,
        skewness: 0.0,
        excess_kurtosis: 0.0,
        statistic: 0.0,
        p_value: 1.0,
        alpha,
        rejected: false,
        ks_distance: 0.0,
        valid: false,
    };
    if m2 == 0.0 || m2 <= 1e-20 * mean * mean {
        return Ok(report);
    }
    let g1 = central(3) / m2.powf(1.5);
    let b2 = central(4) / (m2 * m2);
    let stat = skew_z(g1, n).powi(2) + kurtosis_z(b2, n).powi(2);
    let p = (-stat / 2.0).exp().clamp(0.0, 1.0);

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = m2.sqrt();
    let ks = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal_cdf((x - mean) / sd);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);

    report.skewness = g1;
    report.excess_kurtosis = b2 - 3.0;
    report.statistic = stat;
    report.p_value = p;
    report.rejected = p < alpha;
    report.ks_distance = ks;
    report.valid = true;
    Ok(report)
}
