//! JSON report consumed by the plotting scripts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{activation_moments, quadrature, Activation, EmpiricalRow, KernelProbe, KernelState, NormalityReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub d: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub rows: Vec<EmpiricalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub activation: Activation,
    pub correlation: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Raw decoder residuals `d̂ − d` (real coordinates, padding excluded).
    pub samples: Vec<f64>,
    /// Test of the pooled samples.
    pub normality: NormalityReport,
    /// Fraction of block coordinates whose own test does not reject.
    pub coordinate_pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub probe: KernelProbe,
    pub pairs: Vec<PairReport>,
    pub quadrature: Vec<QuadratureCheck>,
    pub residuals: Option<ResidualReport>,
}

impl KernelReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }
}

/// Closed-form off-diagonal moments of relu and sign against the polar
/// quadrature on `points` correlations evenly spread over `[-0.99, 0.99]`.
pub fn quadrature_grid(points: usize) -> Vec<QuadratureCheck> {
    let (k_zz, k_hzhz) = (1.3, 0.7);
    let mut out = Vec::with_capacity(2 * points);
    for act in [Activation::Relu, Activation::Sign] {
        for i in 0..points {
            let c = if points == 1 {
                0.0
            } else {
                -0.99 + 1.98 * i as f64 / (points - 1) as f64
            };
            let state = KernelState {
                k_zz,
                k_zhz: c * (k_zz * k_hzhz).sqrt(),
                k_hzhz,
            };
            let closed = activation_moments(&state, act).expect("valid state").k_zhz;
            let quad = quadrature::polar_expectation(&state, act, 64).expect("homogeneous activation");
            out.push(QuadratureCheck {
                activation: act,
                correlation: c,
                closed_form: closed,
                quadrature: quad,
                abs_err: (closed - quad).abs(),
            });
        }
    }
    out
}
