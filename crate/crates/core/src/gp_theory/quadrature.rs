//! Gauss quadrature rules via the Golub-Welsch eigenvalue method.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Activation, KernelState};

/// Nodes and weights of an `n`-point rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(n: usize, off_diag: impl Fn(usize) -> f64, mu0: f64) -> Rule {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = off_diag(k);
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Hermite rule for the standard normal density:
/// `E[f(u)] ≈ Σ w_i f(x_i)` with `u ~ N(0, 1)`.
pub fn gauss_hermite_normal(n: usize) -> Rule {
    // Probabilists' Hermite recurrence: off-diagonal sqrt(k), total mass 1.
    golub_welsch(n, |k| (k as f64).sqrt(), 1.0)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    golub_welsch(
        n,
        |k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        },
        2.0,
    )
}

/// Maps independent standard normals `(u, w)` to `(z, ẑ) ~ N(0, state)`.
fn factor(state: &KernelState) -> (f64, f64, f64) {
    let a = state.k_zz.max(0.0).sqrt();
    let c = state.k_hzhz.max(0.0).sqrt();
    let rho = state.correlation().unwrap_or(0.0);
    (a, c * rho, c * (1.0 - rho * rho).max(0.0).sqrt())
}

/// `E[f(z, ẑ)]` by an `n`×`n` product Gauss-Hermite rule.
pub fn hermite_expectation(state: &KernelState, n: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let rule = gauss_hermite_normal(n);
    let (l11, l21, l22) = factor(state);
    let mut acc = 0.0;
    for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
        for (w, ww) in rule.nodes.iter().zip(&rule.weights) {
            acc += wu * ww * f(l11 * u, l21 * u + l22 * w);
        }
    }
    acc
}

/// Angular breakpoints where `z` or `ẑ` changes sign, plus the ends.
fn angular_cuts(l21: f64, l22: f64) -> Vec<f64> {
    let mut cuts = vec![0.0, PI / 2.0, 1.5 * PI, 2.0 * PI];
    let a0 = (-l21).atan2(l22).rem_euclid(2.0 * PI);
    cuts.push(a0);
    cuts.push((a0 + PI).rem_euclid(2.0 * PI));
    cuts.sort_by(f64::total_cmp);
    cuts
}

/// Composite Gauss-Legendre over consecutive `cuts`.
fn composite(cuts: &[f64], rule: &Rule, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi - lo < 1e-15 {
            continue;
        }
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * half * f(mid + half * x);
        }
    }
    acc
}

/// Moments of `tanh(z / T)` in polar coordinates; the radial integral is
/// split on a geometric grid in units of `T` where the integrand bends.
pub(crate) fn tempered_sign_moments(state: &KernelState, temperature: f64) -> KernelState {
    let (l11, l21, l22) = factor(state);
    let rule = gauss_legendre(48);
    let mut radial_cuts = vec![0.0];
    let mut edge = temperature / 4.0;
    while edge < 12.0 {
        radial_cuts.push(edge);
        edge *= 4.0;
    }
    radial_cuts.push(12.0);
    let t = |x: f64| (x / temperature).tanh();
    let moment = |f: &dyn Fn(f64, f64) -> f64| {
        composite(&angular_cuts(l21, l22), &rule, |alpha| {
            let (a, b) = (l11 * alpha.cos(), l21 * alpha.cos() + l22 * alpha.sin());
            composite(&radial_cuts, &rule, |r| {
                f(t(r * a), t(r * b)) * r * (-r * r / 2.0).exp()
            })
        }) / (2.0 * PI)
    };
    KernelState {
        k_zz: moment(&|x, _| x * x),
        k_zhz: moment(&|x, y| x * y),
        k_hzhz: moment(&|_, y| y * y),
    }
}

/// `E[φ(z) φ(ẑ)]` for a positively homogeneous `φ` by integrating in polar
/// coordinates: the radial part is a closed-form Gaussian moment and the
/// angular part is piecewise smooth between the zeros of `z` and `ẑ`, so a
/// composite Gauss-Legendre rule split at those angles is exact to rounding.
///
/// Independent of the closed-form kernels; used to verify them.
pub fn polar_expectation(state: &KernelState, act: Activation, nodes_per_piece: usize) -> Option<f64> {
    let (phi, degree): (fn(f64) -> f64, i32) = match act {
        Activation::Linear => (|x| x, 1),
        Activation::Relu => (|x| x.max(0.0), 1),
        Activation::Sign => (|x| if x >= 0.0 { 1.0 } else { -1.0 }, 0),
        Activation::TemperedSign { .. } => return None,
    };
    let (l11, l21, l22) = factor(state);
    // ∫_0^∞ r^(2p+1) e^(-r²/2) dr = 2^p p!
    let radial = if degree == 0 { 1.0 } else { 2.0 };
    let rule = gauss_legendre(nodes_per_piece);
    let angular = composite(&angular_cuts(l21, l22), &rule, |alpha| {
        phi(l11 * alpha.cos()) * phi(l21 * alpha.cos() + l22 * alpha.sin())
    });
    Some(radial * angular / (2.0 * PI))
}
