use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::quadrature::{hermite_expectation, polar_expectation};
use super::*;
use crate::autoencoder::{AeDims, MlpParams};
use crate::channel::{ChannelConfig, PulseSpec};

fn state(k_zz: f64, c: f64, k_hzhz: f64) -> KernelState {
    KernelState::new(k_zz, c * (k_zz * k_hzhz).sqrt(), k_hzhz).unwrap()
}

#[test]
fn relu_perfect_correlation_preserves_variance() {
    let out = kernel_step(state(1.0, 1.0, 1.0), Activation::Relu, 2.0, 0.0).unwrap();
    assert!((out.k_zhz - 1.0).abs() < 1e-12);
    assert!((out.k_zz - 1.0).abs() < 1e-12);
    assert!((out.k_hzhz - 1.0).abs() < 1e-12);
}

#[test]
fn sign_uncorrelated_gives_bias_only() {
    let out = kernel_step(state(2.0, 0.0, 0.5), Activation::Sign, 1.7, 0.3).unwrap();
    assert!((out.k_zhz - 0.3).abs() < 1e-15);
}

#[test]
fn sign_diagonal_ignores_input_scale() {
    for scale in [1e-6, 1.0, 1e6] {
        let out = kernel_step(state(scale, 0.4, 3.0 * scale), Activation::Sign, 1.5, 0.25).unwrap();
        assert_eq!(out.k_zz, 1.75);
        assert_eq!(out.k_hzhz, 1.75);
    }
}

#[test]
fn relu_half_correlation_matches_quadrature() {
    let s = state(1.0, 0.5, 1.0);
    let closed = activation_moments(&s, Activation::Relu).unwrap().k_zhz;
    let quad = polar_expectation(&s, Activation::Relu, 64).unwrap();
    assert!((closed - quad).abs() < 1e-8, "{closed} vs {quad}");
    // A plain product Gauss-Hermite rule agrees only loosely because the
    // integrand has a kink along z = 0.
    let gh = hermite_expectation(&s, 64, |z, zh| z.max(0.0) * zh.max(0.0));
    assert!((closed - gh).abs() < 1e-3, "{closed} vs {gh}");
}

#[test]
fn closed_forms_match_quadrature_on_grid() {
    let grid = quadrature_grid(21);
    assert_eq!(grid.len(), 42);
    for row in grid {
        assert!(row.abs_err < 1e-8, "{row:?}");
    }
}

#[test]
fn quadrature_diagonal_and_linear_checks() {
    let s = state(1.3, -0.2, 0.7);
    let lin = polar_expectation(&s, Activation::Linear, 32).unwrap();
    assert!((lin - s.k_zhz).abs() < 1e-12);
    let diag = polar_expectation(&state(1.3, 1.0, 1.3), Activation::Relu, 32).unwrap();
    assert!((diag - 0.65).abs() < 1e-12);
}

#[test]
fn relu_correlation_monotone() {
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=200 {
        let c = -1.0 + 2.0 * i as f64 / 200.0;
        let out = kernel_step(state(1.0, c, 2.0), Activation::Relu, 2.0, 0.1).unwrap();
        let rho = out.correlation().unwrap();
        assert!(rho >= prev - 1e-15, "c = {c}");
        prev = rho;
    }
}

#[test]
fn rejects_non_psd() {
    assert!(matches!(KernelState::new(1.0, 2.0, 1.0), Err(GpError::NotPsd(..))));
    assert!(KernelState::new(-1.0, 0.0, 1.0).is_err());
    let bad = KernelState {
        k_zz: 1.0,
        k_zhz: 1.5,
        k_hzhz: 1.0,
    };
    assert!(kernel_step(bad, Activation::Relu, 1.0, 0.0).is_err());
    assert!(kernel_step(state(1.0, 0.0, 1.0), Activation::Relu, -1.0, 0.0).is_err());
}

#[test]
fn tempered_sign_approaches_arcsine() {
    let s = state(1.0, 0.6, 1.5);
    let target = activation_moments(&s, Activation::Sign).unwrap().k_zhz;
    let errs: Vec<f64> = [1.0, 0.3, 0.1, 0.03]
        .iter()
        .map(|&t| {
            let m = activation_moments(&s, Activation::TemperedSign { temperature: t }).unwrap();
            (m.k_zhz - target).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 0.02, "{errs:?}");
}

#[test]
fn linear_stack_is_scaled_gram() {
    let gram = KernelState::from_inputs(&[1.0, -0.5, 0.25, 2.0], &[0.5, 0.5, -1.0, 1.0]).unwrap();
    let layers = vec![LayerSpec::Dense(Activation::Linear); 3];
    let out = compose_kernel(gram, &layers, 1.5, 0.0).unwrap();
    let f = 1.5f64.powi(3);
    assert!((out.k_zz - f * gram.k_zz).abs() < 1e-12);
    assert!((out.k_zhz - f * gram.k_zhz).abs() < 1e-12);
    assert!((out.k_hzhz - f * gram.k_hzhz).abs() < 1e-12);
    assert!(matches!(compose_kernel(gram, &[], 1.0, 0.0), Err(GpError::EmptySpec)));
}

#[test]
fn channel_layer_by_hand() {
    // Affine input layer, then a channel with two units of energy 1 and 2.
    let gram = state(2.0, 0.5, 2.0);
    let ch = ChannelKernel {
        rho: 1.5,
        noise_var: 0.2,
        row_energies: vec![1.0, 2.0],
        shared_noise: true,
    };
    let out = compose_kernel(gram, &[LayerSpec::Channel(ch.clone())], 1.0, 0.0).unwrap();
    // mean over units of rho*E_k + s2 and rho*E_k*c + s2
    assert!((out.k_zz - (1.5 * 1.5 + 0.2)).abs() < 1e-12);
    assert!((out.k_zhz - (1.5 * 1.5 * 0.5 + 0.2)).abs() < 1e-12);

    // Sign after the channel averages per-unit arcsine kernels.
    let out = compose_kernel(
        gram,
        &[LayerSpec::Channel(ch), LayerSpec::Dense(Activation::Sign)],
        2.0,
        0.1,
    )
    .unwrap();
    let unit = |e: f64| (2.0 / std::f64::consts::PI) * ((1.5 * e * 0.5 + 0.2) / (1.5 * e + 0.2)).asin();
    let want = 0.1 + 2.0 * 0.5 * (unit(1.0) + unit(2.0));
    assert!((out.k_zhz - want).abs() < 1e-12);
    assert!((out.k_zz - 2.1).abs() < 1e-12);
}

#[test]
fn identical_inputs_give_identical_entries() {
    let ch = ChannelKernel {
        rho: 1.0,
        noise_var: 0.3,
        row_energies: vec![1.0, 1.4, 1.4, 1.0],
        shared_noise: true,
    };
    let d = [0.7, -0.7, 0.2, 0.9];
    let out = compose_kernel(
        KernelState::from_inputs(&d, &d).unwrap(),
        &autoencoder_stack(ch, true),
        2.0,
        0.05,
    )
    .unwrap();
    assert!((out.k_zz - out.k_hzhz).abs() < 1e-12);
    assert!((out.k_zz - out.k_zhz).abs() < 1e-12);
}

proptest! {
    #[test]
    fn kernel_step_preserves_psd(
        a in 1e-3f64..10.0, c in -1.0f64..=1.0, b in 1e-3f64..10.0,
        st2 in 0.0f64..4.0, sb2 in 0.0f64..1.0, which in 0usize..3,
    ) {
        let act = [Activation::Linear, Activation::Relu, Activation::Sign][which];
        let s = KernelState { k_zz: a, k_zhz: c * (a * b).sqrt(), k_hzhz: b };
        let out = kernel_step(s, act, st2, sb2).unwrap();
        prop_assert!(out.check().is_ok(), "{:?}", out);
    }
}

// --- normality -----------------------------------------------------------

fn weyl_sample(n: usize) -> Vec<f64> {
    let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    (1..=n)
        .map(|i| {
            primes
                .iter()
                .map(|p| (i as f64 * p.sqrt()).rem_euclid(1.0))
                .sum::<f64>()
                - 6.0
        })
        .collect()
}

#[test]
fn normality_matches_reference_values() {
    // Reference values from scipy.stats.normaltest on the same samples.
    let x = weyl_sample(1200);
    let r = normality_test(&x, 0.01).unwrap();
    assert!((r.statistic - 0.26323472610515314).abs() < 1e-9, "{r:?}");
    assert!((r.p_value - 0.8766763796838111).abs() < 1e-9);
    assert!((r.skewness - 0.00344182503376712).abs() < 1e-12);
    assert!((r.excess_kurtosis + 0.08274551886962467).abs() < 1e-12);
    assert!(!r.rejected && r.valid);

    let y: Vec<f64> = x.iter().map(|v| v + 0.15 * v * v).collect();
    let r = normality_test(&y, 0.01).unwrap();
    assert!((r.statistic - 113.65114723851663).abs() < 1e-7, "{r:?}");
    assert!((r.p_value / 2.0939530805702043e-25 - 1.0).abs() < 1e-7);
    assert!(r.rejected);
}

#[test]
fn uniform_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = Uniform::new(-1.0, 1.0).unwrap();
    let x: Vec<f64> = (0..100_000).map(|_| u.sample(&mut rng)).collect();
    let r = normality_test(&x, 0.01).unwrap();
    assert!(r.rejected);
    assert!((r.excess_kurtosis + 1.2).abs() < 0.02, "{r:?}");
    assert!(r.p_value >= 0.0 && r.p_value <= 1.0);
}

#[test]
fn normal_ks_distance_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let r = normality_test(&x, 0.01).unwrap();
    assert!(r.ks_distance < 0.015, "{r:?}");
}

#[test]
fn constant_samples_are_flagged() {
    let r = normality_test(&[0.1; 600], 0.05).unwrap();
    assert!(!r.valid && !r.rejected);
    assert_eq!(r.p_value, 1.0);
}

#[test]
fn too_few_samples() {
    assert!(matches!(
        normality_test(&[0.0; 499], 0.05),
        Err(GpError::TooFewSamples { min: 500, got: 499 })
    ));
    assert!(normality_test(&weyl_sample(600), 1.5).is_err());
}

// --- linearization drift -------------------------------------------------

fn probes(len: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

#[test]
fn drift_zero_and_first_order() {
    let dims = AeDims::new(2, 2, 3);
    let p = MlpParams::init(dims, 2.0, 0.1, 1).unwrap();
    let pr = probes(dims.encoded(), 10, 2);
    let r = linearization_drift(&p, &p, &pr).unwrap();
    assert!(r.per_probe.iter().all(|&v| v == 0.0));
    assert_eq!(r.median, 0.0);

    let dir = MlpParams::init(dims, 2.0, 0.1, 9).unwrap();
    let mut q = p.clone();
    for (l, dl) in q.decoder.iter_mut().zip(&dir.decoder) {
        l.weight += &dl.weight * 1e-6;
        l.bias += &dl.bias * 1e-6;
    }
    let r = linearization_drift(&p, &q, &pr).unwrap();
    assert!(r.median < 1e-3, "{r:?}");
    assert!(r.per_probe.iter().all(|&v| v < 1e-3));
}

#[test]
fn drift_dimension_errors() {
    let a = MlpParams::init(AeDims::new(2, 2, 3), 2.0, 0.1, 1).unwrap();
    let b = MlpParams::init(AeDims::new(2, 2, 4), 2.0, 0.1, 1).unwrap();
    assert!(linearization_drift(&a, &b, &[]).is_err());
    assert!(linearization_drift(&a, &a, &[vec![0.0; 3]]).is_err());
}

// --- empirical kernel ----------------------------------------------------

fn small_probe(quantized: bool, noise_var: f64) -> KernelProbe {
    KernelProbe {
        n: 2,
        g: 2,
        k: 2,
        sigma_theta2: 2.0,
        sigma_b2: 0.1,
        channel: ChannelConfig {
            rho: 1.0,
            g: 2,
            quantized,
            pulse: PulseSpec::default(),
        },
        noise_var,
    }
}

#[test]
fn empirical_identical_inputs_fully_correlated() {
    let d = [0.3, -0.9, 0.9, 0.3];
    let rows = empirical_kernel(&small_probe(true, 0.1), &d, &d, &[2], 50, 7).unwrap();
    let e = rows[0].empirical;
    assert!((e.k_zhz / (e.k_zz * e.k_hzhz).sqrt() - 1.0).abs() < 1e-12);
}

#[test]
fn empirical_unquantized_near_noiseless_matches_analytic() {
    let d = [0.3, -0.9, 0.9, 0.3];
    let dh = [-0.9, -0.3, 0.3, 0.9];
    let rows = empirical_kernel(&small_probe(false, 1e-6), &d, &dh, &[16], 400, 11).unwrap();
    assert!(rows[0].max_rel_err < 0.08, "{:?}", rows[0]);
}

#[test]
fn empirical_is_deterministic_and_validates() {
    let d = [0.3, -0.9, 0.9, 0.3];
    let dh = [-0.9, -0.3, 0.3, 0.9];
    let p = small_probe(true, 0.1);
    let a = empirical_kernel(&p, &d, &dh, &[1, 2], 20, 5).unwrap();
    let b = empirical_kernel(&p, &d, &dh, &[1, 2], 20, 5).unwrap();
    assert_eq!(a, b);
    assert!(empirical_kernel(&p, &d, &dh, &[2, 1], 20, 5).is_err());
    assert!(empirical_kernel(&p, &d[..2], &dh, &[1], 20, 5).is_err());
}
