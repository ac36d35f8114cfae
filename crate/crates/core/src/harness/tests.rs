use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ldpc::LdpcCode;

const MINIMAL: &str = r#"
code = "wifi-648-r12"
modulation = 16
chain = "onebit-baseline"
sweep = [0.0, 2.0]
"#;

fn cfg_with(extra: &str) -> std::result::Result<ExperimentConfig, HarnessError> {
    ExperimentConfig::from_toml(&format!("{MINIMAL}{extra}"))
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml(text) {
        Err(HarnessError::Config(m)) => m,
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn defaults_fill_in() {
    let c = cfg_with("").unwrap();
    assert_eq!(c.seed, 0);
    assert_eq!(c.channel.g, 10);
    assert!(c.channel.quantized);
    assert_eq!((c.autoencoder.n, c.autoencoder.k), (24, 20));
    assert_eq!(c.autoencoder.sigma_theta2, 2.0);
    assert_eq!(c.autoencoder.sigma_b2, 0.01);
    assert_eq!(c.train.window, 8);
    assert_eq!(c.train.epochs, 200);
    assert_eq!(c.decoder.max_iters, 50);
    assert_eq!(c.stop_rule(648).max_codewords, 2000);
    assert_eq!(c.stop_rule(64800).max_codewords, 50);
    assert_eq!(c.stop_rule(648).min_bit_errors, 100);
}

#[test]
fn validation_names_the_field() {
    let base = MINIMAL.replace("sweep = [0.0, 2.0]", "sweep = [2.0, 0.0]");
    assert!(config_error(&base).starts_with("sweep:"));
    let base = MINIMAL.replace("sweep = [0.0, 2.0]", "sweep = []");
    assert!(config_error(&base).starts_with("sweep:"));
    assert!(config_error(&MINIMAL.replace("16", "8")).starts_with("modulation:"));
    assert!(config_error(&format!("{MINIMAL}[channel]\ng = 0\n")).starts_with("channel.g:"));
    assert!(config_error(&format!("{MINIMAL}[autoencoder]\nsigma_b2 = -1.0\n")).starts_with("autoencoder.sigma_b2:"));
    assert!(
        config_error(&format!("{MINIMAL}[stop]\nmin_bit_errors = 0\nmax_codewords = 5\n"))
            .starts_with("stop.min_bit_errors:")
    );
    assert!(config_error(&format!("{MINIMAL}[train]\nlearning_rate = 0.0\n")).starts_with("train:"));
    assert!(
        config_error(&format!("{MINIMAL}[kernel]\nwidth_multipliers = [4, 1]\n"))
            .starts_with("kernel.width_multipliers:")
    );
    let unknown = config_error(&format!("{MINIMAL}[channel]\ngee = 3\n"));
    assert!(unknown.contains("gee"), "{unknown}");
    assert!(config_error(&MINIMAL.replace("onebit-baseline", "fancy")).contains("fancy"));
}

#[test]
fn low_error_target_warns() {
    let c = cfg_with("[stop]\nmin_bit_errors = 10\nmax_codewords = 5\n").unwrap();
    assert_eq!(c.warnings().len(), 1);
    assert!(cfg_with("").unwrap().warnings().is_empty());
}

#[test]
fn config_round_trips_through_toml() {
    let c = cfg_with("[kernel]\nresidual_es_n0_db = -10.0\n").unwrap();
    let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
    assert_eq!(c, again);
}

#[test]
fn code_from_alist_path() {
    let dir = tempfile::tempdir().unwrap();
    let code = LdpcCode::builtin("hamming-7-4").unwrap();
    std::fs::write(dir.path().join("h.alist"), code.h().to_alist()).unwrap();
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(&cfg_path, MINIMAL.replace("wifi-648-r12", "h.alist")).unwrap();
    let c = ExperimentConfig::load(&cfg_path).unwrap();
    assert_eq!(c.load_code().unwrap().len(), 7);
    let mut missing = c.clone();
    missing.code = "nope.alist".into();
    assert!(matches!(missing.load_code(), Err(HarnessError::Config(m)) if m.starts_with("code:")));
}

#[test]
fn chain_ids_round_trip() {
    for c in [
        ChainKind::UnquantizedBaseline,
        ChainKind::OnebitBaseline,
        ChainKind::OnebitAe,
    ] {
        assert_eq!(ChainKind::parse(c.id()), Some(c));
    }
    assert_eq!(ChainKind::parse("x"), None);
}

#[test]
fn thread_count_parsing() {
    assert_eq!(parse_threads("3").unwrap(), 3);
    assert!(parse_threads("0").is_err());
    assert!(parse_threads("many").is_err());
}

// --- csv -----------------------------------------------------------------

fn pts(v: &[(f64, u64, u64)]) -> Vec<BerPoint> {
    v.iter().map(|&(db, e, b)| BerPoint::new(db, b / 100, e, b)).collect()
}

#[test]
fn csv_round_trip_and_layout() {
    let mut p = pts(&[(-1.5, 10, 1000), (0.0, 0, 1000)]);
    p[1].seconds = Some(1.25);
    let text = to_csv(&p);
    assert_eq!(
        text,
        "es_n0_db,codewords,bit_errors,bits,ber,seconds\n-1.5,10,10,1000,1.000000e-2,\n0,10,0,1000,0.000000e0,1.250\n"
    );
    let back = parse_csv(&text).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[0].bit_errors, 10);
    assert_eq!(back[1].seconds, Some(1.25));
    assert_eq!(to_csv(&back), text);
}

#[test]
fn csv_errors_carry_line_numbers() {
    assert!(matches!(parse_csv(""), Err(HarnessError::Csv { line: 1, .. })));
    assert!(matches!(parse_csv("a,b\n"), Err(HarnessError::Csv { line: 1, .. })));
    let bad = format!("{CSV_HEADER}\n1,2,3,4,5,\n1,2,3\n");
    assert!(matches!(parse_csv(&bad), Err(HarnessError::Csv { line: 3, .. })));
    let bad = format!("{CSV_HEADER}\n1,2,x,4,5,\n");
    assert!(matches!(parse_csv(&bad), Err(HarnessError::Csv { line: 2, .. })));
    let bad = format!("{CSV_HEADER}\n1,2,9,4,5,\n");
    assert!(parse_csv(&bad).is_err());
}

#[test]
fn summarize_single_and_union() {
    let a = pts(&[(0.0, 50, 1000), (2.0, 5, 1000)]);
    let one = summarize(&[("a".into(), a.clone())]);
    let lines: Vec<&str> = one.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("5.000e-2") && lines[2].contains("5.000e-3"));

    let b = pts(&[(1.0, 40, 1000), (3.0, 1, 1000)]);
    let u = summarize(&[("a".into(), a), ("b".into(), b)]);
    let lines: Vec<&str> = u.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].trim_start().starts_with('0') && lines[1].contains(" -"));
    assert!(lines[2].trim_start().starts_with('1') && lines[2].contains(" -"));
}

#[test]
fn summarize_flags_crossover() {
    let a = pts(&[(0.0, 50, 1000), (1.0, 10, 1000)]);
    let b = pts(&[(0.0, 40, 1000), (1.0, 20, 1000)]);
    let s = summarize(&[("a".into(), a), ("b".into(), b)]);
    let lines: Vec<&str> = s.lines().collect();
    assert!(!lines[1].contains("crossover"));
    assert!(lines[2].contains("crossover a/b"), "{s}");
}

#[test]
fn monotonicity_uses_standard_error() {
    let ok = pts(&[(0.0, 100, 10_000), (1.0, 104, 10_000), (2.0, 10, 10_000)]);
    assert!(monotonicity_violations(&ok, 2.0).is_empty());
    let bad = pts(&[(0.0, 100, 10_000), (1.0, 200, 10_000)]);
    assert_eq!(monotonicity_violations(&bad, 2.0), vec![0]);
}

// --- chains --------------------------------------------------------------

fn run(extra: &str, chain: &str, modulation: usize, sweep: &str) -> Vec<BerPoint> {
    let text = format!(
        "code = \"wifi-648-r12\"\nmodulation = {modulation}\nchain = \"{chain}\"\nsweep = [{sweep}]\nseed = 11\n{extra}"
    );
    run_chain(&ExperimentConfig::from_toml(&text).unwrap()).unwrap()
}

#[test]
fn unquantized_qpsk_high_snr_is_clean() {
    let p = run(
        "[stop]\nmin_bit_errors = 100\nmax_codewords = 100\n",
        "unquantized-baseline",
        4,
        "20.0",
    );
    assert_eq!(p[0].codewords, 100);
    assert_eq!(p[0].bit_errors, 0);
    assert_eq!(p[0].bits, 100 * 324);
}

#[test]
fn onebit_qpsk_high_snr_is_clean() {
    let p = run(
        "[stop]\nmin_bit_errors = 100\nmax_codewords = 50\n",
        "onebit-baseline",
        4,
        "12.0",
    );
    assert_eq!(p[0].bit_errors, 0);
}

#[test]
fn onebit_qpsk_noiseless_exact() {
    let code = LdpcCode::builtin("wifi-648-r12").unwrap();
    let cfg = cfg_with("").unwrap();
    let mut ctx = PointContext::new(&code, &cfg, 0.0).unwrap();
    ctx.constellation = crate::modem::Constellation::new(4).unwrap();
    ctx.noise_var = 1e-30;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let info = chains::random_bits(code.info_len(), &mut rng);
        assert_eq!(chain_onebit_baseline(&info, &ctx, &mut rng).unwrap(), info);
    }
}

#[test]
fn onebit_16qam_has_error_floor() {
    // Measured floor of the mismatched one-bit receiver at 30 dB.
    let p = run(
        "[stop]\nmin_bit_errors = 1000\nmax_codewords = 20\n",
        "onebit-baseline",
        16,
        "30.0",
    );
    assert!(p[0].ber > 0.1 && p[0].ber < 0.5, "{:?}", p[0]);
}

#[test]
fn sweep_is_deterministic_and_conserves_bits() {
    let extra = "[stop]\nmin_bit_errors = 20\nmax_codewords = 30\n";
    let a = run(extra, "unquantized-baseline", 16, "4.0, 6.0, 8.0");
    let b = run(extra, "unquantized-baseline", 16, "4.0, 6.0, 8.0");
    assert_eq!(to_csv(&a), to_csv(&b));
    for p in &a {
        assert_eq!(p.bits, p.codewords * 324);
        assert!(p.bit_errors >= 20 || p.codewords == 30);
        assert!(p.seconds.is_none());
    }
}

#[test]
fn timing_fills_seconds() {
    let p = run(
        "timing = true\n[stop]\nmin_bit_errors = 1\nmax_codewords = 1\n",
        "unquantized-baseline",
        4,
        "0.0",
    );
    assert!(p[0].seconds.is_some());
}

const SMALL_AE: &str = "[autoencoder]\nn = 8\nk = 4\n[train]\nepochs = 60\nwindow = 2\nlearning_rate = 0.003\n";

#[test]
fn ae_noiseless_unquantized_ablation_is_clean() {
    let extra =
        format!("{SMALL_AE}[channel]\ng = 1\nquantized = false\n[stop]\nmin_bit_errors = 100\nmax_codewords = 4\n");
    let p = run(&extra, "onebit-ae", 16, "30.0");
    assert_eq!(p[0].codewords, 4);
    assert_eq!(p[0].bit_errors, 0, "{:?}", p[0]);
}

#[test]
fn ae_windows_are_deterministic() {
    let extra = format!("{SMALL_AE}[channel]\ng = 2\n[stop]\nmin_bit_errors = 100000\nmax_codewords = 3\n");
    let a = run(&extra, "onebit-ae", 16, "-8.0");
    let b = run(&extra, "onebit-ae", 16, "-8.0");
    assert_eq!(a, b);
    // The last window is truncated to the codeword budget.
    assert_eq!(a[0].codewords, 3);
}

#[test]
fn ae_divergence_is_recorded_per_point() {
    let extra = "[autoencoder]\nn = 8\nk = 4\n[train]\nepochs = 5\nwindow = 1\nlearning_rate = 1e30\noptimizer = \"gradient-descent\"\n[channel]\ng = 2\n[stop]\nmin_bit_errors = 100\nmax_codewords = 2\n";
    let p = run(extra, "onebit-ae", 16, "0.0");
    assert!(p[0].aborted.as_deref().unwrap_or("").contains("window 0"), "{:?}", p[0]);
    assert!(p[0].ber.is_nan());
    assert!(to_csv(&p).contains(",nan,"));
}

#[test]
fn pilot_fraction_trains_on_a_prefix() {
    let extra = format!("{SMALL_AE}pilot_fraction = 0.5\n[channel]\ng = 1\nquantized = false\n[stop]\nmin_bit_errors = 100\nmax_codewords = 2\n");
    let p = run(&extra, "onebit-ae", 16, "30.0");
    assert_eq!(p[0].codewords, 2);
    assert!(p[0].ber < 0.5);
}
