//! Seeded Monte-Carlo BER sweeps and the kernel report.

pub mod chains;
pub mod config;
pub mod csv;

pub use chains::{chain_onebit_baseline, chain_unquantized, AeChain, PointContext};
pub use config::{ChainKind, ExperimentConfig, KernelSection, StopSection};
pub use csv::{monotonicity_violations, parse_csv, summarize, to_csv, BerPoint, CSV_HEADER};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::autoencoder::AeError;
use crate::channel::{es_n0_to_sigma, ChannelConfig};
use crate::gp_theory::{
    empirical_kernel, normality_test, quadrature_grid, GpError, KernelProbe, KernelReport, NormalityReport, PairReport,
    ResidualReport, MIN_NORMALITY_SAMPLES,
};
use crate::ldpc::LdpcError;
use crate::modem::{complex_to_real, Constellation};

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "ONEBIT_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("training window {index}: {source}")]
    Window { index: usize, source: AeError },
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Autoencoder(#[from] AeError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Modem(#[from] crate::modem::ModemError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Thread pool sized by [`THREADS_ENV`], defaulting to the logical cores.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        b = b.num_threads(parse_threads(&v)?);
    }
    b.build().map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn parse_threads(v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("{THREADS_ENV}: expected a positive integer, got `{v}`")))
}

/// Seed of sweep point `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Runs every sweep point of `cfg.chain` and returns the points in sweep
/// order. Points run in parallel; each is fully determined by its seed.
pub fn run_chain(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    let code = cfg.load_code()?;
    let pool = worker_pool()?;
    let points = pool.install(|| {
        cfg.sweep
            .par_iter()
            .enumerate()
            .map(|(i, &db)| run_point(cfg, &code, db, point_seed(cfg.seed, i)))
            .collect::<Result<Vec<_>>>()
    })?;
    for p in &points {
        if p.ber > 0.5 {
            log::warn!(
                "BER {:.3} > 0.5 at {} dB: check the LLR sign convention",
                p.ber,
                p.es_n0_db
            );
        }
    }
    Ok(points)
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// One sweep point under the stopping rule.
pub fn run_point(cfg: &ExperimentConfig, code: &crate::ldpc::LdpcCode, es_n0_db: f64, seed: u64) -> Result<BerPoint> {
    let start = Instant::now();
    let ctx = PointContext::new(code, cfg, es_n0_db)?;
    let stop = cfg.stop_rule(code.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = code.info_len();
    let (mut codewords, mut errors) = (0u64, 0u64);
    let mut aborted = None;

    match cfg.chain {
        ChainKind::UnquantizedBaseline | ChainKind::OnebitBaseline => {
            while errors < stop.min_bit_errors && codewords < stop.max_codewords {
                let info = chains::random_bits(k, &mut rng);
                let out = match cfg.chain {
                    ChainKind::UnquantizedBaseline => chain_unquantized(&info, &ctx, &mut rng)?,
                    _ => chain_onebit_baseline(&info, &ctx, &mut rng)?,
                };
                errors += count_errors(&info, &out);
                codewords += 1;
            }
        }
        ChainKind::OnebitAe => {
            let mut ae = AeChain::new(cfg, es_n0_db, rng.random())?;
            while errors < stop.min_bit_errors && codewords < stop.max_codewords {
                let count = (cfg.train.window as u64).min(stop.max_codewords - codewords) as usize;
                let infos: Vec<Vec<u8>> = (0..count).map(|_| chains::random_bits(k, &mut rng)).collect();
                match ae.run_window(&infos, &ctx, &mut rng) {
                    Ok(out) => {
                        for (info, dec) in infos.iter().zip(&out.decoded) {
                            errors += count_errors(info, dec);
                        }
                        codewords += count as u64;
                        log::info!("{es_n0_db} dB: {codewords} codewords, {errors} bit errors");
                    }
                    Err(e @ HarnessError::Window { .. }) => {
                        log::error!("{es_n0_db} dB: {e}");
                        aborted = Some(e.to_string());
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let mut p = BerPoint::new(es_n0_db, codewords, errors, codewords * k as u64);
    if aborted.is_some() {
        p.ber = f64::NAN;
    }
    p.aborted = aborted;
    if cfg.timing {
        p.seconds = Some(start.elapsed().as_secs_f64());
    }
    log::info!("{es_n0_db} dB done: BER {:.3e} over {codewords} codewords", p.ber);
    Ok(p)
}

/// Residuals of one trained autoencoder window.
#[derive(Debug, Clone)]
pub struct ResidualStudy {
    pub by_coordinate: Vec<Vec<f64>>,
    /// Per-coordinate normality tests.
    pub tests: Vec<NormalityReport>,
    /// Fraction of coordinates not rejected.
    pub pass_fraction: f64,
    pub residual_var: f64,
}

/// Trains one window of the autoencoder chain at `es_n0_db`, then draws at
/// least `min_realizations` channel realizations per block (more if needed
/// to give every coordinate enough samples) and tests each coordinate of
/// the decoder residual for normality.
pub fn residual_study(
    cfg: &ExperimentConfig,
    es_n0_db: f64,
    seed: u64,
    min_realizations: usize,
    alpha: f64,
) -> Result<ResidualStudy> {
    let code = cfg.load_code()?;
    let ctx = PointContext::new(&code, cfg, es_n0_db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ae = AeChain::new(cfg, es_n0_db, rng.random())?;
    let infos: Vec<Vec<u8>> = (0..cfg.train.window)
        .map(|_| chains::random_bits(code.info_len(), &mut rng))
        .collect();
    let out = ae.run_window(&infos, &ctx, &mut rng)?;

    let one = ae.residuals_by_coordinate(&infos[..1], &ctx, 1, &mut rng)?;
    let fewest = one.iter().map(Vec::len).min().unwrap_or(0) * infos.len();
    let needed = if fewest == 0 {
        1
    } else {
        MIN_NORMALITY_SAMPLES.div_ceil(fewest)
    };
    let by_coordinate = ae.residuals_by_coordinate(&infos, &ctx, needed.max(min_realizations), &mut rng)?;
    let tests = by_coordinate
        .iter()
        .map(|s| normality_test(s, alpha))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let pass = tests.iter().filter(|t| t.valid && !t.rejected).count();
    Ok(ResidualStudy {
        pass_fraction: pass as f64 / tests.len() as f64,
        by_coordinate,
        tests,
        residual_var: out.report.residual_var,
    })
}

/// Kernel probe for the `[kernel]` section at its operating point.
pub fn kernel_probe(cfg: &ExperimentConfig) -> Result<KernelProbe> {
    let k = &cfg.kernel;
    let ae = &cfg.autoencoder;
    Ok(KernelProbe {
        n: k.n,
        g: k.g,
        k: k.k,
        sigma_theta2: ae.sigma_theta2,
        sigma_b2: ae.sigma_b2,
        channel: ChannelConfig {
            g: k.g,
            ..cfg.channel.to_config(k.g, cfg.channel.quantized)
        },
        noise_var: es_n0_to_sigma(k.es_n0_db, cfg.channel.rho)?,
    })
}

/// Random input pairs of `n` symbols drawn from the configured
/// constellation.
pub fn random_pairs(cfg: &ExperimentConfig, n: usize, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let c = Constellation::new(cfg.modulation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block = || {
        let s: Vec<_> = (0..n).map(|_| c.points()[rng.random_range(0..c.order())]).collect();
        complex_to_real(&s)
    };
    Ok((0..count).map(|_| (block(), block())).collect())
}

/// Everything `kernel-report` writes: empirical vs analytic kernels, the
/// quadrature check, and optionally a residual study.
pub fn kernel_report(cfg: &ExperimentConfig) -> Result<KernelReport> {
    cfg.validate()?;
    let k = &cfg.kernel;
    let probe = kernel_probe(cfg)?;
    let pairs = random_pairs(cfg, k.n, k.pairs, cfg.seed)?
        .into_iter()
        .enumerate()
        .map(|(i, (d, d_hat))| {
            let rows = empirical_kernel(
                &probe,
                &d,
                &d_hat,
                &k.width_multipliers,
                k.nets,
                point_seed(cfg.seed, i),
            )?;
            Ok(PairReport { d, d_hat, rows })
        })
        .collect::<Result<Vec<_>>>()?;
    let residuals = match k.residual_es_n0_db {
        None => None,
        Some(db) => {
            let study = residual_study(cfg, db, cfg.seed, k.residual_realizations, k.alpha)?;
            let samples: Vec<f64> = study.by_coordinate.concat();
            Some(ResidualReport {
                normality: normality_test(&samples, k.alpha)?,
                coordinate_pass_fraction: study.pass_fraction,
                samples,
            })
        }
    };
    Ok(KernelReport {
        probe,
        pairs,
        quadrature: quadrature_grid(21),
        residuals,
    })
}

#[cfg(test)]
mod tests;
