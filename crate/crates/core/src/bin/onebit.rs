use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use onebit_ae::harness::{self, ChainKind, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "onebit", version, about = "LDPC + autoencoder over one-bit FTN channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a BER sweep and write `<out>/<chain>.csv`.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config chain.
        #[arg(long)]
        chain: Option<String>,
    },
    /// Print a side-by-side BER table of result files.
    Summarize {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
    /// Write `<out>/kernel_report.json` from the `[kernel]` section.
    KernelReport {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a config file without running it.
    ValidateConfig { path: PathBuf },
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Run {
            config,
            out,
            seed,
            chain,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(id) = chain {
                cfg.chain =
                    ChainKind::parse(&id).ok_or_else(|| HarnessError::Config(format!("chain: unknown id `{id}`")))?;
            }
            let points = harness::run_chain(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            let path = out.join(format!("{}.csv", cfg.chain.id()));
            std::fs::write(&path, harness::to_csv(&points)).map_err(|e| io_err(&path, e))?;
            print!("{}", harness::summarize(&[(cfg.chain.id().to_string(), points)]));
            eprintln!("wrote {}", path.display());
        }
        Cmd::Summarize { csv } => {
            let mut curves = Vec::with_capacity(csv.len());
            for path in &csv {
                let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                let points =
                    harness::parse_csv(&text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
                curves.push((label(path), points));
            }
            print!("{}", harness::summarize(&curves));
        }
        Cmd::KernelReport { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = harness::kernel_report(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            let path = out.join("kernel_report.json");
            report.write(&path).map_err(|e| io_err(&path, e))?;
            for pair in &report.pairs {
                for row in &pair.rows {
                    println!(
                        "width x{:<4} max relative error {:.4} (95% CI {:.4}..{:.4})",
                        row.width_multiplier, row.max_rel_err, row.max_rel_err_ci[0], row.max_rel_err_ci[1]
                    );
                }
            }
            let worst = report.quadrature.iter().map(|q| q.abs_err).fold(0.0, f64::max);
            println!("closed form vs quadrature: max abs error {worst:.2e}");
            if let Some(r) = &report.residuals {
                println!(
                    "residuals: {} samples, p = {:.3e}, {:.0}% of coordinates pass",
                    r.samples.len(),
                    r.normality.p_value,
                    100.0 * r.coordinate_pass_fraction
                );
            }
            eprintln!("wrote {}", path.display());
        }
        Cmd::ValidateConfig { path } => {
            let cfg = ExperimentConfig::load(&path)?;
            let code = cfg.load_code()?;
            for w in cfg.warnings() {
                println!("warning: {w}");
            }
            println!(
                "ok: {} chain, {}-QAM, code n={} k={}, {} sweep points",
                cfg.chain.id(),
                cfg.modulation,
                code.len(),
                code.info_len(),
                cfg.sweep.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
