//! CLI entry point. Subcommands map one-to-one onto the experiment
//! drivers in [`loracs_harness::experiments`]; every run prints CSV to
//! stdout or `--out`, with wall-time notes on stderr only so the CSV
//! bytes stay a pure function of config + seed.
//!
//! Exit codes: 0 on success, 2 on any configuration problem (unreadable
//! or invalid config file, bad flag values), 1 on runtime I/O failures.

use clap::{Args, Parser, Subcommand};
use loracs_harness::config::{
    parse_ratio_flag, ConfigError, ExperimentConfig, ExperimentKind, Overrides,
};
use loracs_harness::csvout::emit;
use loracs_harness::experiments::{
    bandwidth_csv, bandwidth_report, run_baseline_lossless, run_joint, run_prr, run_ser_grid,
    run_sparsity,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "loracs-harness",
    version,
    about = "Experiment driver for compressed LoRa fronthaul studies"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol-error-rate grid over sf × SNR (× ratio) cells.
    SerGrid(RunArgs),
    /// Packet-reception-rate grid (synchronized reception).
    Prr(RunArgs),
    /// Multi-gateway joint decoding with SNR-weighted fusion.
    Joint(RunArgs),
    /// Coefficient-count comparison: chirp dictionary vs DFT vs DCT.
    Sparsity(RunArgs),
    /// DEFLATE baseline on quantized IQ streams.
    BaselineLossless(RunArgs),
    /// Fronthaul bandwidth arithmetic (no simulation).
    Bandwidth(BandwidthArgs),
}

/// Flags shared by all simulation subcommands: a TOML config plus
/// field-level overrides.
#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spreading factors, e.g. `--sf 7,9`.
    #[arg(long, value_delimiter = ',')]
    sf: Option<Vec<u32>>,
    /// SNR points in dB, e.g. `--snr=-6,0,6` or `--snr inf`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// Ratio policy: `table`, `formula`, or kept fractions `0.25,0.5`.
    #[arg(long)]
    ratio: Option<String>,
    /// Monte-Carlo trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        let ratio = match &self.ratio {
            Some(s) => Some(parse_ratio_flag(s).map_err(ConfigError)?),
            None => None,
        };
        let cfg = base.apply(&Overrides {
            sf: self.sf.clone(),
            snr_db: self.snr.clone(),
            ratio,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
        });
        cfg.validate(kind)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BandwidthArgs {
    /// Number of 125 kHz LoRa channels aggregated on the fronthaul.
    #[arg(long, default_value_t = 64)]
    channels: u64,
    /// Bits per complex sample (I + Q).
    #[arg(long, default_value_t = 24)]
    bits: u64,
    /// Complex sample rate per channel in Hz.
    #[arg(long, default_value_t = 125_000)]
    rate: u64,
    /// Comma-separated compression ratios α to report.
    #[arg(long, default_value = "0,0.875", value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::SerGrid(args) => {
            let cfg = args.resolve(ExperimentKind::SerGrid)?;
            let out = run_ser_grid(&cfg)?;
            emit(&out.csv, cfg.out.as_deref())?;
            eprintln!("# ser-grid finished in {:.2}s", out.wall_time);
        }
        Command::Prr(args) => {
            let cfg = args.resolve(ExperimentKind::Prr)?;
            let out = run_prr(&cfg)?;
            emit(&out.csv, cfg.out.as_deref())?;
            eprintln!("# prr finished in {:.2}s", out.wall_time);
        }
        Command::Joint(args) => {
            let cfg = args.resolve(ExperimentKind::Joint)?;
            let out = run_joint(&cfg)?;
            emit(&out.csv, cfg.out.as_deref())?;
            if let (Some(trace), Some(path)) = (&out.trace_csv, &cfg.trace_out) {
                emit(trace, Some(path))?;
            }
            eprintln!("# joint finished in {:.2}s", out.wall_time);
        }
        Command::Sparsity(args) => {
            let cfg = args.resolve(ExperimentKind::Sparsity)?;
            let out = run_sparsity(&cfg)?;
            emit(&out.csv, cfg.out.as_deref())?;
            eprintln!("# sparsity finished in {:.2}s", out.wall_time);
        }
        Command::BaselineLossless(args) => {
            let cfg = args.resolve(ExperimentKind::BaselineLossless)?;
            let out = run_baseline_lossless(&cfg)?;
            emit(&out.csv, cfg.out.as_deref())?;
            eprintln!("# baseline-lossless finished in {:.2}s", out.wall_time);
        }
        Command::Bandwidth(args) => {
            for &a in &args.alpha {
                if !(0.0..1.0).contains(&a) {
                    return Err(ConfigError(format!("alpha must be in [0,1), got {a}")).into());
                }
            }
            if args.channels == 0 || args.bits == 0 || args.rate == 0 {
                return Err(
                    ConfigError("channels, bits, and rate must be positive".into()).into(),
                );
            }
            let rows = bandwidth_report(args.channels, args.bits, args.rate, &args.alpha);
            emit(&bandwidth_csv(&rows), args.out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
