//! The six experiment drivers behind the CLI subcommands.
//!
//! Every driver resolves its grid cells deterministically, fans trials
//! out over rayon with per-trial derived seeds (see [`crate::seed`]),
//! reduces in trial order, and renders a CSV whose bytes depend only on
//! the config and master seed. Wall-clock timings are returned to the
//! caller for stderr reporting and never enter the CSV.

use crate::config::{ExperimentConfig, ExperimentKind, RatioSpec};
use crate::csvout::{render, MetricRow};
use crate::dct::dct2_ortho;
use crate::seed::{mix, uniform_pow2};
use anyhow::{Context, Result};
use loracs::channel::apply_awgn;
use loracs::cs::{compress, select_ratio, PHI_CHUNK};
use loracs::fusion::{estimate_snr, joint_demodulate, GatewayObservation, WeightingRegistry};
use loracs::params::{ChirpParams, Direction, Packet};
use loracs::phy::{extract_block, make_chirp, modulate_packet};
use loracs::recovery::{eps_for_noise, CompressedDecoder, SolverRegistry};
use rayon::prelude::*;
use rustfft_shim::fft_mags;
use std::time::Instant;

/// Per-complex-sample noise std for a unit-power signal at `snr_db`.
fn sigma_for(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 20.0)
    }
}

/// One resolved grid cell: a concrete (sf, snr, measurement count).
#[derive(Debug, Clone, Copy)]
struct Cell {
    sf: u32,
    snr_db: f64,
    m_total: usize,
    alpha: f64,
}

/// Expands the config's sf × snr (× ratio) axes into concrete cells.
fn resolve_cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &sf in &cfg.sf {
        let n = 1usize << sf;
        for &snr_db in &cfg.snr_db {
            match &cfg.ratio {
                RatioSpec::Named(_) => {
                    let policy = cfg
                        .ratio
                        .policy(cfg.sync)
                        .expect("validated named policy");
                    let (m_total, alpha) = select_ratio(sf, snr_db, policy)?;
                    cells.push(Cell { sf, snr_db, m_total, alpha });
                }
                RatioSpec::List(fracs) => {
                    for &f in fracs {
                        let m_total = (f * n as f64).round() as usize;
                        cells.push(Cell { sf, snr_db, m_total, alpha: 1.0 - f });
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn decoder_for(cfg: &ExperimentConfig, cell: &Cell) -> Result<CompressedDecoder> {
    let params = ChirpParams::new(cell.sf)?;
    let chunks = params.n() / PHI_CHUNK;
    let m = cell.m_total / chunks;
    let solver = SolverRegistry::default()
        .create(&cfg.solver)
        .with_context(|| format!("unknown solver {}", cfg.solver))?;
    Ok(CompressedDecoder::new(params, m, cfg.phi_seed, solver)?)
}

/// A finished run: the rendered CSV plus structured rows for callers
/// (tests, summaries) and the total wall time for stderr reporting.
#[derive(Debug)]
pub struct RunOutput {
    pub csv: String,
    pub rows: Vec<MetricRow>,
    pub wall_time: f64,
}

/// Symbol-error-rate grid over sf × snr (× ratio) cells.
///
/// Sync cells decode aligned symbols (τ=0); unsync cells decode windows
/// at uniformly random τ from a two-symbol stream, counting a decode as
/// correct when it lands on either constituent's dechirped bin
/// `(λ + 2τ) mod n`.
pub fn run_ser_grid(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let cells = resolve_cells(cfg)?;
    let mut rows = Vec::with_capacity(cells.len());
    for (ci, cell) in cells.iter().enumerate() {
        let t0 = Instant::now();
        let dec = decoder_for(cfg, cell)?;
        let n = dec.params.n();
        let eps = eps_for_noise(cell.m_total, sigma_for(cell.snr_db));
        let errors: usize = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let salt = |tag: u64| mix(cfg.seed, &[ci as u64, t as u64, tag]);
                if cfg.sync {
                    let lam = uniform_pow2(cfg.seed, &[ci as u64, t as u64, 0], n) as u32;
                    let x = make_chirp(dec.params, lam, Direction::Up).expect("valid symbol");
                    let noisy = apply_awgn(&x, cell.snr_db, salt(1)).expect("awgn");
                    let y = compress(&noisy, &dec.phi).expect("compress");
                    let (value, _) = dec
                        .demodulate_known(&y, Direction::Up, eps, cfg.k_max)
                        .expect("decode");
                    usize::from(value != lam)
                } else {
                    let a = uniform_pow2(cfg.seed, &[ci as u64, t as u64, 0], n) as u32;
                    let b = uniform_pow2(cfg.seed, &[ci as u64, t as u64, 2], n) as u32;
                    let tau = uniform_pow2(cfg.seed, &[ci as u64, t as u64, 3], n);
                    let packet = Packet::from_values(dec.params, &[a, b]).expect("packet");
                    let stream = modulate_packet(&packet).expect("modulate");
                    let noisy = apply_awgn(&stream, cell.snr_db, salt(1)).expect("awgn");
                    let block = extract_block(&noisy, tau, dec.params).expect("window");
                    let y = compress(&block, &dec.phi).expect("compress");
                    let (value, _) = dec
                        .demodulate_known(&y, Direction::Up, eps, cfg.k_max)
                        .expect("decode");
                    let hit = if tau == 0 {
                        value == a
                    } else {
                        let v = value as usize;
                        v == (a as usize + 2 * tau) % n || v == (b as usize + 2 * tau) % n
                    };
                    usize::from(!hit)
                }
            })
            .sum();
        rows.push(MetricRow {
            sf: cell.sf,
            snr_db: cell.snr_db,
            alpha: cell.alpha,
            m_total: cell.m_total,
            g: 1,
            scheme: String::new(),
            kind: if cfg.sync { "sync" } else { "unsync" }.into(),
            sync: cfg.sync,
            trials: cfg.trials,
            errors,
            ser: errors as f64 / cfg.trials as f64,
            prr: None,
            wall_time: t0.elapsed().as_secs_f64(),
        });
    }
    let lines: Vec<String> = rows.iter().map(MetricRow::to_csv_line).collect();
    let csv = render(ExperimentKind::SerGrid.name(), cfg, MetricRow::HEADER, &lines);
    Ok(RunOutput { csv, rows, wall_time: started.elapsed().as_secs_f64() })
}

/// Packet-reception-rate grid: a packet of `packet_len` symbols counts
/// only when every symbol decodes correctly (no FEC). Synchronized
/// reception only — packet alignment is the framing layer's job.
pub fn run_prr(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    if !cfg.sync {
        anyhow::bail!("prr supports synchronized reception only (sync = true)");
    }
    let cells = resolve_cells(cfg)?;
    let l = cfg.packet_len;
    let mut rows = Vec::with_capacity(cells.len());
    for (ci, cell) in cells.iter().enumerate() {
        let t0 = Instant::now();
        let dec = decoder_for(cfg, cell)?;
        let n = dec.params.n();
        let eps = eps_for_noise(cell.m_total, sigma_for(cell.snr_db));
        let (sym_errors, packets_ok): (usize, usize) = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let values: Vec<u32> = (0..l)
                    .map(|s| uniform_pow2(cfg.seed, &[ci as u64, t as u64, 0, s as u64], n) as u32)
                    .collect();
                let packet = Packet::from_values(dec.params, &values).expect("packet");
                let stream = modulate_packet(&packet).expect("modulate");
                let noisy = apply_awgn(
                    &stream,
                    cell.snr_db,
                    mix(cfg.seed, &[ci as u64, t as u64, 1]),
                )
                .expect("awgn");
                let mut errs = 0usize;
                for (s, &lam) in values.iter().enumerate() {
                    let block = extract_block(&noisy, s * n, dec.params).expect("window");
                    let y = compress(&block, &dec.phi).expect("compress");
                    let (value, _) = dec
                        .demodulate_known(&y, Direction::Up, eps, cfg.k_max)
                        .expect("decode");
                    if value != lam {
                        errs += 1;
                    }
                }
                (errs, usize::from(errs == 0))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        rows.push(MetricRow {
            sf: cell.sf,
            snr_db: cell.snr_db,
            alpha: cell.alpha,
            m_total: cell.m_total,
            g: 1,
            scheme: String::new(),
            kind: "packet".into(),
            sync: true,
            trials: cfg.trials,
            errors: sym_errors,
            ser: sym_errors as f64 / (cfg.trials * l) as f64,
            prr: Some(packets_ok as f64 / cfg.trials as f64),
            wall_time: t0.elapsed().as_secs_f64(),
        });
    }
    let lines: Vec<String> = rows.iter().map(MetricRow::to_csv_line).collect();
    let csv = render(ExperimentKind::Prr.name(), cfg, MetricRow::HEADER, &lines);
    Ok(RunOutput { csv, rows, wall_time: started.elapsed().as_secs_f64() })
}

/// One row of the joint study: either a single gateway's solo
/// performance (`kind == "single"`) or a weighting scheme's fused
/// performance (`kind == "joint"`).
#[derive(Debug, Clone)]
pub struct JointRow {
    pub sf: u32,
    pub point: usize,
    pub snr_set: Vec<f64>,
    pub alpha: f64,
    pub m_total: usize,
    pub g: usize,
    pub scheme: String,
    pub kind: String,
    pub trials: usize,
    pub sym_errors: usize,
    pub ser: f64,
    pub prr: f64,
    /// joint PRR / best single PRR (joint rows only).
    pub improve_best: Option<f64>,
    /// joint PRR / mean single PRR (joint rows only).
    pub improve_mean: Option<f64>,
}

impl JointRow {
    pub const HEADER: &'static str =
        "sf,point,snr_set,alpha,m_total,g,scheme,kind,trials,sym_errors,ser,prr,improve_best,improve_mean";

    fn to_csv_line(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{},{},{},{},{},{},{:.6},{:.6},{},{}",
            self.sf,
            self.point,
            self.snr_set
                .iter()
                .map(|s| format!("{s:.2}"))
                .collect::<Vec<_>>()
                .join(";"),
            self.alpha,
            self.m_total,
            self.g,
            self.scheme,
            self.kind,
            self.trials,
            self.sym_errors,
            self.ser,
            self.prr,
            fmt_opt(self.improve_best),
            fmt_opt(self.improve_mean),
        )
    }
}

#[derive(Debug)]
pub struct JointOutput {
    pub csv: String,
    pub rows: Vec<JointRow>,
    pub trace_csv: Option<String>,
    pub wall_time: f64,
}

/// Per-trial tallies inside one joint operating point.
struct JointTrial {
    /// Symbol errors per gateway (index = gateway id).
    single_errs: Vec<usize>,
    /// Packet-correct flag per gateway.
    single_ok: Vec<bool>,
    /// Symbol errors per scheme (index = scheme position).
    joint_errs: Vec<usize>,
    /// Packet-correct flag per scheme.
    joint_ok: Vec<bool>,
    trace: Vec<String>,
}

/// Multi-gateway joint-decoding study.
///
/// For each operating point (one per `gateway_snr_db` entry) the same
/// packet is broadcast to G gateways with independent noise; single and
/// joint PRR/SER are tallied per weighting scheme, with improvement
/// factors (joint over best single, joint over mean single) on the joint
/// rows. With `oracle_snr` the true linear SNR feeds the weights;
/// otherwise the residual-based estimator does.
pub fn run_joint(cfg: &ExperimentConfig) -> Result<JointOutput> {
    let started = Instant::now();
    let l = cfg.packet_len;
    let weightings = WeightingRegistry::default();
    let mut rows = Vec::new();
    let mut trace_lines: Vec<String> = Vec::new();
    let want_trace = cfg.trace_out.is_some();
    for &sf in &cfg.sf {
        let params = ChirpParams::new(sf)?;
        let n = params.n();
        for (p, snr_set) in cfg.gateway_snr_db.iter().enumerate() {
            let g_count = snr_set.len();
            // Ratio lookup for named policies keys off the mean gateway
            // SNR; explicit lists are used as-is.
            let (m_total, alpha) = match &cfg.ratio {
                RatioSpec::Named(_) => {
                    let mean = snr_set.iter().sum::<f64>() / g_count as f64;
                    select_ratio(sf, mean, cfg.ratio.policy(true).expect("validated"))?
                }
                RatioSpec::List(fracs) => {
                    let f = fracs[0];
                    (((f * n as f64).round()) as usize, 1.0 - f)
                }
            };
            let cell = Cell { sf, snr_db: 0.0, m_total, alpha };
            let dec = decoder_for(cfg, &cell)?;
            let ci = (rows.len() + 1) as u64; // unique salt per point
            let gammas: Vec<f64> = snr_set.iter().map(|s| 10f64.powf(s / 10.0)).collect();
            let trials: Vec<JointTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let values: Vec<u32> = (0..l)
                        .map(|s| {
                            uniform_pow2(cfg.seed, &[ci, p as u64, t as u64, s as u64], n) as u32
                        })
                        .collect();
                    let packet = Packet::from_values(params, &values).expect("packet");
                    let stream = modulate_packet(&packet).expect("modulate");
                    let base_seed = mix(cfg.seed, &[ci, p as u64, t as u64, 1]);
                    // Per-gateway receptions: shared signal, seed ⊕ id.
                    let received: Vec<Vec<loracs::Complex>> = (0..g_count)
                        .map(|g| {
                            apply_awgn(&stream, snr_set[g], base_seed ^ g as u64).expect("awgn")
                        })
                        .collect();
                    let mut single_errs = vec![0usize; g_count];
                    let mut joint_errs = vec![0usize; cfg.schemes.len()];
                    let mut trace = Vec::new();
                    for (s, &lam) in values.iter().enumerate() {
                        let ys: Vec<_> = received
                            .iter()
                            .map(|rx| {
                                let block = extract_block(rx, s * n, params).expect("window");
                                compress(&block, &dec.phi).expect("compress")
                            })
                            .collect();
                        let obs: Vec<GatewayObservation> = ys
                            .iter()
                            .enumerate()
                            .map(|(g, y)| {
                                let gamma = if cfg.oracle_snr {
                                    gammas[g]
                                } else {
                                    let eps = eps_for_noise(m_total, sigma_for(snr_set[g]));
                                    let (prof, _) = dec
                                        .profile(y, Direction::Up, eps, cfg.k_max)
                                        .expect("profile");
                                    estimate_snr(y, &prof)
                                };
                                GatewayObservation::new(y.clone(), gamma, g).expect("gamma > 0")
                            })
                            .collect();
                        let mut joint_values = Vec::with_capacity(cfg.schemes.len());
                        let mut singles: Option<Vec<u32>> = None;
                        for (wi, scheme_name) in cfg.schemes.iter().enumerate() {
                            let scheme =
                                weightings.create(scheme_name).expect("validated scheme");
                            // eps = 0 forces a fixed k_max-atom budget per
                            // gateway, so fused residuals stay comparable
                            // across heterogeneous gateway SNRs.
                            let joint = joint_demodulate(
                                &obs,
                                scheme.as_ref(),
                                &dec,
                                0.0,
                                cfg.k_max,
                                cfg.fusion.into(),
                            )
                            .expect("joint decode");
                            if joint.value != lam {
                                joint_errs[wi] += 1;
                            }
                            if singles.is_none() {
                                singles =
                                    Some(joint.per_gateway.iter().map(|d| d.value).collect());
                            }
                            joint_values.push(joint.value);
                        }
                        let singles = singles.expect("at least one scheme");
                        for (g, &v) in singles.iter().enumerate() {
                            if v != lam {
                                single_errs[g] += 1;
                            }
                        }
                        if want_trace {
                            for (wi, scheme_name) in cfg.schemes.iter().enumerate() {
                                trace.push(format!(
                                    "{},{},{},{},{},{},{},{}",
                                    t,
                                    s,
                                    g_count,
                                    scheme_name,
                                    snr_set
                                        .iter()
                                        .map(|v| format!("{v:.2}"))
                                        .collect::<Vec<_>>()
                                        .join(";"),
                                    singles
                                        .iter()
                                        .map(|v| v.to_string())
                                        .collect::<Vec<_>>()
                                        .join(";"),
                                    joint_values[wi],
                                    lam
                                ));
                            }
                        }
                    }
                    JointTrial {
                        single_ok: single_errs.iter().map(|&e| e == 0).collect(),
                        joint_ok: joint_errs.iter().map(|&e| e == 0).collect(),
                        single_errs,
                        joint_errs,
                        trace,
                    }
                })
                .collect();

            // Deterministic reduction in trial order.
            let mut single_errs = vec![0usize; g_count];
            let mut single_pkts = vec![0usize; g_count];
            let mut joint_errs = vec![0usize; cfg.schemes.len()];
            let mut joint_pkts = vec![0usize; cfg.schemes.len()];
            for trial in &trials {
                for g in 0..g_count {
                    single_errs[g] += trial.single_errs[g];
                    single_pkts[g] += usize::from(trial.single_ok[g]);
                }
                for wi in 0..cfg.schemes.len() {
                    joint_errs[wi] += trial.joint_errs[wi];
                    joint_pkts[wi] += usize::from(trial.joint_ok[wi]);
                }
                trace_lines.extend(trial.trace.iter().cloned());
            }
            let total_syms = cfg.trials * l;
            let single_prr: Vec<f64> = single_pkts
                .iter()
                .map(|&ok| ok as f64 / cfg.trials as f64)
                .collect();
            let best_single = single_prr.iter().cloned().fold(0.0f64, f64::max);
            let mean_single = single_prr.iter().sum::<f64>() / g_count as f64;
            for g in 0..g_count {
                rows.push(JointRow {
                    sf,
                    point: p,
                    snr_set: snr_set.clone(),
                    alpha,
                    m_total,
                    g,
                    scheme: String::new(),
                    kind: "single".into(),
                    trials: cfg.trials,
                    sym_errors: single_errs[g],
                    ser: single_errs[g] as f64 / total_syms as f64,
                    prr: single_prr[g],
                    improve_best: None,
                    improve_mean: None,
                });
            }
            for (wi, scheme_name) in cfg.schemes.iter().enumerate() {
                let prr = joint_pkts[wi] as f64 / cfg.trials as f64;
                rows.push(JointRow {
                    sf,
                    point: p,
                    snr_set: snr_set.clone(),
                    alpha,
                    m_total,
                    g: g_count,
                    scheme: scheme_name.clone(),
                    kind: "joint".into(),
                    trials: cfg.trials,
                    sym_errors: joint_errs[wi],
                    ser: joint_errs[wi] as f64 / total_syms as f64,
                    prr,
                    improve_best: Some(if best_single > 0.0 {
                        prr / best_single
                    } else {
                        f64::INFINITY
                    }),
                    improve_mean: Some(if mean_single > 0.0 {
                        prr / mean_single
                    } else {
                        f64::INFINITY
                    }),
                });
            }
        }
    }
    let lines: Vec<String> = rows.iter().map(JointRow::to_csv_line).collect();
    let csv = render(ExperimentKind::Joint.name(), cfg, JointRow::HEADER, &lines);
    let trace_csv = if want_trace {
        let header = "trial,symbol,g,scheme,snr_set,gateway_lambda,joint_lambda,lambda_true";
        Some(render("joint-trace", cfg, header, &trace_lines))
    } else {
        None
    };
    Ok(JointOutput { csv, rows, trace_csv, wall_time: started.elapsed().as_secs_f64() })
}

/// One symbol's significant-coefficient counts in the three domains.
#[derive(Debug, Clone)]
pub struct SparsityRow {
    pub sf: u32,
    pub snr_db: f64,
    pub symbol: usize,
    pub psi_count: usize,
    pub dft_count: usize,
    pub dct_count: usize,
}

#[derive(Debug)]
pub struct SparsityOutput {
    pub csv: String,
    pub rows: Vec<SparsityRow>,
    pub wall_time: f64,
}

/// Counts coefficients with normalized magnitude above `thresh`.
fn significant(mags: &[f64], thresh: f64) -> usize {
    let max = mags.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    mags.iter().filter(|&&m| m > thresh * max).count()
}

/// Sparsity comparison: per noisy symbol, the count of significant
/// (>0.1 normalized) coefficients in the chirp dictionary, DFT, and DCT
/// domains, plus the full sorted magnitude profile of the first symbol.
pub fn run_sparsity(cfg: &ExperimentConfig) -> Result<SparsityOutput> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut profile_lines: Vec<String> = Vec::new();
    for &sf in &cfg.sf {
        let params = ChirpParams::new(sf)?;
        let n = params.n();
        let dict = loracs::cs::build_dictionary(params, Direction::Up)?;
        for &snr_db in &cfg.snr_db {
            for symbol in 0..cfg.trials {
                let salt = |tag: u64| mix(cfg.seed, &[sf as u64, symbol as u64, tag]);
                let block = if cfg.sync {
                    let lam = uniform_pow2(cfg.seed, &[sf as u64, symbol as u64, 0], n) as u32;
                    let x = make_chirp(params, lam, Direction::Up)?;
                    apply_awgn(&x, snr_db, salt(1))?
                } else {
                    let a = uniform_pow2(cfg.seed, &[sf as u64, symbol as u64, 0], n) as u32;
                    let b = uniform_pow2(cfg.seed, &[sf as u64, symbol as u64, 2], n) as u32;
                    let tau = 1 + uniform_pow2(cfg.seed, &[sf as u64, symbol as u64, 3], n / 2);
                    let packet = Packet::from_values(params, &[a, b])?;
                    let stream = modulate_packet(&packet)?;
                    let noisy = apply_awgn(&stream, snr_db, salt(1))?;
                    extract_block(&noisy, tau, params)?
                };
                let psi_mags: Vec<f64> = dict.analyze(&block)?.iter().map(|c| c.norm()).collect();
                let dft_mags = fft_mags(&block);
                let re: Vec<f64> = block.iter().map(|c| c.re).collect();
                let im: Vec<f64> = block.iter().map(|c| c.im).collect();
                let dct_re = dct2_ortho(&re);
                let dct_im = dct2_ortho(&im);
                let dct_mags: Vec<f64> = dct_re
                    .iter()
                    .zip(dct_im.iter())
                    .map(|(a, b)| a.hypot(*b))
                    .collect();
                rows.push(SparsityRow {
                    sf,
                    snr_db,
                    symbol,
                    psi_count: significant(&psi_mags, 0.1),
                    dft_count: significant(&dft_mags, 0.1),
                    dct_count: significant(&dct_mags, 0.1),
                });
                if symbol == 0 {
                    for (domain, mags) in
                        [("psi", &psi_mags), ("dft", &dft_mags), ("dct", &dct_mags)]
                    {
                        let max = mags.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
                        let mut sorted: Vec<f64> = mags.iter().map(|m| m / max).collect();
                        sorted.sort_by(|a, b| b.total_cmp(a));
                        for (rank, v) in sorted.iter().enumerate() {
                            profile_lines.push(format!(
                                "profile,{sf},{snr_db:.6},{domain},{rank},{v:.6},,,"
                            ));
                        }
                    }
                }
            }
        }
    }
    let count_lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "count,{},{:.6},,,,{},{},{}",
                r.sf, r.snr_db, r.psi_count, r.dft_count, r.dct_count
            )
        })
        .collect();
    let header = "section,sf,snr_db,domain,rank,value,psi_count,dft_count,dct_count";
    let mut lines = count_lines;
    lines.extend(profile_lines);
    let csv = render(ExperimentKind::Sparsity.name(), cfg, header, &lines);
    Ok(SparsityOutput { csv, rows, wall_time: started.elapsed().as_secs_f64() })
}

/// Outcome of the lossless-baseline measurement.
#[derive(Debug, Clone)]
pub struct BaselineRow {
    pub sf: u32,
    pub snr_db: f64,
    pub samples: usize,
    pub raw_bytes: usize,
    pub compressed_bytes: usize,
    /// 1 − compressed/raw.
    pub ratio: f64,
}

#[derive(Debug)]
pub struct BaselineOutput {
    pub csv: String,
    pub rows: Vec<BaselineRow>,
    pub wall_time: f64,
}

/// DEFLATE compression ratio of a 12-bit-quantized IQ byte stream.
pub fn deflate_ratio(bytes: &[u8]) -> Result<(usize, usize)> {
    use flate2::write::DeflateEncoder;
    use flate2::Compression;
    use std::io::Write;
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
    enc.write_all(bytes)?;
    let compressed = enc.finish()?;
    Ok((bytes.len(), compressed.len()))
}

/// Lossless fronthaul baseline: what a generic LZ77-family compressor
/// saves on quantized LoRa IQ. Chirps occupy the full band, so the
/// saving is small — the paper's motivation for compressed sensing.
pub fn run_baseline_lossless(cfg: &ExperimentConfig) -> Result<BaselineOutput> {
    let started = Instant::now();
    let mut rows = Vec::new();
    for &sf in &cfg.sf {
        let params = ChirpParams::new(sf)?;
        let n = params.n();
        for &snr_db in &cfg.snr_db {
            let values: Vec<u32> = (0..cfg.trials)
                .map(|s| uniform_pow2(cfg.seed, &[sf as u64, s as u64], n) as u32)
                .collect();
            let packet = Packet::from_values(params, &values)?;
            let stream = modulate_packet(&packet)?;
            let noisy = apply_awgn(&stream, snr_db, mix(cfg.seed, &[sf as u64, 1]))?;
            let full_scale = noisy
                .iter()
                .map(|c| c.re.abs().max(c.im.abs()))
                .fold(f64::MIN_POSITIVE, f64::max);
            let q = loracs::channel::quantize_12bit(&noisy, full_scale)?;
            let bytes = loracs::channel::pack_iq_12bit(&q);
            let (raw, compressed) = deflate_ratio(&bytes)?;
            rows.push(BaselineRow {
                sf,
                snr_db,
                samples: noisy.len(),
                raw_bytes: raw,
                compressed_bytes: compressed,
                ratio: 1.0 - compressed as f64 / raw as f64,
            });
        }
    }
    let header = "sf,snr_db,samples,raw_bytes,compressed_bytes,ratio";
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{:.6},{},{},{},{:.6}",
                r.sf, r.snr_db, r.samples, r.raw_bytes, r.compressed_bytes, r.ratio
            )
        })
        .collect();
    let csv = render(ExperimentKind::BaselineLossless.name(), cfg, header, &lines);
    Ok(BaselineOutput { csv, rows, wall_time: started.elapsed().as_secs_f64() })
}

/// One fronthaul bandwidth line: raw and compressed bit rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthRow {
    pub channels: u64,
    pub bits_per_sample: u64,
    pub sample_rate_hz: u64,
    pub alpha: f64,
    pub raw_bps: f64,
    pub compressed_bps: f64,
}

/// Fronthaul bandwidth arithmetic: `raw = channels·bits·rate`,
/// `compressed = raw·(1−α)`.
pub fn bandwidth_report(
    channels: u64,
    bits_per_sample: u64,
    sample_rate_hz: u64,
    alphas: &[f64],
) -> Vec<BandwidthRow> {
    let raw = (channels * bits_per_sample * sample_rate_hz) as f64;
    alphas
        .iter()
        .map(|&alpha| BandwidthRow {
            channels,
            bits_per_sample,
            sample_rate_hz,
            alpha,
            raw_bps: raw,
            compressed_bps: raw * (1.0 - alpha),
        })
        .collect()
}

/// Renders bandwidth rows as CSV (no config hash: pure arithmetic).
pub fn bandwidth_csv(rows: &[BandwidthRow]) -> String {
    let mut out = String::from("channels,bits_per_sample,sample_rate_hz,alpha,raw_bps,compressed_bps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.3},{:.3}\n",
            r.channels, r.bits_per_sample, r.sample_rate_hz, r.alpha, r.raw_bps, r.compressed_bps
        ));
    }
    out
}

/// Magnitudes of the unitary DFT, local shim so the sparsity study does
/// not depend on dictionary internals.
mod rustfft_shim {
    use loracs::Complex;
    use rustfft::FftPlanner;

    pub fn fft_mags(x: &[Complex]) -> Vec<f64> {
        let mut buf = x.to_vec();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let scale = 1.0 / (buf.len() as f64).sqrt();
        buf.iter().map(|c| c.norm() * scale).collect()
    }
}
