//! Deterministic, seedable AWGN channel with multi-gateway fan-out.
//!
//! SNR is defined per complex sample, in-band: the noise variance is
//! `σ² = mean(|x|²) · 10^(−snr_db/10)`, split evenly between the two
//! quadratures. Every operation is a pure function of its seed.

use crate::{Complex, Error, IqVector, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Timing relationship between the transmitter and the receive window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingOffset {
    /// Window starts τ samples into the symbol, τ ∈ [0, n).
    Fixed(usize),
    /// Offset drawn per trial by the experiment driver.
    Random,
}

/// Per-gateway channel description.
#[derive(Debug, Clone, Copy)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub timing_offset: TimingOffset,
    pub noise_seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, noise_seed: u64) -> Self {
        Self { snr_db, timing_offset: TimingOffset::Fixed(0), noise_seed }
    }
}

/// Adds circularly-symmetric complex Gaussian noise at the requested SNR.
///
/// `snr_db = +∞` is the noiseless flag and returns the input unchanged.
/// Deterministic: the same `(x, snr_db, seed)` always produces the same
/// output.
pub fn apply_awgn(x: &[Complex], snr_db: f64, seed: u64) -> Result<IqVector> {
    if x.is_empty() {
        return Err(Error::Param("apply_awgn needs a non-empty input".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok(x.to_vec());
    }
    if !snr_db.is_finite() {
        return Err(Error::Param(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    let power = x.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
    let sigma_sq = power * 10f64.powf(-snr_db / 10.0);
    // σ/√2 per quadrature keeps the complex variance at σ².
    let s = (sigma_sq / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = x
        .iter()
        .map(|c| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c + Complex::new(s * re, s * im)
        })
        .collect();
    Ok(out)
}

/// Fans one transmitted signal out to G gateways with independent noise.
///
/// Gateway g's noise stream is seeded with `config.noise_seed ^ g`, so a
/// shared master seed still yields independent realizations per gateway
/// while staying reproducible.
pub fn broadcast(x: &[Complex], configs: &[ChannelConfig]) -> Result<Vec<IqVector>> {
    if configs.is_empty() {
        return Err(Error::Param("broadcast needs at least one gateway config".into()));
    }
    configs
        .iter()
        .enumerate()
        .map(|(g, cfg)| apply_awgn(x, cfg.snr_db, cfg.noise_seed ^ g as u64))
        .collect()
}

/// Quantizes IQ samples to signed 12-bit integers (SX1301-style front
/// end): each component is scaled by `2047/full_scale` and clamped to
/// [−2048, 2047].
pub fn quantize_12bit(x: &[Complex], full_scale: f64) -> Result<Vec<(i16, i16)>> {
    if !(full_scale > 0.0) {
        return Err(Error::Param(format!("full_scale must be > 0, got {full_scale}")));
    }
    let scale = 2047.0 / full_scale;
    let q = |v: f64| -> i16 { (v * scale).round().clamp(-2048.0, 2047.0) as i16 };
    Ok(x.iter().map(|c| (q(c.re), q(c.im))).collect())
}

/// Reverses [`quantize_12bit`] up to the quantization step.
pub fn dequantize_12bit(q: &[(i16, i16)], full_scale: f64) -> IqVector {
    let scale = full_scale / 2047.0;
    q.iter()
        .map(|&(re, im)| Complex::new(re as f64 * scale, im as f64 * scale))
        .collect()
}

/// Packs 12-bit IQ pairs into bytes: each pair is 24 bits, so one sample
/// occupies exactly 3 bytes. This is the raw payload a lossless fronthaul
/// baseline has to ship per sample.
pub fn pack_iq_12bit(q: &[(i16, i16)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(q.len() * 3);
    for &(re, im) in q {
        let u = (re as i32 & 0xFFF) as u32;
        let v = (im as i32 & 0xFFF) as u32;
        let word = (u << 12) | v;
        out.push(((word >> 16) & 0xFF) as u8);
        out.push(((word >> 8) & 0xFF) as u8);
        out.push((word & 0xFF) as u8);
    }
    out
}

/// Reverses [`pack_iq_12bit`].
pub fn unpack_iq_12bit(bytes: &[u8]) -> Vec<(i16, i16)> {
    let sign_extend = |v: u32| -> i16 {
        if v & 0x800 != 0 {
            (v | 0xFFFF_F000) as i32 as i16
        } else {
            v as i16
        }
    };
    bytes
        .chunks_exact(3)
        .map(|c| {
            let word = ((c[0] as u32) << 16) | ((c[1] as u32) << 8) | c[2] as u32;
            (sign_extend((word >> 12) & 0xFFF), sign_extend(word & 0xFFF))
        })
        .collect()
}
