//! Symbol geometry and packet plumbing shared by every module.

use crate::{Error, Result};

/// Fixed channel bandwidth in Hz; the stream is critically sampled at
/// `Fs = BW`, so one chip occupies exactly one sample.
pub const BANDWIDTH_HZ: f64 = 125_000.0;

/// Spreading factor / bandwidth bundle fixing the symbol geometry.
///
/// `n = 2^sf` complex samples per symbol at critical sampling; the symbol
/// duration is `n / bw` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    /// Spreading factor, bits per symbol; restricted to 7..=10.
    pub sf: u32,
    /// Bandwidth in Hz (fixed at 125 kHz).
    pub bw: f64,
}

impl ChirpParams {
    /// Builds params for a spreading factor in `{7, 8, 9, 10}`.
    pub fn new(sf: u32) -> Result<Self> {
        if !(7..=10).contains(&sf) {
            return Err(Error::Param(format!("sf must be in 7..=10, got {sf}")));
        }
        Ok(Self { sf, bw: BANDWIDTH_HZ })
    }

    /// Samples per symbol, `n = 2^sf`.
    pub fn n(&self) -> usize {
        1usize << self.sf
    }

    /// Symbol duration in seconds, `t = n / bw`.
    pub fn symbol_duration(&self) -> f64 {
        self.n() as f64 / self.bw
    }
}

/// Chirp ramp direction. Payload symbols are up-chirps; the down variant
/// exists for the dictionary-fallback path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

/// One modulated symbol: a cyclic shift `value ∈ [0, 2^sf)` of the base ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbol {
    pub value: u32,
    pub direction: Direction,
}

impl Symbol {
    pub fn up(value: u32) -> Self {
        Self { value, direction: Direction::Up }
    }
}

/// A payload-only packet (no preamble/SFD modeling; synchronization state
/// is an explicit simulation parameter elsewhere).
#[derive(Debug, Clone)]
pub struct Packet {
    pub params: ChirpParams,
    pub symbols: Vec<Symbol>,
    /// Informational only; does not scale the unit-amplitude baseband.
    pub tx_power_dbm: f64,
}

impl Packet {
    /// Packet of up-chirp symbols; `values` must be non-empty and in range.
    pub fn from_values(params: ChirpParams, values: &[u32]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Param("packet needs at least one symbol".into()));
        }
        let n = params.n() as u32;
        if let Some(v) = values.iter().find(|&&v| v >= n) {
            return Err(Error::Param(format!("symbol value {v} out of range for sf={}", params.sf)));
        }
        Ok(Self {
            params,
            symbols: values.iter().map(|&v| Symbol::up(v)).collect(),
            tx_power_dbm: 14.0,
        })
    }
}
