//! Chirp-spread-spectrum (CSS) physical layer with compressive-sensing
//! fronthaul compression and cloud-side sparse recovery.
//!
//! The crate models the edge-to-cloud split of an LPWAN receive chain:
//!
//! * [`phy`] — CSS symbol synthesis and the classical dechirp/FFT
//!   demodulator used as ground truth.
//! * [`cs`] — the chirp dictionary Ψ, the shared ±1 Bernoulli measurement
//!   matrix Φ, chunked compression, and compression-ratio policies.
//! * [`recovery`] — real-lifted ℓ1 sparse recovery (greedy and proximal
//!   backends behind one trait), residual profiles, and compressed-domain
//!   demodulation.
//! * [`fusion`] — multi-gateway residual fusion with pluggable SNR
//!   weighting schemes (EGC / √SNR / MRC / SNR²).
//! * [`channel`] — deterministic, seedable AWGN channel with timing
//!   offsets and multi-gateway fan-out.
//! * [`io`] — interleaved float32 IQ file I/O and debug CSV export.
//!
//! All randomness is reproducible: measurement matrices regenerate
//! bit-exactly from a 64-bit seed, and noise is drawn from per-trial
//! seeded ChaCha streams.

pub mod channel;
pub mod cs;
pub mod fusion;
pub mod io;
pub mod linalg;
pub mod params;
pub mod phy;
pub mod recovery;

pub use params::{ChirpParams, Direction, Packet, Symbol};

/// Complex baseband sample type used throughout the crate.
pub type Complex = num_complex::Complex<f64>;

/// A block of complex baseband samples (a symbol, a window, or a stream).
pub type IqVector = Vec<Complex>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    Param(String),
    /// Vector/matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
