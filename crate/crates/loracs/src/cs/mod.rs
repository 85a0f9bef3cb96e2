//! Compressive-sensing front end: the chirp dictionary Ψ, the shared ±1
//! Bernoulli measurement matrix Φ, chunked edge-side compression, and the
//! SF/SNR-driven compression-ratio policy.

mod dictionary;
mod measurement;
mod ratio;

pub use dictionary::{build_dictionary, Dictionary};
pub use measurement::{
    build_measurement, compress, compression_ratio, min_measurements, CompressedVector,
    MeasurementMatrix, PHI_CHUNK,
};
pub use ratio::{select_ratio, RatioMode, RatioPolicy, SnrBand, TABLE1_SYNC, TABLE2_UNSYNC};
