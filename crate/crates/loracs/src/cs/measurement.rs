//! The shared ±1 Bernoulli measurement matrix Φ and chunked compression.
//!
//! Only one matrix shape family exists: Φ₇, with 128 columns (the SF7
//! symbol length). Longer symbols are compressed by splitting them into
//! consecutive 128-sample chunks, measuring each chunk with the same Φ₇,
//! and concatenating the results — equivalent to a block-diagonal Φ.
//!
//! Entries regenerate bit-exactly from a 64-bit seed via a counter-based
//! generator (a splitmix64 finalizer over the flat entry index), so edge
//! and cloud only ever exchange the seed, never the matrix.

use crate::{Complex, Error, IqVector, Result};
use ndarray::Array2;

/// Fixed column count of Φ₇: the SF7 symbol length.
pub const PHI_CHUNK: usize = 128;

/// M×128 measurement matrix with entries in {+1, −1}.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    /// Dense entries, each exactly +1.0 or −1.0.
    pub phi: Array2<f64>,
    pub seed: u64,
    /// Rows (measurements per 128-sample chunk).
    pub m: usize,
    /// Columns, fixed at [`PHI_CHUNK`].
    pub n: usize,
}

/// splitmix64 finalizer: the documented mixing function behind the
/// counter-based Bernoulli bit stream.
#[inline]
fn splitmix64(z: u64) -> u64 {
    let mut z = z;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bernoulli bit for flat entry index `flat = i·128 + k`, keyed by `seed`.
///
/// `b(seed, flat) = top bit of splitmix64(seed + (flat+1)·golden)` — pure
/// counter mode, so any entry regenerates independently of the others.
#[inline]
pub(crate) fn bernoulli_bit(seed: u64, flat: u64) -> bool {
    let ctr = seed.wrapping_add((flat.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(ctr) >> 63 == 1
}

/// Builds the M×128 matrix Φ₇ for `m` measurements per chunk.
///
/// `m` must be a power of two with `1 ≤ m ≤ 128`. Entry `(i, k)` is `+1`
/// when `bernoulli_bit(seed, i·128 + k)` is set, else `−1`; there is no
/// row or column normalization (the paper's Φ is plain ±1).
pub fn build_measurement(seed: u64, m: usize) -> Result<MeasurementMatrix> {
    if m == 0 || !m.is_power_of_two() || m > PHI_CHUNK {
        return Err(Error::Param(format!(
            "m must be a power of two in [1, {PHI_CHUNK}], got {m}"
        )));
    }
    let mut phi = Array2::zeros((m, PHI_CHUNK));
    for i in 0..m {
        for k in 0..PHI_CHUNK {
            let flat = (i * PHI_CHUNK + k) as u64;
            phi[(i, k)] = if bernoulli_bit(seed, flat) { 1.0 } else { -1.0 };
        }
    }
    Ok(MeasurementMatrix { phi, seed, m, n: PHI_CHUNK })
}

/// One compressed symbol window: `2^(sf−7)` chunk measurements concatenated.
#[derive(Debug, Clone)]
pub struct CompressedVector {
    /// Measurements, length `2^(sf−7) · chunk_m`.
    pub y: IqVector,
    pub sf: u32,
    /// Per-chunk measurement count (rows of Φ₇).
    pub chunk_m: usize,
}

impl CompressedVector {
    /// Total measurement count `M_total = 2^(sf−7)·chunk_m`.
    pub fn m_total(&self) -> usize {
        self.y.len()
    }

    /// ℓ2 norm of the measurement vector.
    pub fn norm(&self) -> f64 {
        self.y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Edge-side compression of one symbol-length block.
///
/// Splits the `2^sf`-sample block into consecutive 128-sample chunks,
/// applies `y_c = Φ₇·x_c` to each, and concatenates — the block-diagonal
/// measurement the cloud side inverts.
pub fn compress(block: &[Complex], phi7: &MeasurementMatrix) -> Result<CompressedVector> {
    let len = block.len();
    if len < PHI_CHUNK || len % PHI_CHUNK != 0 || !len.is_power_of_two() {
        return Err(Error::Shape(format!(
            "block length {len} is not 2^sf with sf ≥ 7"
        )));
    }
    let sf = len.trailing_zeros();
    let chunks = len / PHI_CHUNK;
    let mut y = Vec::with_capacity(chunks * phi7.m);
    for c in 0..chunks {
        let x_c = &block[c * PHI_CHUNK..(c + 1) * PHI_CHUNK];
        for row in phi7.phi.outer_iter() {
            let mut acc = Complex::new(0.0, 0.0);
            for (w, x) in row.iter().zip(x_c.iter()) {
                // w is ±1; branchless multiply keeps this hot loop simple.
                acc += x * *w;
            }
            y.push(acc);
        }
    }
    Ok(CompressedVector { y, sf, chunk_m: phi7.m })
}

/// Compression ratio α = 1 − M/N (Eq. 6): the fraction of samples removed.
pub fn compression_ratio(m_total: usize, n: usize) -> Result<f64> {
    if m_total == 0 || m_total > n {
        return Err(Error::Param(format!(
            "need 0 < m_total ≤ n, got m_total={m_total}, n={n}"
        )));
    }
    Ok(1.0 - m_total as f64 / n as f64)
}

/// Diagnostic lower bound on the measurement count for K-sparse signals in
/// dimension d: `2·k·ln(d/k)` (natural log). Informational only; the ratio
/// policy works from the empirical tables/formulas.
pub fn min_measurements(k: usize, d: usize) -> Result<f64> {
    if k == 0 || k >= d {
        return Err(Error::Param(format!("need 0 < k < d, got k={k}, d={d}")));
    }
    Ok(2.0 * k as f64 * (d as f64 / k as f64).ln())
}
