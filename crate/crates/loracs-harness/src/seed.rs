//! Deterministic seed derivation for Monte-Carlo cells and trials.
//!
//! Every random draw in an experiment is keyed by the master seed plus a
//! list of integer salts (cell index, trial index, purpose tag), so
//! trials are order-independent: rayon can schedule them in any order
//! and the tallies, not just the distribution, are identical run to run.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer — the same scrambler the measurement matrix uses.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the salts into the master seed, one splitmix64 round per salt.
pub fn mix(master: u64, salts: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for (i, &x) in salts.iter().enumerate() {
        s = splitmix64(s ^ x.wrapping_mul(GOLDEN).wrapping_add(i as u64));
    }
    s
}

/// Uniform draw in `[0, n)` for power-of-two `n` (exact, no modulo bias).
pub fn uniform_pow2(master: u64, salts: &[u64], n: usize) -> usize {
    debug_assert!(n.is_power_of_two());
    (mix(master, salts) as usize) & (n - 1)
}
