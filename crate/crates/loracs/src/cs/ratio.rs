//! Compression-ratio selection from SF and SNR.
//!
//! Two modes: the closed-form laws (Eq. 11 sync / Eq. 12 unsync) and the
//! empirical table anchors (Tables 1–2). The formula's α converts to a
//! measurement count that is rounded *up* to the next power of two —
//! conservative: never compress more than the law permits.

use crate::{Error, Result};

/// SNR band for table lookup, anchored at the paper's −6/0/+6 dB points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrBand {
    /// snr ≤ −3 dB
    Low,
    /// −3 dB < snr ≤ +3 dB
    Medium,
    /// snr > +3 dB
    High,
}

impl SnrBand {
    /// Bands split halfway between the evaluated anchors.
    pub fn from_snr_db(snr_db: f64) -> Self {
        if snr_db <= -3.0 {
            SnrBand::Low
        } else if snr_db <= 3.0 {
            SnrBand::Medium
        } else {
            SnrBand::High
        }
    }
}

/// Table 1 (synchronized) M/N anchors as denominators of 1/x, indexed
/// `[sf − 7][band]` with bands ordered low, medium, high.
pub const TABLE1_SYNC: [[usize; 3]; 4] = [
    [1, 4, 8],    // sf 7: 1, 1/4, 1/8
    [2, 8, 16],   // sf 8
    [4, 16, 32],  // sf 9
    [8, 32, 32],  // sf 10
];

/// Table 2 (unsynchronized) M/N anchors, same layout. One power of two
/// more conservative than Table 1 in every cell except the saturated
/// sf 10 high-SNR corner.
pub const TABLE2_UNSYNC: [[usize; 3]; 4] = [
    [1, 2, 4],    // sf 7
    [1, 4, 8],    // sf 8
    [2, 8, 16],   // sf 9
    [4, 16, 16],  // sf 10
];

/// How the ratio is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMode {
    /// Closed-form Eq. (11)/(12).
    Formula,
    /// Table 1/2 band anchors.
    Table,
}

/// Ratio-selection policy: mode plus synchronization state.
#[derive(Debug, Clone, Copy)]
pub struct RatioPolicy {
    pub mode: RatioMode,
    pub sync: bool,
}

impl RatioPolicy {
    pub fn formula(sync: bool) -> Self {
        Self { mode: RatioMode::Formula, sync }
    }
    pub fn table(sync: bool) -> Self {
        Self { mode: RatioMode::Table, sync }
    }
}

/// Selects `(M_total, α)` for a spreading factor and SNR.
///
/// Formula mode evaluates
///
/// ```text
/// α = max{ min{ 1 − 2^(−⌊snr/3 + sf − 5⌋), 1 − 2·sf/2^sf }, 0 }      (sync, Eq. 11)
/// α = max{ min{ 1 − 2^(−⌊snr/3 + sf − 6⌋), 1 − 4(sf−1)/2^sf }, 0 }   (unsync, Eq. 12)
/// ```
///
/// then `M = (1−α)·N` rounded up to the next power of two. Table mode
/// looks the M/N anchor up directly. Both modes clamp to `M_total ≥ 16`
/// and `M_total ≤ N` (per-chunk rows ≤ 128). α is recomputed from the
/// final M via Eq. (6), so the returned pair is always self-consistent.
/// α = 0 (M = N) means "do not compress".
pub fn select_ratio(sf: u32, snr_db: f64, policy: RatioPolicy) -> Result<(usize, f64)> {
    if !(7..=10).contains(&sf) {
        return Err(Error::Param(format!("sf must be in 7..=10, got {sf}")));
    }
    let n = 1usize << sf;
    let m_raw = match policy.mode {
        RatioMode::Formula => {
            let (shift, cap) = if policy.sync {
                (snr_db / 3.0 + sf as f64 - 5.0, 1.0 - 2.0 * sf as f64 / n as f64)
            } else {
                (
                    snr_db / 3.0 + sf as f64 - 6.0,
                    1.0 - 4.0 * (sf as f64 - 1.0) / n as f64,
                )
            };
            let alpha = (1.0 - 2f64.powf(-shift.floor())).min(cap).max(0.0);
            ((1.0 - alpha) * n as f64).ceil() as usize
        }
        RatioMode::Table => {
            let band = SnrBand::from_snr_db(snr_db);
            let table = if policy.sync { &TABLE1_SYNC } else { &TABLE2_UNSYNC };
            let denom = table[(sf - 7) as usize][match band {
                SnrBand::Low => 0,
                SnrBand::Medium => 1,
                SnrBand::High => 2,
            }];
            n / denom
        }
    };
    let m_total = m_raw.next_power_of_two().clamp(16, n);
    let alpha = 1.0 - m_total as f64 / n as f64;
    Ok((m_total, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_m(sf: u32, band_idx: usize, sync: bool) -> usize {
        let n = 1usize << sf;
        let t = if sync { &TABLE1_SYNC } else { &TABLE2_UNSYNC };
        n / t[(sf - 7) as usize][band_idx]
    }

    #[test]
    fn paper_anchor_examples() {
        // (sf=7, −6 dB, sync) → α = 0, M/N = 1.
        let (m, a) = select_ratio(7, -6.0, RatioPolicy::formula(true)).unwrap();
        assert_eq!((m, a), (128, 0.0));
        // (sf=9, 0 dB, sync) → M/N = 1/16, α = 0.9375.
        let (m, a) = select_ratio(9, 0.0, RatioPolicy::formula(true)).unwrap();
        assert_eq!(m, 32);
        assert!((a - 0.9375).abs() < 1e-12);
        // (sf=10, 0 dB, sync) → M/N = 1/32 (table agrees with formula).
        let (m, _) = select_ratio(10, 0.0, RatioPolicy::table(true)).unwrap();
        assert_eq!(m, 32);
    }

    #[test]
    fn formula_reproduces_table1_in_11_of_12_cells() {
        // The known exception: sf 9 / high band, where the formula's cap
        // with round-up yields M=32 but the table records M=16.
        let snrs = [-6.0, 0.0, 6.0];
        let mut mismatches = Vec::new();
        for sf in 7..=10u32 {
            for (b, &snr) in snrs.iter().enumerate() {
                let (m_formula, _) = select_ratio(sf, snr, RatioPolicy::formula(true)).unwrap();
                let m_table = table_m(sf, b, true);
                if m_formula != m_table {
                    mismatches.push((sf, snr, m_formula, m_table));
                }
            }
        }
        assert_eq!(mismatches, vec![(9, 6.0, 32, 16)], "unexpected mismatch set");
    }

    #[test]
    fn unsync_formula_gives_64_at_medium_for_all_sf() {
        for sf in 7..=10u32 {
            let (m, _) = select_ratio(sf, 0.0, RatioPolicy::formula(false)).unwrap();
            assert_eq!(m, 64, "sf={sf}");
        }
    }

    #[test]
    fn table_mode_emits_table_values_exactly() {
        for sf in 7..=10u32 {
            for (b, snr) in [(-6.0), (0.0), (6.0)].into_iter().enumerate() {
                for sync in [true, false] {
                    let (m, _) = select_ratio(sf, snr, RatioPolicy { mode: RatioMode::Table, sync })
                        .unwrap();
                    assert_eq!(m, table_m(sf, b, sync).clamp(16, 1 << sf), "sf={sf} snr={snr}");
                }
            }
        }
    }

    #[test]
    fn produced_m_is_power_of_two_within_bounds() {
        for sf in 7..=10u32 {
            for snr10 in -150..=150 {
                let snr = snr10 as f64 / 10.0;
                for sync in [true, false] {
                    let (m, alpha) =
                        select_ratio(sf, snr, RatioPolicy { mode: RatioMode::Formula, sync })
                            .unwrap();
                    let n = 1usize << sf;
                    assert!(m.is_power_of_two() && (16..=n).contains(&m));
                    assert!((alpha - (1.0 - m as f64 / n as f64)).abs() < 1e-12);
                    // Per-chunk rows fit Φ₇.
                    assert!(m / (1usize << (sf - 7)) <= 128);
                }
            }
        }
    }

    #[test]
    fn band_edges() {
        assert_eq!(SnrBand::from_snr_db(-3.0), SnrBand::Low);
        assert_eq!(SnrBand::from_snr_db(-2.9), SnrBand::Medium);
        assert_eq!(SnrBand::from_snr_db(3.0), SnrBand::Medium);
        assert_eq!(SnrBand::from_snr_db(3.1), SnrBand::High);
    }
}
