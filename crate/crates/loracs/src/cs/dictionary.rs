//! The chirp synthesis dictionary Ψ = U⁻¹·W⁻¹.
//!
//! `U` is the diagonal dechirping matrix (the conjugate base ramp) and `W`
//! the unitary DFT, so the analysis `s = W·U·x` of a clean synchronized
//! symbol is exactly 1-sparse: dechirping collapses the symbol to a pure
//! tone and the DFT concentrates that tone in one bin. Ψ's columns are the
//! unit-norm chirp atoms the sparse solver works against.

use crate::params::{ChirpParams, Direction};
use crate::phy::make_chirp;
use crate::{Complex, IqVector, Result};
use ndarray::Array2;
use rustfft::FftPlanner;

/// N×N complex synthesis dictionary for one chirp direction.
#[derive(Debug, Clone)]
pub struct Dictionary {
    /// Ψ, column `i` = atom for analysis bin `i`, unit column norm.
    pub psi: Array2<Complex>,
    pub direction: Direction,
    pub params: ChirpParams,
}

impl Dictionary {
    /// Analysis transform `s = W·U·x`: dechirp then unitary DFT.
    ///
    /// For a clean symbol of this direction the result has a single
    /// dominant coefficient at [`Dictionary::bin_for_value`]`(λ)`.
    pub fn analyze(&self, x: &[Complex]) -> Result<IqVector> {
        let n = self.params.n();
        if x.len() != n {
            return Err(crate::Error::Shape(format!(
                "analysis input length {} != n {}",
                x.len(),
                n
            )));
        }
        // U = diag(conjugate base ramp): for the up dictionary this is the
        // base down-chirp, and vice versa.
        let base = make_chirp(self.params, 0, self.direction)?;
        let mut buf: Vec<Complex> = x
            .iter()
            .zip(base.iter())
            .map(|(xi, bi)| xi * bi.conj())
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in &mut buf {
            *v *= scale;
        }
        Ok(buf)
    }

    /// Synthesis `x = Ψ·s`.
    pub fn synthesize(&self, s: &[Complex]) -> Result<IqVector> {
        let n = self.params.n();
        if s.len() != n {
            return Err(crate::Error::Shape(format!(
                "coefficient length {} != n {}",
                s.len(),
                n
            )));
        }
        let mut out = vec![Complex::new(0.0, 0.0); n];
        for (k, row) in self.psi.outer_iter().enumerate() {
            let mut acc = Complex::new(0.0, 0.0);
            for (a, b) in row.iter().zip(s.iter()) {
                acc += a * b;
            }
            out[k] = acc;
        }
        Ok(out)
    }

    /// Analysis bin occupied by a clean symbol of value `λ`.
    ///
    /// Up-chirps land in bin `λ` directly; down-chirps (conjugate ramp)
    /// land in bin `(n − λ) mod n`.
    pub fn bin_for_value(&self, value: u32) -> usize {
        let n = self.params.n();
        match self.direction {
            Direction::Up => value as usize,
            Direction::Down => (n - value as usize) % n,
        }
    }

    /// Inverse of [`Dictionary::bin_for_value`]: the modulation value whose
    /// clean symbol occupies analysis bin `bin`.
    pub fn value_for_bin(&self, bin: usize) -> u32 {
        let n = self.params.n();
        match self.direction {
            Direction::Up => bin as u32,
            Direction::Down => ((n - bin) % n) as u32,
        }
    }
}

/// Builds Ψ = U⁻¹·W⁻¹ for the given direction.
///
/// With `U = diag(conj(base))` and `W` the unitary DFT (`ω = e^{−2πj/N}`,
/// entries `ω^{ik}/√N`), the product has the closed form
/// `Ψ[k, i] = base[k] · e^{+2πj·ik/N} / √N` — column `i` is the direction's
/// chirp atom for analysis bin `i`, scaled to unit norm. The matrix is
/// materialized explicitly because the measurement stage multiplies it by
/// a fat random Φ with no fast transform.
pub fn build_dictionary(params: ChirpParams, direction: Direction) -> Result<Dictionary> {
    let n = params.n();
    let base = make_chirp(params, 0, direction)?;
    let scale = 1.0 / (n as f64).sqrt();
    let mut psi = Array2::zeros((n, n));
    for k in 0..n {
        let row_base = base[k] * scale;
        for i in 0..n {
            // e^{+2πj·ik/n}, reduced mod n to keep the argument small.
            let phase = std::f64::consts::TAU * ((i * k) % n) as f64 / n as f64;
            psi[(k, i)] = row_base * Complex::from_polar(1.0, phase);
        }
    }
    Ok(Dictionary { psi, direction, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ChirpParams;

    fn dict(sf: u32, direction: Direction) -> Dictionary {
        build_dictionary(ChirpParams::new(sf).unwrap(), direction).unwrap()
    }

    #[test]
    fn psi_matches_inverse_product_recomputed() {
        // Recompute U⁻¹·W⁻¹ from its factors and compare elementwise.
        let d = dict(7, Direction::Up);
        let n = d.params.n();
        let base = make_chirp(d.params, 0, Direction::Up).unwrap();
        let scale = 1.0 / (n as f64).sqrt();
        let mut max_err = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                let w_inv =
                    Complex::from_polar(scale, std::f64::consts::TAU * (i * k) as f64 / n as f64);
                let expect = base[k] * w_inv;
                max_err = max_err.max((d.psi[(k, i)] - expect).norm());
            }
        }
        assert!(max_err < 1e-9, "max elementwise error {max_err}");
    }

    #[test]
    fn analysis_of_clean_symbol_is_one_sparse() {
        // Spec example: sf=9, λ=300 — exactly one coefficient above half max.
        let d = dict(9, Direction::Up);
        let x = make_chirp(d.params, 300, Direction::Up).unwrap();
        let s = d.analyze(&x).unwrap();
        let mags: Vec<f64> = s.iter().map(|c| c.norm()).collect();
        let max = mags.iter().cloned().fold(f64::MIN, f64::max);
        let above: Vec<usize> = (0..mags.len()).filter(|&i| mags[i] > 0.5 * max).collect();
        assert_eq!(above, vec![300]);
    }

    #[test]
    fn one_sparsity_exhaustive_sf7() {
        let d = dict(7, Direction::Up);
        for lam in 0..128u32 {
            let x = make_chirp(d.params, lam, Direction::Up).unwrap();
            let s = d.analyze(&x).unwrap();
            let mags: Vec<f64> = s.iter().map(|c| c.norm()).collect();
            let max = mags.iter().cloned().fold(f64::MIN, f64::max);
            let above = mags.iter().filter(|&&m| m > 0.5 * max).count();
            assert_eq!(above, 1, "λ={lam}");
            let peak = mags.iter().position(|&m| m == max).unwrap();
            assert_eq!(peak, lam as usize);
        }
    }

    #[test]
    fn synthesis_inverts_analysis() {
        let d = dict(8, Direction::Up);
        let x = make_chirp(d.params, 99, Direction::Up).unwrap();
        let s = d.analyze(&x).unwrap();
        let back = d.synthesize(&s).unwrap();
        let max_err = x
            .iter()
            .zip(back.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-9, "reconstruction error {max_err}");
    }

    #[test]
    fn analysis_of_psi_column_is_identity_column() {
        // W·U·Ψ == I, checked on a handful of columns.
        let d = dict(7, Direction::Up);
        for col in [0usize, 1, 64, 127] {
            let atom: Vec<Complex> = d.psi.column(col).iter().cloned().collect();
            let s = d.analyze(&atom).unwrap();
            for (i, v) in s.iter().enumerate() {
                let expect = if i == col { 1.0 } else { 0.0 };
                assert!(
                    (v.norm() - expect).abs() < 1e-9,
                    "col {col}, bin {i}: |s|={}",
                    v.norm()
                );
            }
        }
    }

    #[test]
    fn columns_have_equal_unit_norm() {
        for direction in [Direction::Up, Direction::Down] {
            let d = dict(7, direction);
            for i in 0..d.params.n() {
                let norm: f64 = d
                    .psi
                    .column(i)
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!((norm - 1.0).abs() < 1e-9, "column {i} norm {norm}");
            }
        }
    }

    #[test]
    fn down_dictionary_maps_values_through_bin_reflection() {
        let d = dict(8, Direction::Down);
        let n = d.params.n();
        for lam in [0u32, 1, 100, 255] {
            let x = make_chirp(d.params, lam, Direction::Down).unwrap();
            let s = d.analyze(&x).unwrap();
            let peak = s
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap()
                .0;
            assert_eq!(peak, d.bin_for_value(lam), "λ={lam}");
            assert_eq!(d.value_for_bin(peak), lam);
            assert_eq!(peak, (n - lam as usize) % n);
        }
    }
}
