//! Raw IQ file exchange and matrix export.
//!
//! IQ files are interleaved little-endian `f32` pairs (re, im) — the
//! common SDR capture layout — so simulated symbols can be compared
//! against externally captured ones.

use crate::{Complex, Error, IqVector, Result};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Writes interleaved f32 little-endian IQ samples.
pub fn write_iq(path: &Path, x: &[Complex]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for c in x {
        w.write_all(&(c.re as f32).to_le_bytes())?;
        w.write_all(&(c.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads interleaved f32 little-endian IQ samples.
pub fn read_iq(path: &Path) -> Result<IqVector> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Shape(format!(
            "IQ file length {} is not a whole number of complex f32 pairs",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64;
            Complex::new(re, im)
        })
        .collect())
}

/// Exports a complex matrix as CSV for offline inspection.
///
/// The first line is a `#` comment carrying the provenance string (e.g.
/// `sf=7,seed=42,m=16`); each cell is `re<sign>im i` in scientific
/// notation.
pub fn write_complex_matrix_csv(path: &Path, m: &Array2<Complex>, meta: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {meta}")?;
    for row in m.rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|c| format!("{:.9e}{:+.9e}i", c.re, c.im))
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ChirpParams, Direction};
    use crate::phy::make_chirp;

    #[test]
    fn iq_round_trip_is_exact_at_f32() {
        let dir = std::env::temp_dir().join("loracs-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sym.iq");
        let x = make_chirp(ChirpParams::new(7).unwrap(), 42, Direction::Up).unwrap();
        write_iq(&path, &x).unwrap();
        let back = read_iq(&path).unwrap();
        assert_eq!(back.len(), x.len());
        for (a, b) in x.iter().zip(back.iter()) {
            assert_eq!(a.re as f32, b.re as f32);
            assert_eq!(a.im as f32, b.im as f32);
        }
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn read_rejects_truncated_files() {
        let dir = std::env::temp_dir().join("loracs-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.iq");
        std::fs::write(&path, [0u8; 7]).unwrap();
        assert!(read_iq(&path).is_err());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn matrix_csv_has_header_and_rows() {
        let dir = std::env::temp_dir().join("loracs-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("psi.csv");
        let dict =
            crate::cs::build_dictionary(ChirpParams::new(7).unwrap(), Direction::Up).unwrap();
        write_complex_matrix_csv(&path, &dict.psi, "sf=7,seed=42,m=16").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# sf=7,seed=42,m=16");
        assert_eq!(text.lines().count(), 129);
        assert_eq!(lines.next().unwrap().split(',').count(), 128);
        std::fs::remove_file(&path).unwrap();
    }
}
