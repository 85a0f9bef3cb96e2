//! Orthonormal DCT-II, used only by the sparsity comparison.
//!
//! The direct O(n²) form is plenty for n ≤ 1024 one-off studies and
//! avoids dragging in an FFT-based DCT for a diagnostic path.

/// Orthonormal DCT-II of a real vector:
/// `X[k] = c_k·Σ_j x[j]·cos(π(2j+1)k/(2n))`, with `c_0 = √(1/n)` and
/// `c_k = √(2/n)` otherwise, so the transform matrix is orthonormal.
pub fn dct2_ortho(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n > 0, "dct2_ortho needs a non-empty input");
    let norm0 = (1.0 / n as f64).sqrt();
    let norm = (2.0 / n as f64).sqrt();
    (0..n)
        .map(|k| {
            let sum: f64 = x
                .iter()
                .enumerate()
                .map(|(j, &v)| v * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * n as f64)).cos())
                .sum();
            if k == 0 {
                norm0 * sum
            } else {
                norm * sum
            }
        })
        .collect()
}
