//! Small dense linear-algebra helpers for the recovery path.
//!
//! Problem sizes are tiny by BLAS standards (matrices up to 256×2048,
//! least-squares systems of at most a few dozen unknowns), so everything
//! is hand-rolled over contiguous slices: no external solver dependency,
//! fully deterministic.

use ndarray::{Array2, ArrayView1};

/// `out = A·x` for a row-major matrix with contiguous rows.
pub fn matvec(a: &Array2<f64>, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.ncols(), x.len());
    debug_assert_eq!(a.nrows(), out.len());
    for (o, row) in out.iter_mut().zip(a.outer_iter()) {
        *o = dot(row, x);
    }
}

#[inline]
fn dot(row: ArrayView1<f64>, x: &[f64]) -> f64 {
    let r = row.as_slice().expect("rows are contiguous");
    // 4-lane unrolled accumulation; autovectorizes well and keeps the
    // result independent of iterator internals.
    let mut acc = [0.0f64; 4];
    let chunks = r.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += r[i] * x[i];
        acc[1] += r[i + 1] * x[i + 1];
        acc[2] += r[i + 2] * x[i + 2];
        acc[3] += r[i + 3] * x[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..r.len() {
        s += r[i] * x[i];
    }
    s
}

/// Euclidean norm of a real slice.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least-squares solve `argmin_c ‖G·c − y‖` for a skinny system given by
/// column views, via normal equations and Cholesky. `cols.len()` is at
/// most a few dozen here, and a tiny diagonal jitter guards the factor
/// against the near-duplicate columns a greedy solver can select.
pub fn ls_solve_cols(cols: &[ArrayView1<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = vec![0.0f64; k * k];
    let mut rhs = vec![0.0f64; k];
    for i in 0..k {
        let ci = cols[i].as_slice().expect("columns are contiguous");
        rhs[i] = ci.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        for j in i..k {
            let cj = cols[j].as_slice().expect("columns are contiguous");
            let g: f64 = ci.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    let trace: f64 = (0..k).map(|i| gram[i * k + i]).sum();
    let jitter = 1e-12 * (trace / k as f64).max(1e-300);
    for i in 0..k {
        gram[i * k + i] += jitter;
    }
    cholesky_solve(&mut gram, &mut rhs, k);
    rhs
}

/// In-place Cholesky factorization and solve of a symmetric positive
/// definite `k×k` system. `a` is overwritten by the factor, `b` by the
/// solution.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], k: usize) {
    // Factor: a = L·Lᵀ, lower triangle stored in place.
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= a[i * k + p] * a[j * k + p];
            }
            if i == j {
                a[i * k + i] = s.max(1e-300).sqrt();
            } else {
                a[i * k + j] = s / a[j * k + j];
            }
        }
    }
    // Forward substitution L·z = b.
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= a[i * k + p] * b[p];
        }
        b[i] = s / a[i * k + i];
    }
    // Back substitution Lᵀ·c = z.
    for i in (0..k).rev() {
        let mut s = b[i];
        for p in i + 1..k {
            s -= a[p * k + i] * b[p];
        }
        b[i] = s / a[i * k + i];
    }
}

/// Largest singular value of `a`, by power iteration on `AᵀA` with a
/// deterministic start vector. Used for the proximal solver's step size.
pub fn spectral_norm(a: &Array2<f64>, at: &Array2<f64>, iters: usize) -> f64 {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut av = vec![0.0; rows];
    let mut atav = vec![0.0; cols];
    let mut sigma = 0.0;
    for _ in 0..iters {
        matvec(a, &v, &mut av);
        matvec(at, &av, &mut atav);
        let n = norm2(&atav);
        if n == 0.0 {
            return 0.0;
        }
        for (vi, ti) in v.iter_mut().zip(atav.iter()) {
            *vi = ti / n;
        }
        sigma = n.sqrt();
    }
    sigma
}
