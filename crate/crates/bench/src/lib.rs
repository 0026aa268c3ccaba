//! Shared inputs for the criterion benchmarks.

/// Mean photon numbers spanning the ranges the figure scans use.
pub const MEAN_PHOTONS: [f64; 4] = [0.5, 4.0, 25.0, 100.0];

/// Logarithmic grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}
