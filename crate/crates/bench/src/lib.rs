//! Shared fixtures for the benchmarks.

use num_complex::Complex64;

/// Wavenumber near the first Fabry–Pérot frequency, slightly below the real
/// axis.
pub fn sample_k() -> Complex64 {
    Complex64::new(3.05, -0.03)
}

/// Slit widths used across the benchmark groups.
pub const WIDTHS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
