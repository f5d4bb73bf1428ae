//! Exact fractional Gaussian noise by circulant embedding.
//!
//! The n×n Toeplitz covariance of fGn is embedded in a 2m×2m circulant whose
//! eigenvalues are the FFT of its first row. When every eigenvalue is
//! nonnegative the circulant is a valid covariance and a complex Gaussian
//! vector shaped by the square-rooted spectrum, pushed back through one FFT,
//! has exactly the fGn law on its first n coordinates.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Number of times the embedding size may be doubled before giving up.
const MAX_DOUBLINGS: u32 = 4;

/// Relative size below which a negative eigenvalue is treated as rounding noise.
const EIGEN_TOLERANCE: f64 = 1e-10;

/// Autocovariance of unit-variance fGn at integer lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Eigenvalues of the circulant of size `2 * half` embedding the fGn covariance.
pub(crate) fn circulant_eigenvalues(half: usize, hurst: f64) -> Vec<f64> {
    let size = 2 * half;
    let mut row: Vec<Complex64> = Vec::with_capacity(size);
    for j in 0..=half {
        row.push(Complex64::new(fgn_autocovariance(j, hurst), 0.0));
    }
    for j in (1..half).rev() {
        row.push(Complex64::new(fgn_autocovariance(j, hurst), 0.0));
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

/// Nonnegative eigenvalues for an embedding that covers lags `0..n`.
fn embedding_spectrum(n: usize, hurst: f64) -> Result<Vec<f64>> {
    let mut half = n.next_power_of_two().max(1);
    let mut worst = (0usize, 0.0f64);
    for _ in 0..=MAX_DOUBLINGS {
        let mut eig = circulant_eigenvalues(half, hurst);
        let max = eig.iter().cloned().fold(0.0, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min >= -EIGEN_TOLERANCE * max {
            for v in &mut eig {
                *v = v.max(0.0);
            }
            return Ok(eig);
        }
        worst = (2 * half, min);
        half *= 2;
    }
    Err(Error::Embedding {
        size: worst.0,
        eigenvalue: worst.1,
    })
}

/// Draws `n` samples of unit-variance fGn.
pub(crate) fn sample_fgn<R: Rng>(n: usize, hurst: f64, rng: &mut R) -> Result<Vec<f64>> {
    let eig = embedding_spectrum(n, hurst)?;
    let size = eig.len();
    let half = size / 2;
    let scale = size as f64;

    let mut w = vec![Complex64::new(0.0, 0.0); size];
    let z0: f64 = rng.sample(StandardNormal);
    let zm: f64 = rng.sample(StandardNormal);
    w[0] = Complex64::new((eig[0] / scale).sqrt() * z0, 0.0);
    w[half] = Complex64::new((eig[half] / scale).sqrt() * zm, 0.0);
    for k in 1..half {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let amp = (eig[k] / (2.0 * scale)).sqrt();
        w[k] = Complex64::new(amp * re, amp * im);
        w[size - k] = w[k].conj();
    }

    FftPlanner::new().plan_fft_forward(size).process(&mut w);
    Ok(w.into_iter().take(n).map(|c| c.re).collect())
}
