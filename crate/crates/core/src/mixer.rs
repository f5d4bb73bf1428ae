//! Additive mixing of a signal stream with noise at a prescribed variance ratio.

use crate::error::{Error, Result};
use crate::series::{Provenance, Series};
use crate::stats::sample_variance;

/// Target signal-to-noise ratio `Var[signal] / Var[scaled noise]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixSpec {
    snr: f64,
}

impl MixSpec {
    pub fn new(snr: f64) -> Result<Self> {
        if snr.is_finite() && snr > 0.0 {
            Ok(MixSpec { snr })
        } else {
            Err(Error::param(
                "snr",
                format!("must be a finite positive ratio, got {snr}"),
            ))
        }
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixResult {
    pub sum: Series,
    /// Factor applied to the noise before adding it.
    pub noise_scale: f64,
    /// Variance ratio measured on the signal and the scaled noise.
    pub achieved_snr: f64,
}

/// Forms `signal + c * noise` with `c = sqrt(Var[signal] / (snr * Var[noise]))`.
///
/// Noise is scaled about zero, not about its mean, so positive noise stays
/// positive.
pub fn mix(signal: &Series, noise: &Series, spec: MixSpec) -> Result<MixResult> {
    if signal.len() != noise.len() {
        return Err(Error::Contract(format!(
            "signal has {} samples but noise has {}",
            signal.len(),
            noise.len()
        )));
    }
    let var_signal = sample_variance(signal.values());
    let var_noise = sample_variance(noise.values());
    if var_signal <= 0.0 {
        return Err(Error::Degenerate("signal has zero variance".into()));
    }
    if var_noise <= 0.0 {
        return Err(Error::Degenerate("noise has zero variance".into()));
    }
    let noise_scale = (var_signal / (spec.snr() * var_noise)).sqrt();
    let scaled: Vec<f64> = noise.values().iter().map(|v| noise_scale * v).collect();
    let achieved_snr = var_signal / sample_variance(&scaled);
    let sum: Vec<f64> = signal
        .values()
        .iter()
        .zip(&scaled)
        .map(|(s, n)| s + n)
        .collect();
    let provenance = Provenance::Mixed {
        signal: Box::new(signal.provenance().clone()),
        noise: Box::new(noise.provenance().clone()),
        snr: spec.snr(),
        noise_scale,
    };
    Ok(MixResult {
        sum: Series::new(sum, provenance)?,
        noise_scale,
        achieved_snr,
    })
}

/// `Var[signal] / Var[noise_component]` with n-1 denominators.
pub fn measure_snr(signal: &Series, noise_component: &Series) -> Result<f64> {
    if signal.len() != noise_component.len() {
        return Err(Error::Contract(format!(
            "signal has {} samples but noise has {}",
            signal.len(),
            noise_component.len()
        )));
    }
    let var_noise = sample_variance(noise_component.values());
    if var_noise <= 0.0 {
        return Err(Error::Degenerate("noise has zero variance".into()));
    }
    Ok(sample_variance(signal.values()) / var_noise)
}
