//! Seeded synthesis of the stream models: fGn, fBm, exponentiated fGn,
//! Beta-weighted binomial cascades, AR(1) and iid noise.
//!
//! Every generator owns one [`ChaCha8Rng`] seeded from the descriptor's
//! 64-bit seed, so output depends only on the descriptor.

mod cascade;
mod fgn;

pub use cascade::{beta_log_moment, cascade_theoretical_h};
pub use fgn::fgn_autocovariance;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::series::{Dist, ModelDescriptor, ModelSpec, Provenance, Series};

/// Largest argument whose exponential is finite.
const EXP_LIMIT: f64 = 709.782712893384;

pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generates the series described by `desc`.
pub fn generate(desc: &ModelDescriptor) -> Result<Series> {
    desc.validate()?;
    let mut rng = rng_for_seed(desc.seed);
    let n = desc.n;
    let values = match desc.spec {
        ModelSpec::Fgn { hurst } => fgn::sample_fgn(n, hurst, &mut rng)?,
        ModelSpec::Fbm { hurst } => {
            let mut v = fgn::sample_fgn(n, hurst, &mut rng)?;
            cumulative_sum(&mut v);
            v
        }
        ModelSpec::ExpFgn { hurst } => exp_values(&fgn::sample_fgn(n, hurst, &mut rng)?)?,
        ModelSpec::Cascade { depth, alpha } => cascade::sample_cascade(depth, alpha, &mut rng)?,
        ModelSpec::Ar1 { phi, sigma } => sample_ar1(n, phi, sigma, &mut rng),
        ModelSpec::Iid { dist } => sample_iid(n, dist, &mut rng)?,
    };
    Series::new(values, Provenance::Generated(*desc))
}

pub fn gen_fgn(n: usize, hurst: f64, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::new(ModelSpec::Fgn { hurst }, n, seed)?)
}

/// Running sum of [`gen_fgn`] with the same seed.
pub fn gen_fbm(n: usize, hurst: f64, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::new(ModelSpec::Fbm { hurst }, n, seed)?)
}

/// `exp` of unit-variance fGn; with `hurst = 0.5` this is exponentiated white noise.
pub fn gen_exp_fgn(n: usize, hurst: f64, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::new(ModelSpec::ExpFgn { hurst }, n, seed)?)
}

/// Cascade with 2^depth leaves whose sample mean is 1.
pub fn gen_cascade(depth: u32, alpha: f64, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::with_implied_len(
        ModelSpec::Cascade { depth, alpha },
        seed,
    )?)
}

pub fn gen_ar1(n: usize, phi: f64, sigma: f64, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::new(
        ModelSpec::Ar1 { phi, sigma },
        n,
        seed,
    )?)
}

pub fn gen_iid(n: usize, dist: Dist, seed: u64) -> Result<Series> {
    generate(&ModelDescriptor::new(ModelSpec::Iid { dist }, n, seed)?)
}

/// Elementwise exponential. An fGn input keeps its descriptor, relabelled as
/// exp-fGn, so the output can still be regenerated from it.
pub fn exp_transform(x: &Series) -> Result<Series> {
    let values = exp_values(x.values())?;
    let provenance = match x.provenance() {
        Provenance::Generated(ModelDescriptor {
            spec: ModelSpec::Fgn { hurst },
            n,
            seed,
        }) => Provenance::Generated(ModelDescriptor {
            spec: ModelSpec::ExpFgn { hurst: *hurst },
            n: *n,
            seed: *seed,
        }),
        other => Provenance::Exp(Box::new(other.clone())),
    };
    Series::new(values, provenance)
}

fn exp_values(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() {
                Err(Error::NonFinite { index, value })
            } else if value > EXP_LIMIT {
                Err(Error::Overflow { index, value })
            } else {
                Ok(value.exp())
            }
        })
        .collect()
}

fn cumulative_sum(v: &mut [f64]) {
    let mut acc = 0.0;
    for x in v.iter_mut() {
        acc += *x;
        *x = acc;
    }
}

fn sample_ar1<R: Rng>(n: usize, phi: f64, sigma: f64, rng: &mut R) -> Vec<f64> {
    let stationary_sd = sigma / (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(n);
    let z: f64 = rng.sample(StandardNormal);
    let mut x = stationary_sd * z;
    out.push(x);
    for _ in 1..n {
        let e: f64 = rng.sample(StandardNormal);
        x = phi * x + sigma * e;
        out.push(x);
    }
    out
}

fn sample_iid<R: Rng>(n: usize, dist: Dist, rng: &mut R) -> Result<Vec<f64>> {
    dist.validate()?;
    let bad = |e: &dyn std::fmt::Display| Error::param("dist", e.to_string());
    Ok(match dist {
        Dist::Uniform { low, high } => {
            let d = Uniform::new(low, high).map_err(|e| bad(&e))?;
            d.sample_iter(rng).take(n).collect()
        }
        Dist::Normal { mean, std } => {
            let d = Normal::new(mean, std).map_err(|e| bad(&e))?;
            d.sample_iter(rng).take(n).collect()
        }
        Dist::LogNormal { mu, sigma } => {
            let d = LogNormal::new(mu, sigma).map_err(|e| bad(&e))?;
            d.sample_iter(rng).take(n).collect()
        }
    })
}
