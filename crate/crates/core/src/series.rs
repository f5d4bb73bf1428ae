//! Sample paths and the descriptors that reproduce them.
//!
//! A [`ModelDescriptor`] is the complete recipe for a generated stream: the
//! model with its parameters, the requested length and the seed. Every
//! generator is a pure function of its descriptor, so a descriptor stored in a
//! trace file header is enough to regenerate the trace bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Marginal law of an iid stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl Dist {
    pub fn name(&self) -> &'static str {
        match self {
            Dist::Uniform { .. } => "uniform",
            Dist::Normal { .. } => "normal",
            Dist::LogNormal { .. } => "lognormal",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Dist::Uniform { low, high } => {
                finite("low", low)?;
                finite("high", high)?;
                if low >= high {
                    return Err(Error::param(
                        "high",
                        format!("uniform bounds need low < high, got low={low} high={high}"),
                    ));
                }
            }
            Dist::Normal { mean, std } => {
                finite("mean", mean)?;
                positive("std", std)?;
            }
            Dist::LogNormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
            }
        }
        Ok(())
    }
}

/// A stream model together with exactly the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// Fractional Gaussian noise, zero mean and unit variance.
    Fgn {
        hurst: f64,
    },
    /// Fractional Brownian motion, the running sum of [`ModelSpec::Fgn`].
    Fbm {
        hurst: f64,
    },
    /// Elementwise exponential of unit-variance fGn.
    ExpFgn {
        hurst: f64,
    },
    /// Conservative binomial cascade with Beta(alpha, alpha) weights.
    Cascade {
        depth: u32,
        alpha: f64,
    },
    /// Stationary Gaussian AR(1).
    Ar1 {
        phi: f64,
        sigma: f64,
    },
    Iid {
        dist: Dist,
    },
}

/// Deepest cascade accepted; 2^30 leaves is already several GiB of samples.
pub const MAX_CASCADE_DEPTH: u32 = 30;

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Fgn { .. } => "fgn",
            ModelSpec::Fbm { .. } => "fbm",
            ModelSpec::ExpFgn { .. } => "exp-fgn",
            ModelSpec::Cascade { .. } => "cascade",
            ModelSpec::Ar1 { .. } => "ar1",
            ModelSpec::Iid { .. } => "iid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Fgn { hurst } | ModelSpec::Fbm { hurst } | ModelSpec::ExpFgn { hurst } => {
                check_hurst(hurst)
            }
            ModelSpec::Cascade { depth, alpha } => {
                if !(1..=MAX_CASCADE_DEPTH).contains(&depth) {
                    return Err(Error::param(
                        "depth",
                        format!("must be in [1, {MAX_CASCADE_DEPTH}], got {depth}"),
                    ));
                }
                positive("alpha", alpha)
            }
            ModelSpec::Ar1 { phi, sigma } => {
                if !(phi.is_finite() && phi.abs() < 1.0) {
                    return Err(Error::param(
                        "phi",
                        format!("must lie in (-1, 1) for a stationary AR(1), got {phi}"),
                    ));
                }
                positive("sigma", sigma)
            }
            ModelSpec::Iid { dist } => dist.validate(),
        }
    }

    /// Length implied by the model itself, if any (cascades have 2^depth leaves).
    pub fn implied_len(&self) -> Option<usize> {
        match *self {
            ModelSpec::Cascade { depth, .. } if depth <= MAX_CASCADE_DEPTH => Some(1usize << depth),
            _ => None,
        }
    }

    /// Parameters as ordered `key=value` pairs, `model` first.
    pub fn to_params(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("model", self.name().to_string())];
        match *self {
            ModelSpec::Fgn { hurst } | ModelSpec::Fbm { hurst } | ModelSpec::ExpFgn { hurst } => {
                out.push(("hurst", hurst.to_string()));
            }
            ModelSpec::Cascade { depth, alpha } => {
                out.push(("depth", depth.to_string()));
                out.push(("alpha", alpha.to_string()));
            }
            ModelSpec::Ar1 { phi, sigma } => {
                out.push(("phi", phi.to_string()));
                out.push(("sigma", sigma.to_string()));
            }
            ModelSpec::Iid { dist } => {
                out.push(("dist", dist.name().to_string()));
                match dist {
                    Dist::Uniform { low, high } => {
                        out.push(("low", low.to_string()));
                        out.push(("high", high.to_string()));
                    }
                    Dist::Normal { mean, std } => {
                        out.push(("mean", mean.to_string()));
                        out.push(("std", std.to_string()));
                    }
                    Dist::LogNormal { mu, sigma } => {
                        out.push(("mu", mu.to_string()));
                        out.push(("sigma", sigma.to_string()));
                    }
                }
            }
        }
        out
    }

    /// Builds a spec from a key/value map. Every key in `params` must be
    /// consumed; leftovers are reported as extraneous.
    pub fn from_params(params: &BTreeMap<String, String>) -> Result<Self> {
        let mut p = ParamReader::new(params);
        let model = p.take_str("model")?;
        let spec = match model.as_str() {
            "fgn" => ModelSpec::Fgn {
                hurst: p.take("hurst")?,
            },
            "fbm" => ModelSpec::Fbm {
                hurst: p.take("hurst")?,
            },
            "exp-fgn" => ModelSpec::ExpFgn {
                hurst: p.take("hurst")?,
            },
            "cascade" => ModelSpec::Cascade {
                depth: p.take("depth")?,
                alpha: p.take("alpha")?,
            },
            "ar1" => ModelSpec::Ar1 {
                phi: p.take("phi")?,
                sigma: p.take("sigma")?,
            },
            "iid" => {
                let dist = match p.take_str("dist")?.as_str() {
                    "uniform" => Dist::Uniform {
                        low: p.take("low")?,
                        high: p.take("high")?,
                    },
                    "normal" => Dist::Normal {
                        mean: p.take("mean")?,
                        std: p.take("std")?,
                    },
                    "lognormal" => Dist::LogNormal {
                        mu: p.take("mu")?,
                        sigma: p.take("sigma")?,
                    },
                    other => {
                        return Err(Error::param(
                            "dist",
                            format!("unknown distribution `{other}` (uniform, normal, lognormal)"),
                        ))
                    }
                };
                ModelSpec::Iid { dist }
            }
            other => {
                return Err(Error::param(
                    "model",
                    format!("unknown model `{other}` (fgn, fbm, exp-fgn, cascade, ar1, iid)"),
                ))
            }
        };
        p.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Everything needed to regenerate a stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDescriptor {
    pub spec: ModelSpec,
    pub n: usize,
    pub seed: u64,
}

impl ModelDescriptor {
    pub fn new(spec: ModelSpec, n: usize, seed: u64) -> Result<Self> {
        let desc = ModelDescriptor { spec, n, seed };
        desc.validate()?;
        Ok(desc)
    }

    /// Descriptor whose length is implied by the model (cascades).
    pub fn with_implied_len(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let n = spec.implied_len().ok_or_else(|| {
            Error::param(
                "n",
                format!("model `{}` needs an explicit length", spec.name()),
            )
        })?;
        Self::new(spec, n, seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.n < 2 {
            return Err(Error::param(
                "n",
                format!("length must be at least 2, got {}", self.n),
            ));
        }
        if let Some(implied) = self.spec.implied_len() {
            if implied != self.n {
                return Err(Error::param(
                    "n",
                    format!(
                        "cascade of depth d has length 2^d = {implied}, got n={}",
                        self.n
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_params(&self) -> Vec<(&'static str, String)> {
        let mut out = self.spec.to_params();
        out.insert(1, ("n", self.n.to_string()));
        out.insert(2, ("seed", self.seed.to_string()));
        out
    }

    pub fn from_params(params: &BTreeMap<String, String>) -> Result<Self> {
        let mut rest = params.clone();
        let n = take_parsed::<usize>(&mut rest, "n")?;
        let seed = take_parsed::<u64>(&mut rest, "seed")?;
        let spec = ModelSpec::from_params(&rest)?;
        Self::new(spec, n, seed)
    }
}

impl fmt::Display for ModelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .to_params()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// How a series came to be.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Generated(ModelDescriptor),
    /// Elementwise exponential of another series.
    Exp(Box<Provenance>),
    /// Additive mixture `signal + noise_scale * noise`.
    Mixed {
        signal: Box<Provenance>,
        noise: Box<Provenance>,
        snr: f64,
        noise_scale: f64,
    },
    /// Data of unknown origin.
    External,
}

impl Provenance {
    /// Flattens into `key=value` pairs; nested provenances get dotted prefixes.
    pub fn to_params(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.write_params("", &mut out);
        out
    }

    fn write_params(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        match self {
            Provenance::Generated(desc) => {
                for (k, v) in desc.to_params() {
                    out.push((format!("{prefix}{k}"), v));
                }
            }
            Provenance::Exp(source) => {
                out.push((format!("{prefix}transform"), "exp".to_string()));
                source.write_params(&format!("{prefix}source."), out);
            }
            Provenance::Mixed {
                signal,
                noise,
                snr,
                noise_scale,
            } => {
                signal.write_params(&format!("{prefix}signal."), out);
                noise.write_params(&format!("{prefix}noise."), out);
                out.push((format!("{prefix}mix.snr"), snr.to_string()));
                out.push((format!("{prefix}mix.noise_scale"), noise_scale.to_string()));
            }
            Provenance::External => {}
        }
    }

    pub fn from_params(params: &BTreeMap<String, String>) -> Result<Self> {
        if params.is_empty() {
            return Ok(Provenance::External);
        }
        if params.contains_key("mix.snr") {
            let mut rest = params.clone();
            let snr = take_parsed::<f64>(&mut rest, "mix.snr")?;
            let noise_scale = take_parsed::<f64>(&mut rest, "mix.noise_scale")?;
            let signal = Provenance::from_params(&strip_prefix(&mut rest, "signal."))?;
            let noise = Provenance::from_params(&strip_prefix(&mut rest, "noise."))?;
            if let Some(key) = rest.keys().next() {
                return Err(Error::param(
                    "metadata",
                    format!("unexpected key `{key}` in mixed trace"),
                ));
            }
            return Ok(Provenance::Mixed {
                signal: Box::new(signal),
                noise: Box::new(noise),
                snr,
                noise_scale,
            });
        }
        if let Some(t) = params.get("transform") {
            if t != "exp" {
                return Err(Error::param(
                    "transform",
                    format!("unknown transform `{t}`"),
                ));
            }
            let mut rest = params.clone();
            rest.remove("transform");
            let source = Provenance::from_params(&strip_prefix(&mut rest, "source."))?;
            if let Some(key) = rest.keys().next() {
                return Err(Error::param(
                    "metadata",
                    format!("unexpected key `{key}` in transformed trace"),
                ));
            }
            return Ok(Provenance::Exp(Box::new(source)));
        }
        Ok(Provenance::Generated(ModelDescriptor::from_params(params)?))
    }

    pub fn descriptor(&self) -> Option<&ModelDescriptor> {
        match self {
            Provenance::Generated(d) => Some(d),
            _ => None,
        }
    }
}

/// A finite real-valued sample path.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    provenance: Provenance,
}

impl Series {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Size {
                len: values.len(),
                reason: "a series needs at least 2 samples".into(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Series { values, provenance })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Provenance::External)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least two samples.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Applies `f` elementwise; the result is tagged as external data.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Series> {
        Series::from_values(self.values.iter().map(|&v| f(v)).collect())
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst.is_finite() && hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "hurst",
            format!("must lie in the open interval (0,1), got {hurst}"),
        ))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {v}")))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be a finite positive number, got {v}"),
        ))
    }
}

fn strip_prefix(map: &mut BTreeMap<String, String>, prefix: &str) -> BTreeMap<String, String> {
    let keys: Vec<String> = map
        .keys()
        .filter(|k| k.starts_with(prefix))
        .cloned()
        .collect();
    keys.into_iter()
        .map(|k| {
            let v = map.remove(&k).expect("key listed above");
            (k[prefix.len()..].to_string(), v)
        })
        .collect()
}

fn take_parsed<T: FromStr>(map: &mut BTreeMap<String, String>, key: &'static str) -> Result<T> {
    let raw = map
        .remove(key)
        .ok_or_else(|| Error::param(key, "missing"))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::param(key, format!("cannot parse `{raw}`")))
}

struct ParamReader<'a> {
    params: &'a BTreeMap<String, String>,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a BTreeMap<String, String>) -> Self {
        ParamReader {
            params,
            used: Vec::new(),
        }
    }

    fn take_str(&mut self, key: &'static str) -> Result<String> {
        self.used.push(key);
        self.params
            .get(key)
            .map(|s| s.trim().to_string())
            .ok_or_else(|| Error::param(key, "missing"))
    }

    fn take<T: FromStr>(&mut self, key: &'static str) -> Result<T> {
        let raw = self.take_str(key)?;
        raw.parse()
            .map_err(|_| Error::param(key, format!("cannot parse `{raw}`")))
    }

    fn finish(self) -> Result<()> {
        let model = self.params.get("model").map(String::as_str).unwrap_or("?");
        for key in self.params.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(Error::Parameter {
                    name: "model",
                    reason: format!("parameter `{key}` does not apply to model `{model}`"),
                });
            }
        }
        Ok(())
    }
}
