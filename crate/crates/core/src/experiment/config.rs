//! Sweep configuration and its TOML representation.
//!
//! ```toml
//! base_seed = 1
//! replicates = 20
//! method = "mfdfa"              # or "moments"
//! snr_levels = [1, 2, 4, 5, 10]
//! deviation_range = [0.5, 10]
//!
//! [q]                           # or: values = [0.5, 1, 2]
//! min = 0.5
//! max = 10
//! step = 0.5
//!
//! [plan]                        # or: scales = [16, 32, 64, ...]
//! detrend_order = 2
//! min_scale = 16
//! scale_count = 12
//!
//! [signal]
//! model = "cascade"
//! depth = 14
//! alpha = 1.0
//!
//! [[noise]]
//! label = "exp-white-noise"
//! model = "exp-fgn"
//! hurst = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use crate::analysis::{
    log_spaced_scales, Method, QGrid, ScalePlan, DEFAULT_DETREND_ORDER, DEFAULT_MIN_SCALE,
    DEFAULT_SCALE_COUNT,
};
use crate::error::{Error, Result};
use crate::series::{Dist, ModelDescriptor, ModelSpec};

pub const DEFAULT_REPLICATES: usize = 20;
pub const DEFAULT_SNR_LEVELS: [f64; 5] = [1.0, 2.0, 4.0, 5.0, 10.0];
pub const DEFAULT_DEVIATION_RANGE: (f64, f64) = (0.5, 10.0);

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub label: String,
    pub spec: ModelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub signal: ModelSpec,
    /// Common length of the signal and every noise stream.
    pub n: usize,
    pub noise: Vec<NoiseModel>,
    pub snr_levels: Vec<f64>,
    pub replicates: usize,
    pub q: QGrid,
    pub plan: ScalePlan,
    pub method: Method,
    pub base_seed: u64,
    pub deviation_range: (f64, f64),
}

impl ExperimentConfig {
    /// Depth-14 Beta(1,1) cascade against the four noise families, MFDFA on
    /// q = 0.5..10, 20 replicates.
    pub fn default_sweep() -> Self {
        let signal = ModelSpec::Cascade {
            depth: 14,
            alpha: 1.0,
        };
        let n = 1 << 14;
        ExperimentConfig {
            signal,
            n,
            noise: default_noise_suite(),
            snr_levels: DEFAULT_SNR_LEVELS.to_vec(),
            replicates: DEFAULT_REPLICATES,
            q: QGrid::positive_default(),
            plan: ScalePlan::default_for(n).expect("n = 2^14 admits the default plan"),
            method: Method::Mfdfa,
            base_seed: 1,
            deviation_range: DEFAULT_DEVIATION_RANGE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |path: &str, reason: String| Error::Config {
            path: path.to_string(),
            reason,
        };
        ModelDescriptor::new(self.signal, self.n, self.base_seed)
            .map_err(|e| cfg_err("signal", e.to_string()))?;
        if self.noise.is_empty() {
            return Err(cfg_err(
                "noise",
                "at least one noise model is required".into(),
            ));
        }
        for (i, nm) in self.noise.iter().enumerate() {
            if nm.label.is_empty() {
                return Err(cfg_err(
                    &format!("noise[{i}].label"),
                    "must not be empty".into(),
                ));
            }
            if self.noise[..i].iter().any(|o| o.label == nm.label) {
                return Err(cfg_err(
                    &format!("noise[{i}].label"),
                    format!("duplicate label `{}`", nm.label),
                ));
            }
            ModelDescriptor::new(nm.spec, self.n, 0)
                .map_err(|e| cfg_err(&format!("noise[{i}]"), e.to_string()))?;
        }
        if self.snr_levels.is_empty() {
            return Err(cfg_err("snr_levels", "must not be empty".into()));
        }
        if let Some(bad) = self
            .snr_levels
            .iter()
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(cfg_err(
                "snr_levels",
                format!("levels must be finite and positive, got {bad}"),
            ));
        }
        if self.snr_levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err("snr_levels", "must be strictly increasing".into()));
        }
        if self.replicates == 0 {
            return Err(cfg_err("replicates", "must be at least 1".into()));
        }
        if self.method == Method::CascadeOracle {
            return Err(cfg_err("method", "must be `mfdfa` or `moments`".into()));
        }
        self.plan
            .validate_for(self.n)
            .map_err(|e| cfg_err("plan.scales", e.to_string()))?;
        let (lo, hi) = self.deviation_range;
        if lo.is_nan()
            || hi.is_nan()
            || lo > hi
            || !self
                .q
                .values()
                .iter()
                .any(|&q| q >= lo - 1e-12 && q <= hi + 1e-12)
        {
            return Err(cfg_err(
                "deviation_range",
                format!("[{lo}, {hi}] contains no point of the q grid"),
            ));
        }
        Ok(())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
            path: "<document>".into(),
            reason: e.to_string().trim().to_string(),
        })?;
        let mut root = Fields::new(table, "");
        let defaults = Self::default_sweep();

        let base_seed = root.opt_u64("base_seed")?.unwrap_or(defaults.base_seed);
        let replicates = root.opt_usize("replicates")?.unwrap_or(defaults.replicates);
        let method = match root.opt_str("method")? {
            Some(s) => s.parse().map_err(|e: Error| cfg("method", e.to_string()))?,
            None => defaults.method,
        };
        let snr_levels = root
            .opt_f64_array("snr_levels")?
            .unwrap_or(defaults.snr_levels);
        let deviation_range = match root.opt_f64_array("deviation_range")? {
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(v) => {
                return Err(cfg(
                    "deviation_range",
                    format!("expected [min, max], got {} values", v.len()),
                ))
            }
            None => defaults.deviation_range,
        };

        let (signal, n) = match root.opt_table("signal")? {
            Some(mut t) => {
                let n = t.opt_usize("n")?;
                let spec = t.model_spec()?;
                let n = match (n, spec.implied_len()) {
                    (Some(n), _) => n,
                    (None, Some(n)) => n,
                    (None, None) => {
                        return Err(cfg(
                            "signal.n",
                            "required for models without an implied length".into(),
                        ))
                    }
                };
                (spec, n)
            }
            None => (defaults.signal, defaults.n),
        };

        let noise = match root.opt_table_array("noise")? {
            Some(entries) => entries
                .into_iter()
                .map(|mut t| {
                    let label = t.opt_str("label")?;
                    let spec = t.model_spec()?;
                    Ok(NoiseModel {
                        label: label.unwrap_or_else(|| default_label(&spec)),
                        spec,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            None => defaults.noise,
        };

        let q = match root.opt_table("q")? {
            Some(mut t) => {
                let values = t.opt_f64_array("values")?;
                let min = t.opt_f64("min")?;
                let max = t.opt_f64("max")?;
                let step = t.opt_f64("step")?;
                t.finish()?;
                match (values, min, max, step) {
                    (Some(v), None, None, None) => QGrid::new(v),
                    (None, Some(lo), Some(hi), Some(st)) => QGrid::range(lo, hi, st),
                    _ => {
                        return Err(cfg(
                            "q",
                            "give either `values` or all of `min`, `max`, `step`".into(),
                        ))
                    }
                }
                .map_err(|e| cfg("q", e.to_string()))?
            }
            None => defaults.q,
        };

        let plan = match root.opt_table("plan")? {
            Some(mut t) => {
                let order = t
                    .opt_usize("detrend_order")?
                    .unwrap_or(DEFAULT_DETREND_ORDER);
                let scales = t.opt_usize_array("scales")?;
                let min_scale = t.opt_usize("min_scale")?;
                let count = t.opt_usize("scale_count")?;
                t.finish()?;
                let scales = match (scales, min_scale, count) {
                    (Some(s), None, None) => s,
                    (None, lo, count) => log_spaced_scales(
                        lo.unwrap_or(DEFAULT_MIN_SCALE),
                        n / 4,
                        count.unwrap_or(DEFAULT_SCALE_COUNT),
                    ),
                    _ => {
                        return Err(cfg(
                            "plan",
                            "give either `scales` or `min_scale`/`scale_count`".into(),
                        ))
                    }
                };
                ScalePlan::new(scales, order).map_err(|e| cfg("plan", e.to_string()))?
            }
            None => ScalePlan::default_for(n).map_err(|e| cfg("plan", e.to_string()))?,
        };
        root.finish()?;

        let config = ExperimentConfig {
            signal,
            n,
            noise,
            snr_levels,
            replicates,
            q,
            plan,
            method,
            base_seed,
            deviation_range,
        };
        config.validate()?;
        Ok(config)
    }

    /// Canonical TOML rendering; parsing it back yields an equal config.
    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "base_seed = {}", self.base_seed);
        let _ = writeln!(out, "replicates = {}", self.replicates);
        let _ = writeln!(out, "method = \"{}\"", self.method);
        let _ = writeln!(out, "snr_levels = [{}]", join_f64(&self.snr_levels));
        let _ = writeln!(
            out,
            "deviation_range = [{}, {}]",
            float(self.deviation_range.0),
            float(self.deviation_range.1)
        );
        let _ = writeln!(out, "\n[q]\nvalues = [{}]", join_f64(self.q.values()));
        let scales: Vec<String> = self.plan.scales().iter().map(|s| s.to_string()).collect();
        let _ = writeln!(
            out,
            "\n[plan]\ndetrend_order = {}\nscales = [{}]",
            self.plan.detrend_order(),
            scales.join(", ")
        );
        let _ = writeln!(out, "\n[signal]");
        if self.signal.implied_len().is_none() {
            let _ = writeln!(out, "n = {}", self.n);
        }
        write_spec(&mut out, &self.signal);
        for nm in &self.noise {
            let _ = writeln!(out, "\n[[noise]]\nlabel = \"{}\"", nm.label);
            write_spec(&mut out, &nm.spec);
        }
        out
    }
}

fn default_noise_suite() -> Vec<NoiseModel> {
    vec![
        NoiseModel {
            label: "exp-white-noise".into(),
            spec: ModelSpec::ExpFgn { hurst: 0.5 },
        },
        NoiseModel {
            label: "exp-fgn-h0.8".into(),
            spec: ModelSpec::ExpFgn { hurst: 0.8 },
        },
        NoiseModel {
            label: "ar1-phi0.7".into(),
            spec: ModelSpec::Ar1 {
                phi: 0.7,
                sigma: 1.0,
            },
        },
        NoiseModel {
            label: "iid-uniform".into(),
            spec: ModelSpec::Iid {
                dist: Dist::Uniform {
                    low: 0.0,
                    high: 1.0,
                },
            },
        },
    ]
}

fn default_label(spec: &ModelSpec) -> String {
    spec.to_params()
        .into_iter()
        .map(|(_, v)| v)
        .collect::<Vec<_>>()
        .join("-")
}

fn write_spec(out: &mut String, spec: &ModelSpec) {
    for (k, v) in spec.to_params() {
        match k {
            "model" | "dist" => {
                let _ = writeln!(out, "{k} = \"{v}\"");
            }
            "depth" => {
                let _ = writeln!(out, "{k} = {v}");
            }
            _ => {
                let _ = writeln!(
                    out,
                    "{k} = {}",
                    float(v.parse().expect("numeric parameter"))
                );
            }
        }
    }
}

/// TOML float literal that always carries a decimal point or exponent.
fn float(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| float(*v))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cfg(path: &str, reason: String) -> Error {
    Error::Config {
        path: path.to_string(),
        reason,
    }
}

/// A TOML table whose keys are consumed one by one; leftovers are errors.
struct Fields {
    table: Table,
    prefix: String,
}

impl Fields {
    fn new(table: Table, prefix: &str) -> Self {
        Fields {
            table,
            prefix: prefix.to_string(),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}{key}", self.prefix)
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        let path = self.path(key);
        self.take(key).map(|v| as_f64(&v, &path)).transpose()
    }

    fn opt_u64(&mut self, key: &str) -> Result<Option<u64>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::Integer(i) if i >= 0 => Ok(i as u64),
                other => Err(cfg(
                    &path,
                    format!("expected a nonnegative integer, got {other}"),
                )),
            })
            .transpose()
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        Ok(self.opt_u64(key)?.map(|v| v as usize))
    }

    fn opt_str(&mut self, key: &str) -> Result<Option<String>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::String(s) => Ok(s),
                other => Err(cfg(&path, format!("expected a string, got {other}"))),
            })
            .transpose()
    }

    fn opt_f64_array(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::Array(items) => items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| as_f64(item, &format!("{path}[{i}]")))
                    .collect(),
                other => Err(cfg(&path, format!("expected an array, got {other}"))),
            })
            .transpose()
    }

    fn opt_usize_array(&mut self, key: &str) -> Result<Option<Vec<usize>>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::Array(items) => items
                    .iter()
                    .enumerate()
                    .map(|(i, item)| match item {
                        Value::Integer(x) if *x >= 0 => Ok(*x as usize),
                        other => Err(cfg(
                            &format!("{path}[{i}]"),
                            format!("expected a nonnegative integer, got {other}"),
                        )),
                    })
                    .collect(),
                other => Err(cfg(&path, format!("expected an array, got {other}"))),
            })
            .transpose()
    }

    fn opt_table(&mut self, key: &str) -> Result<Option<Fields>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::Table(t) => Ok(Fields::new(t, &format!("{path}."))),
                other => Err(cfg(&path, format!("expected a table, got {other}"))),
            })
            .transpose()
    }

    fn opt_table_array(&mut self, key: &str) -> Result<Option<Vec<Fields>>> {
        let path = self.path(key);
        self.take(key)
            .map(|v| match v {
                Value::Array(items) => items
                    .into_iter()
                    .enumerate()
                    .map(|(i, item)| match item {
                        Value::Table(t) => Ok(Fields::new(t, &format!("{path}[{i}]."))),
                        other => Err(cfg(
                            &format!("{path}[{i}]"),
                            format!("expected a table, got {other}"),
                        )),
                    })
                    .collect(),
                other => Err(cfg(
                    &path,
                    format!("expected an array of tables, got {other}"),
                )),
            })
            .transpose()
    }

    /// Consumes every remaining key as a model parameter.
    fn model_spec(&mut self) -> Result<ModelSpec> {
        let mut params = BTreeMap::new();
        for (k, v) in std::mem::take(&mut self.table) {
            let s = match &v {
                Value::String(s) => s.clone(),
                Value::Integer(i) => i.to_string(),
                Value::Float(f) => f.to_string(),
                other => return Err(cfg(&self.path(&k), format!("unsupported value {other}"))),
            };
            params.insert(k, s);
        }
        ModelSpec::from_params(&params).map_err(|e| match e {
            Error::Parameter { name, reason } => cfg(&self.path(name), reason),
            other => cfg(self.prefix.trim_end_matches('.'), other.to_string()),
        })
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            Some(k) => Err(cfg(&self.path(k), "unknown key".into())),
            None => Ok(()),
        }
    }
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(cfg(path, format!("expected a number, got {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default_sweep());
    }

    #[test]
    fn canonical_rendering_round_trips() {
        let cfg = ExperimentConfig::default_sweep();
        let text = cfg.to_toml_string();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);

        let mut other = cfg.clone();
        other.signal = ModelSpec::Fgn { hurst: 0.7 };
        other.n = 4096;
        other.plan = ScalePlan::default_for(4096).unwrap();
        other.method = Method::Moments;
        other.q = QGrid::new(vec![-1.0, 1.0, 2.5]).unwrap();
        other.deviation_range = (1.0, 2.5);
        assert_eq!(
            ExperimentConfig::from_toml_str(&other.to_toml_string()).unwrap(),
            other
        );
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("replicates = 0", "replicates"),
            ("snr_levels = [2, 1]", "snr_levels"),
            ("bogus = 1", "bogus"),
            (
                "[[noise]]\nmodel = \"exp-fgn\"\nhurst = 1.5",
                "noise[0].hurst",
            ),
            (
                "[[noise]]\nmodel = \"ar1\"\nphi = 0.5\nsigma = 1\nhurst = 0.5",
                "noise[0].model",
            ),
            ("[q]\nmin = 1", "q"),
            ("[plan]\nwidth = 3", "plan.width"),
            ("method = \"wavelet\"", "method"),
        ];
        for (doc, path) in cases {
            match ExperimentConfig::from_toml_str(doc) {
                Err(Error::Config { path: p, .. }) => assert_eq!(p, path, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn noise_labels_default_from_model() {
        let cfg =
            ExperimentConfig::from_toml_str("[[noise]]\nmodel = \"ar1\"\nphi = 0.5\nsigma = 1")
                .unwrap();
        assert_eq!(cfg.noise[0].label, "ar1-0.5-1");
    }
}
