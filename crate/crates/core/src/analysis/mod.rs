//! Generalized Hurst exponent estimation.
//!
//! Two independent estimators produce a [`HurstSpectrum`]: multifractal
//! detrended fluctuation analysis ([`mfdfa`]) and the direct block-moment
//! scaling method ([`moment_spectrum`]). Both regress a log-moment against
//! log-scale by ordinary least squares and keep the per-q fit diagnostics.

mod mfdfa;
mod moments;
mod regression;

pub use mfdfa::mfdfa;
pub use moments::moment_spectrum;
pub use regression::{ols, LineFit};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::Series;

/// Fits with r² below this are reported as poor.
pub const POOR_FIT_R2: f64 = 0.95;

/// Number of default scales, log-spaced between [`DEFAULT_MIN_SCALE`] and N/4.
pub const DEFAULT_SCALE_COUNT: usize = 12;
pub const DEFAULT_MIN_SCALE: usize = 16;
pub const DEFAULT_DETREND_ORDER: usize = 2;

/// Strictly increasing, finite moment orders.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid(Vec<f64>);

impl QGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("q", "grid is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(
                "q",
                format!("moment orders must be finite, got {v}"),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "q",
                "moment orders must be strictly increasing",
            ));
        }
        Ok(QGrid(values))
    }

    /// `min, min + step, ...` up to and including `max` (within rounding).
    pub fn range(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param(
                "q-step",
                format!("must be positive, got {step}"),
            ));
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(Error::param(
                "q-max",
                format!("need finite q-min <= q-max, got [{min}, {max}]"),
            ));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|i| {
                let v = min + i as f64 * step;
                // snap to 12 decimals so 0 and tidy grid points are exact
                let snapped = (v * 1e12).round() / 1e12;
                if snapped == 0.0 {
                    0.0
                } else {
                    snapped
                }
            })
            .collect();
        QGrid::new(values)
    }

    /// 0.5 to 10 in steps of 0.5.
    pub fn positive_default() -> Self {
        QGrid::range(0.5, 10.0, 0.5).expect("static grid")
    }

    /// -10 to 10 in steps of 0.5.
    pub fn full_default() -> Self {
        QGrid::range(-10.0, 10.0, 0.5).expect("static grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Window sizes and detrending order for MFDFA.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePlan {
    scales: Vec<usize>,
    detrend_order: usize,
}

impl ScalePlan {
    pub fn new(scales: Vec<usize>, detrend_order: usize) -> Result<Self> {
        if scales.len() < 2 {
            return Err(Error::param(
                "scales",
                "need at least two scales to fit a slope",
            ));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("scales", "must be strictly increasing"));
        }
        if scales[0] < detrend_order + 2 {
            return Err(Error::param(
                "scales",
                format!(
                    "smallest scale {} must be at least detrend order + 2 = {}",
                    scales[0],
                    detrend_order + 2
                ),
            ));
        }
        Ok(ScalePlan {
            scales,
            detrend_order,
        })
    }

    /// Default plan for a series of length `n`: [`DEFAULT_SCALE_COUNT`]
    /// log-spaced integers from 16 to n/4 and quadratic detrending.
    pub fn default_for(n: usize) -> Result<Self> {
        Self::log_spaced(
            n,
            DEFAULT_MIN_SCALE,
            DEFAULT_SCALE_COUNT,
            DEFAULT_DETREND_ORDER,
        )
    }

    pub fn log_spaced(
        n: usize,
        min_scale: usize,
        count: usize,
        detrend_order: usize,
    ) -> Result<Self> {
        let max_scale = n / 4;
        if max_scale <= min_scale {
            return Err(Error::Size {
                len: n,
                reason: format!("need n/4 > {min_scale} for the default scale range"),
            });
        }
        Self::new(
            log_spaced_scales(min_scale, max_scale, count),
            detrend_order,
        )
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn detrend_order(&self) -> usize {
        self.detrend_order
    }

    /// Checks the plan against a series length.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        let max = *self.scales.last().expect("nonempty by construction");
        if max > n / 4 {
            return Err(Error::Size {
                len: n,
                reason: format!("largest scale {max} exceeds n/4 = {}", n / 4),
            });
        }
        Ok(())
    }
}

/// Up to `count` distinct integers, geometrically spaced over `[min, max]`.
pub fn log_spaced_scales(min: usize, max: usize, count: usize) -> Vec<usize> {
    if count <= 1 || max <= min {
        return vec![min];
    }
    let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as usize
        })
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mfdfa,
    Moments,
    /// Closed-form cascade exponent, not an estimate.
    CascadeOracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mfdfa => "mfdfa",
            Method::Moments => "moments",
            Method::CascadeOracle => "cascade-oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mfdfa" => Ok(Method::Mfdfa),
            "moments" => Ok(Method::Moments),
            "cascade-oracle" => Ok(Method::CascadeOracle),
            other => Err(Error::param(
                "method",
                format!("unknown method `{other}` (mfdfa, moments)"),
            )),
        }
    }
}

/// h(q) with per-q regression diagnostics. `None` marks orders where the
/// estimate is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstSpectrum {
    pub method: Method,
    pub q: QGrid,
    pub h: Vec<Option<f64>>,
    /// Intercept of the log-log fit: ln C(q) for moments, ln of the F_q prefactor for MFDFA.
    pub intercept: Vec<Option<f64>>,
    pub r2: Vec<Option<f64>>,
    pub scales: Vec<usize>,
    pub detrend_order: Option<usize>,
    pub warnings: Vec<String>,
}

impl HurstSpectrum {
    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.q
            .values()
            .iter()
            .position(|&v| (v - q).abs() < 1e-9)
            .and_then(|i| self.h[i])
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.h[i].is_some()
    }

    /// `max h - min h` over defined orders in `[q_min, q_max]`.
    pub fn spread(&self, q_min: f64, q_max: f64) -> Option<f64> {
        let hs: Vec<f64> = self
            .q
            .values()
            .iter()
            .zip(&self.h)
            .filter(|(q, _)| **q >= q_min - 1e-12 && **q <= q_max + 1e-12)
            .filter_map(|(_, h)| *h)
            .collect();
        if hs.is_empty() {
            return None;
        }
        let max = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = hs.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(max - min)
    }

    /// Orders whose fit has r² below [`POOR_FIT_R2`].
    pub fn poor_fits(&self) -> Vec<f64> {
        self.q
            .values()
            .iter()
            .zip(&self.r2)
            .filter(|(_, r2)| matches!(r2, Some(v) if *v < POOR_FIT_R2))
            .map(|(q, _)| *q)
            .collect()
    }
}

/// h(2) by MFDFA with the default plan.
pub fn hurst_h2(x: &Series) -> Result<f64> {
    let plan = ScalePlan::default_for(x.len())?;
    let grid = QGrid::new(vec![2.0])?;
    let spec = mfdfa(x, &grid, &plan)?;
    spec.h[0].ok_or_else(|| Error::Degenerate("h(2) is undefined: zero fluctuations".into()))
}

/// Mean absolute difference of two spectra over the grid points in `[q_min, q_max]`.
pub fn spectrum_deviation(
    a: &HurstSpectrum,
    b: &HurstSpectrum,
    q_min: f64,
    q_max: f64,
) -> Result<f64> {
    if a.q != b.q {
        return Err(Error::Contract("spectra are on different q grids".into()));
    }
    if a.method != b.method {
        return Err(Error::Contract(format!(
            "spectra come from different methods ({} vs {})",
            a.method, b.method
        )));
    }
    if q_min.is_nan() || q_max.is_nan() || q_min > q_max {
        return Err(Error::Domain(format!("empty q range [{q_min}, {q_max}]")));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, &q) in a.q.values().iter().enumerate() {
        if q < q_min - 1e-12 || q > q_max + 1e-12 {
            continue;
        }
        match (a.h[i], b.h[i]) {
            (Some(x), Some(y)) => {
                total += (x - y).abs();
                count += 1;
            }
            _ => {
                return Err(Error::Degenerate(format!(
                    "h({q}) is undefined in one of the spectra"
                )))
            }
        }
    }
    if count == 0 {
        return Err(Error::Domain(format!(
            "no grid point lies in [{q_min}, {q_max}]"
        )));
    }
    Ok(total / count as f64)
}

/// `ln(mean_i exp(terms_i))` over `count` items, where items not in `terms`
/// contribute zero to the mean. Returns `-inf` when `terms` is empty.
pub(crate) fn log_mean_exp(terms: &[f64], count: usize) -> f64 {
    if terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln() - (count as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(h: Vec<Option<f64>>) -> HurstSpectrum {
        let q = QGrid::range(0.5, 0.5 * h.len() as f64, 0.5).unwrap();
        let n = h.len();
        HurstSpectrum {
            method: Method::Mfdfa,
            q,
            h,
            intercept: vec![Some(0.0); n],
            r2: vec![Some(1.0); n],
            scales: vec![16, 32],
            detrend_order: Some(2),
            warnings: vec![],
        }
    }

    #[test]
    fn grid_arithmetic() {
        assert_eq!(QGrid::positive_default().len(), 20);
        let full = QGrid::full_default();
        assert_eq!(full.len(), 41);
        assert!(full.values().contains(&0.0));
        assert_eq!(QGrid::range(1.0, 1.0, 0.5).unwrap().values(), &[1.0]);
        assert_eq!(QGrid::range(0.0, 1.0, 0.1).unwrap().values()[3], 0.3);
        assert!(QGrid::new(vec![1.0, 1.0]).is_err());
        assert!(QGrid::new(vec![2.0, 1.0]).is_err());
        assert!(QGrid::range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn default_scales() {
        let plan = ScalePlan::default_for(1 << 14).unwrap();
        let s = plan.scales();
        assert_eq!(s.len(), 12);
        assert_eq!(s[0], 16);
        assert_eq!(*s.last().unwrap(), 4096);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(plan.detrend_order(), 2);
    }

    #[test]
    fn plan_invariants() {
        assert!(ScalePlan::new(vec![3, 8], 2).is_err());
        assert!(ScalePlan::new(vec![4, 8], 2).is_ok());
        assert!(ScalePlan::new(vec![8, 8], 1).is_err());
        assert!(ScalePlan::new(vec![8], 1).is_err());
        let plan = ScalePlan::new(vec![8, 64], 1).unwrap();
        assert!(plan.validate_for(256).is_ok());
        assert!(matches!(plan.validate_for(255), Err(Error::Size { .. })));
    }

    #[test]
    fn deviation_identity_and_offset() {
        let a = spectrum((1..=20).map(|i| Some(1.0 / i as f64)).collect());
        assert_eq!(spectrum_deviation(&a, &a, 0.5, 10.0).unwrap(), 0.0);
        let mut b = a.clone();
        for h in &mut b.h {
            *h = h.map(|v| v + 0.07);
        }
        let d = spectrum_deviation(&a, &b, 0.5, 10.0).unwrap();
        assert!((d - 0.07).abs() < 1e-12);
    }

    #[test]
    fn deviation_contract_errors() {
        let a = spectrum(vec![Some(1.0); 4]);
        let b = spectrum(vec![Some(1.0); 5]);
        assert!(matches!(
            spectrum_deviation(&a, &b, 0.5, 2.0),
            Err(Error::Contract(_))
        ));
        let mut c = a.clone();
        c.method = Method::Moments;
        assert!(matches!(
            spectrum_deviation(&a, &c, 0.5, 2.0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            spectrum_deviation(&a, &a, 5.0, 9.0),
            Err(Error::Domain(_))
        ));
        let mut d = a.clone();
        d.h[1] = None;
        assert!(matches!(
            spectrum_deviation(&a, &d, 0.5, 2.0),
            Err(Error::Degenerate(_))
        ));
        assert!(spectrum_deviation(&a, &d, 1.5, 2.0).is_ok());
    }

    #[test]
    fn log_mean_exp_matches_direct() {
        let terms = [0.1f64, -2.0, 3.0];
        let direct = (terms.iter().map(|t| t.exp()).sum::<f64>() / 5.0).ln();
        assert!((log_mean_exp(&terms, 5) - direct).abs() < 1e-14);
        assert_eq!(log_mean_exp(&[], 3), f64::NEG_INFINITY);
    }
}
