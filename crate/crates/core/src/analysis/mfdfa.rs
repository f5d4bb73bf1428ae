use super::{log_mean_exp, ols, HurstSpectrum, Method, QGrid, ScalePlan};
use crate::error::Result;
use crate::series::Series;

/// Segment variances at or below `(ZERO_FLUCTUATION_ULPS * eps * max|profile|)^2`
/// are indistinguishable from rounding and count as zero.
const ZERO_FLUCTUATION_ULPS: f64 = 16.0;

/// Multifractal detrended fluctuation analysis.
///
/// The profile (running sum of the mean-removed series) is cut into
/// `floor(N/s)` windows from the start and as many from the end. Each window
/// is detrended with a least-squares polynomial of the plan's order, giving a
/// residual variance `F²(v, s)`. The q-th order fluctuation
/// `F_q(s) = (mean_v F²^{q/2})^{1/q}` (log-average at q = 0) is regressed on
/// `s` in log-log coordinates; the slope is h(q).
///
/// A q is marked undefined when some scale has no usable fluctuation for it:
/// zero-variance windows with q <= 0, or all windows zero.
pub fn mfdfa(x: &Series, q: &QGrid, plan: &ScalePlan) -> Result<HurstSpectrum> {
    let n = x.len();
    plan.validate_for(n)?;

    let profile = profile(x.values());
    let max_abs = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tol = (ZERO_FLUCTUATION_ULPS * f64::EPSILON * max_abs).powi(2);

    let per_scale: Vec<Vec<f64>> = plan
        .scales()
        .iter()
        .map(|&s| {
            let mut f2 = segment_variances(&profile, s, plan.detrend_order());
            for v in &mut f2 {
                if *v <= zero_tol {
                    *v = 0.0;
                }
            }
            f2
        })
        .collect();

    let log_scales: Vec<f64> = plan.scales().iter().map(|&s| (s as f64).ln()).collect();
    let mut h = Vec::with_capacity(q.len());
    let mut intercept = Vec::with_capacity(q.len());
    let mut r2 = Vec::with_capacity(q.len());
    let mut warnings = Vec::new();

    for &qv in q.values() {
        let mut log_fq = Vec::with_capacity(per_scale.len());
        let mut failed_at = None;
        for (f2, &s) in per_scale.iter().zip(plan.scales()) {
            match log_fluctuation(f2, qv) {
                Some(v) => log_fq.push(v),
                None => {
                    failed_at = Some(s);
                    break;
                }
            }
        }
        let fit = match failed_at {
            Some(s) => {
                warnings.push(format!(
                    "q={qv}: zero-fluctuation segments at scale {s}; h(q) undefined"
                ));
                None
            }
            None => ols(&log_scales, &log_fq),
        };
        h.push(fit.map(|f| f.slope));
        intercept.push(fit.map(|f| f.intercept));
        r2.push(fit.map(|f| f.r2));
    }

    Ok(HurstSpectrum {
        method: Method::Mfdfa,
        q: q.clone(),
        h,
        intercept,
        r2,
        scales: plan.scales().to_vec(),
        detrend_order: Some(plan.detrend_order()),
        warnings,
    })
}

/// Running sum of `x - mean(x)`; exactly zero for a constant series.
fn profile(x: &[f64]) -> Vec<f64> {
    if x.iter().all(|&v| v == x[0]) {
        return vec![0.0; x.len()];
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc += v - mean;
            acc
        })
        .collect()
}

/// `ln F_q(s)` from the window variances, or `None` if undefined.
fn log_fluctuation(f2: &[f64], q: f64) -> Option<f64> {
    let has_zero = f2.contains(&0.0);
    if q == 0.0 {
        if has_zero {
            return None;
        }
        let mean_log = f2.iter().map(|v| v.ln()).sum::<f64>() / f2.len() as f64;
        return Some(0.5 * mean_log);
    }
    if q < 0.0 && has_zero {
        return None;
    }
    let terms: Vec<f64> = f2
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| 0.5 * q * v.ln())
        .collect();
    let log_mean = log_mean_exp(&terms, f2.len());
    log_mean.is_finite().then(|| log_mean / q)
}

/// Residual variances after polynomial detrending, windows from the start
/// followed by windows from the end.
fn segment_variances(profile: &[f64], scale: usize, order: usize) -> Vec<f64> {
    let n = profile.len();
    let count = n / scale;
    let basis = orthonormal_poly_basis(scale, order);
    let mut residual = vec![0.0; scale];
    let mut out = Vec::with_capacity(2 * count);
    let starts = (0..count)
        .map(|v| v * scale)
        .chain((0..count).map(|v| n - (v + 1) * scale));
    for start in starts {
        residual.copy_from_slice(&profile[start..start + scale]);
        for b in &basis {
            let c: f64 = b.iter().zip(&residual).map(|(bi, ri)| bi * ri).sum();
            for (ri, bi) in residual.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        let ss: f64 = residual.iter().map(|r| r * r).sum();
        out.push(ss / scale as f64);
    }
    out
}

/// Orthonormal basis of polynomials of degree `<= order` sampled on `len`
/// equispaced points, built by twice-applied modified Gram-Schmidt on
/// monomials of `t` in [-1, 1].
fn orthonormal_poly_basis(len: usize, order: usize) -> Vec<Vec<f64>> {
    let t: Vec<f64> = (0..len)
        .map(|i| {
            if len == 1 {
                0.0
            } else {
                2.0 * i as f64 / (len - 1) as f64 - 1.0
            }
        })
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut v: Vec<f64> = t.iter().map(|x| x.powi(k as i32)).collect();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&v).map(|(bi, vi)| bi * vi).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        basis.push(v);
    }
    basis
}
