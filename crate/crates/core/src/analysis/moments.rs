use super::{log_mean_exp, ols, HurstSpectrum, Method, QGrid};
use crate::error::{Error, Result};
use crate::series::Series;

/// Generalized Hurst exponent from the scaling of block-sum moments.
///
/// The series is read as increments. For each block size t the absolute
/// sums of the `floor(N/t)` non-overlapping blocks from the start give
/// `S_q(t) = mean |block sum|^q`; the slope of `ln S_q(t)` against `ln t`
/// is `q h(q)` and the intercept is `ln c(q)`. h(0) is always undefined.
pub fn moment_spectrum(x: &Series, q: &QGrid, scales: &[usize]) -> Result<HurstSpectrum> {
    let n = x.len();
    validate_block_sizes(scales, n)?;

    let log_sums: Vec<Vec<f64>> = scales
        .iter()
        .map(|&t| {
            x.values()
                .chunks_exact(t)
                .map(|block| block.iter().sum::<f64>().abs().ln())
                .collect()
        })
        .collect();
    let log_scales: Vec<f64> = scales.iter().map(|&t| (t as f64).ln()).collect();

    let mut h = Vec::with_capacity(q.len());
    let mut intercept = Vec::with_capacity(q.len());
    let mut r2 = Vec::with_capacity(q.len());
    let mut warnings = Vec::new();

    for &qv in q.values() {
        if qv == 0.0 {
            h.push(None);
            intercept.push(None);
            r2.push(None);
            continue;
        }
        let mut log_s = Vec::with_capacity(scales.len());
        let mut failed_at = None;
        for (logs, &t) in log_sums.iter().zip(scales) {
            let has_zero = logs.contains(&f64::NEG_INFINITY);
            if qv < 0.0 && has_zero {
                failed_at = Some(t);
                break;
            }
            let terms: Vec<f64> = logs
                .iter()
                .filter(|v| v.is_finite())
                .map(|v| qv * v)
                .collect();
            let value = log_mean_exp(&terms, logs.len());
            if !value.is_finite() {
                failed_at = Some(t);
                break;
            }
            log_s.push(value);
        }
        let fit = match failed_at {
            Some(t) => {
                warnings.push(format!(
                    "q={qv}: zero block sums at block size {t}; h(q) undefined"
                ));
                None
            }
            None => ols(&log_scales, &log_s),
        };
        h.push(fit.map(|f| f.slope / qv));
        intercept.push(fit.map(|f| f.intercept));
        r2.push(fit.map(|f| f.r2));
    }

    Ok(HurstSpectrum {
        method: Method::Moments,
        q: q.clone(),
        h,
        intercept,
        r2,
        scales: scales.to_vec(),
        detrend_order: None,
        warnings,
    })
}

fn validate_block_sizes(scales: &[usize], n: usize) -> Result<()> {
    if scales.len() < 2 {
        return Err(Error::param(
            "scales",
            "need at least two block sizes to fit a slope",
        ));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "scales",
            "block sizes must be strictly increasing",
        ));
    }
    if scales[0] < 1 {
        return Err(Error::param("scales", "block sizes must be at least 1"));
    }
    let max = *scales.last().expect("checked above");
    if max > n / 4 {
        return Err(Error::Size {
            len: n,
            reason: format!("largest block size {max} exceeds n/4 = {}", n / 4),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_unit_exponent() {
        let x = Series::from_values(vec![0.37; 4096]).unwrap();
        let grid = QGrid::range(-3.0, 5.0, 0.5).unwrap();
        let spec = moment_spectrum(&x, &grid, &[1, 4, 16, 64, 256, 1024]).unwrap();
        for (q, h) in grid.values().iter().zip(&spec.h) {
            if *q == 0.0 {
                assert!(h.is_none());
            } else {
                assert!((h.unwrap() - 1.0).abs() < 1e-12, "q={q} h={h:?}");
            }
        }
    }

    #[test]
    fn intercept_is_log_moment_constant() {
        // constant c: S_q(t) = (c t)^q so ln c(q) = q ln c
        let c: f64 = 2.0;
        let x = Series::from_values(vec![c; 1024]).unwrap();
        let grid = QGrid::new(vec![1.0, 3.0]).unwrap();
        let spec = moment_spectrum(&x, &grid, &[2, 8, 32]).unwrap();
        assert!((spec.intercept[0].unwrap() - c.ln()).abs() < 1e-12);
        assert!((spec.intercept[1].unwrap() - 3.0 * c.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_blocks_undefine_negative_orders() {
        let mut v = vec![1.0; 64];
        v[0] = -1.0; // first pair of unit blocks cancels
        let x = Series::from_values(v).unwrap();
        let grid = QGrid::new(vec![-1.0, 1.0]).unwrap();
        let spec = moment_spectrum(&x, &grid, &[2, 4, 8]).unwrap();
        assert!(spec.h[0].is_none());
        assert!(spec.h[1].is_some());
        assert_eq!(spec.warnings.len(), 1);
    }

    #[test]
    fn block_size_validation() {
        let x = Series::from_values(vec![1.0; 100]).unwrap();
        let grid = QGrid::new(vec![1.0]).unwrap();
        assert!(moment_spectrum(&x, &grid, &[0, 4]).is_err());
        assert!(moment_spectrum(&x, &grid, &[4, 2]).is_err());
        assert!(matches!(
            moment_spectrum(&x, &grid, &[4, 26]),
            Err(Error::Size { .. })
        ));
        assert!(moment_spectrum(&x, &grid, &[4, 25]).is_ok());
    }
}
