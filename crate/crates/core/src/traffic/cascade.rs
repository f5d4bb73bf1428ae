//! Conservative binomial cascade with symmetric Beta weights, and its
//! closed-form generalized Hurst exponent.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Leaf masses of a `depth`-level cascade, rescaled by 2^depth so their mean is 1.
///
/// Cells are split level by level, left to right; each split draws one
/// `W ~ Beta(alpha, alpha)` and hands `W` of the mass to the left child and
/// `1 - W` to the right.
pub(crate) fn sample_cascade<R: Rng>(depth: u32, alpha: f64, rng: &mut R) -> Result<Vec<f64>> {
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::param("alpha", format!("cannot build Beta({alpha}, {alpha}): {e}")))?;
    let leaves = 1usize << depth;
    let mut mass = Vec::with_capacity(leaves);
    mass.push(1.0f64);
    let mut next = Vec::with_capacity(leaves);
    for _ in 0..depth {
        next.clear();
        for &m in &mass {
            let w: f64 = beta.sample(rng);
            next.push(m * w);
            next.push(m * (1.0 - w));
        }
        std::mem::swap(&mut mass, &mut next);
    }
    let norm = leaves as f64;
    for m in &mut mass {
        *m *= norm;
    }
    Ok(mass)
}

/// `ln E[W^q]` for `W ~ Beta(alpha, alpha)`.
pub fn beta_log_moment(q: f64, alpha: f64) -> f64 {
    libm::lgamma(2.0 * alpha) + libm::lgamma(alpha + q)
        - libm::lgamma(alpha)
        - libm::lgamma(2.0 * alpha + q)
}

/// Generalized Hurst exponent of the Beta(alpha, alpha) cascade:
/// `h(q) = -log2(E[W^q]) / q`.
///
/// At `q = 0` the removable singularity is filled in with a symmetric finite
/// difference of `-log2 E[W^q]` around zero.
pub fn cascade_theoretical_h(q: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param(
            "alpha",
            format!("must be a finite positive number, got {alpha}"),
        ));
    }
    if !q.is_finite() {
        return Err(Error::Domain(format!(
            "moment order must be finite, got {q}"
        )));
    }
    if q <= -alpha {
        return Err(Error::Domain(format!(
            "E[W^q] diverges for q <= -alpha (q={q}, alpha={alpha})"
        )));
    }
    let neg_log2 = |q: f64| -beta_log_moment(q, alpha) / std::f64::consts::LN_2;
    if q == 0.0 {
        let step = (1e-5f64).min(alpha / 2.0);
        return Ok((neg_log2(step) - neg_log2(-step)) / (2.0 * step));
    }
    Ok(neg_log2(q) / q)
}
