//! Statistical checks of the stream generators against closed-form laws.

use mfmix_core::analysis::{hurst_h2, mfdfa, moment_spectrum, QGrid, ScalePlan};
use mfmix_core::traffic::{
    cascade_theoretical_h, exp_transform, gen_ar1, gen_cascade, gen_exp_fgn, gen_fbm, gen_fgn,
    gen_iid,
};
use mfmix_core::Dist;

const N: usize = 1 << 14;
const SEEDS: u64 = 10;

/// Closed-form fGn autocovariance, written out independently of the crate.
fn gamma(k: f64, h: f64) -> f64 {
    0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
}

fn sample_acov(x: &[f64], lag: usize) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter()
        .zip(&x[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

fn seed_mean(f: impl Fn(u64) -> f64) -> f64 {
    (0..SEEDS).map(f).sum::<f64>() / SEEDS as f64
}

#[test]
fn fgn_white_case_has_no_correlation() {
    let x = gen_fgn(8, 0.5, 1).unwrap();
    assert_eq!(x.len(), 8);
    let long = gen_fgn(1 << 16, 0.5, 1).unwrap();
    for lag in 1..=5 {
        assert!(sample_acov(long.values(), lag).abs() < 0.02, "lag {lag}");
    }
}

#[test]
fn fgn_covariance_fidelity() {
    for &h in &[0.6, 0.8] {
        let series: Vec<Vec<f64>> = (0..SEEDS)
            .map(|s| gen_fgn(N, h, s).unwrap().into_values())
            .collect();
        for lag in 0..=20 {
            let avg = series.iter().map(|x| sample_acov(x, lag)).sum::<f64>() / SEEDS as f64;
            let expected = gamma(lag as f64, h);
            assert!(
                (avg - expected).abs() <= 0.05,
                "H={h} lag={lag}: sample {avg:.4} vs {expected:.4}"
            );
        }
    }
}

#[test]
fn fgn_mfdfa_recovers_hurst() {
    let h2 = seed_mean(|s| hurst_h2(&gen_fgn(N, 0.8, s).unwrap()).unwrap());
    assert!((0.75..=0.85).contains(&h2), "{h2}");
}

#[test]
fn fbm_white_case_has_iid_gaussian_increments() {
    let path = gen_fbm(1 << 15, 0.5, 4).unwrap();
    let v = path.values();
    let inc: Vec<f64> = std::iter::once(v[0])
        .chain(v.windows(2).map(|w| w[1] - w[0]))
        .collect();
    assert!(mean(&inc).abs() < 0.03);
    assert!((var(&inc) - 1.0).abs() < 0.03);
    assert!((sample_acov(&inc, 1) / sample_acov(&inc, 0)).abs() < 0.03);
    // share within one standard deviation of a standard normal: erf(1/sqrt 2)
    let within = inc.iter().filter(|x| x.abs() < 1.0).count() as f64 / inc.len() as f64;
    assert!((within - 0.682_689_492).abs() < 0.015, "{within}");
}

#[test]
fn fbm_variance_scales_as_power_law() {
    // Var[X(2t)] / Var[X(t)] = 2^{2H}, measured across realizations
    let h = 0.7;
    let n = 1 << 12;
    let paths: Vec<Vec<f64>> = (0..400)
        .map(|s| gen_fbm(n, h, 3 + s).unwrap().into_values())
        .collect();
    let var_at = |t: usize| {
        let vals: Vec<f64> = paths.iter().map(|p| p[t - 1]).collect();
        vals.iter().map(|x| x * x).sum::<f64>() / vals.len() as f64
    };
    let target = 2f64.powf(2.0 * h);
    for j in 3..11 {
        let t = 1usize << j;
        let ratio = var_at(2 * t) / var_at(t);
        assert!(
            (ratio / target - 1.0).abs() <= 0.15,
            "t={t}: ratio {ratio:.3} vs {target:.3}"
        );
    }
}

#[test]
fn exp_transform_preserves_hurst() {
    let h2 =
        seed_mean(|s| hurst_h2(&exp_transform(&gen_fgn(N, 0.8, s).unwrap()).unwrap()).unwrap());
    assert!((0.72..=0.88).contains(&h2), "{h2}");
}

#[test]
fn exp_white_noise_is_lognormal() {
    let y = gen_exp_fgn(N, 0.5, 8).unwrap();
    let logs: Vec<f64> = y.values().iter().map(|v| v.ln()).collect();
    assert!(mean(&logs).abs() < 0.03);
    assert!((var(&logs) - 1.0).abs() < 0.04);
    // lognormal mean e^{1/2}
    assert!((mean(y.values()) - 0.5f64.exp()).abs() < 0.05);
}

#[test]
fn cascade_moment_exponents_match_beta_oracle() {
    let q = QGrid::new(vec![1.0, 2.0]).unwrap();
    let scales = ScalePlan::default_for(N).unwrap().scales().to_vec();
    let mut h1 = 0.0;
    let mut h2 = 0.0;
    for s in 0..SEEDS {
        let spec = moment_spectrum(&gen_cascade(14, 1.0, s).unwrap(), &q, &scales).unwrap();
        h1 += spec.h[0].unwrap() / SEEDS as f64;
        h2 += spec.h[1].unwrap() / SEEDS as f64;
    }
    assert!((h1 - 1.0).abs() <= 0.05, "{h1}");
    let oracle = cascade_theoretical_h(2.0, 1.0).unwrap();
    assert!((h2 - oracle).abs() <= 0.1, "{h2} vs {oracle}");
}

#[test]
fn ar1_lag_one_correlation_and_variance() {
    let phi = 0.7;
    let rho = seed_mean(|s| {
        let x = gen_ar1(N, phi, 1.0, s).unwrap();
        sample_acov(x.values(), 1) / sample_acov(x.values(), 0)
    });
    assert!((rho - phi).abs() <= 0.03, "{rho}");
    let v = seed_mean(|s| var(gen_ar1(N, phi, 1.0, s).unwrap().values()));
    let stationary = 1.0 / (1.0 - phi * phi);
    assert!((v / stationary - 1.0).abs() <= 0.10, "{v} vs {stationary}");
}

#[test]
fn ar1_is_monofractal() {
    let q = QGrid::range(1.0, 5.0, 1.0).unwrap();
    let plan = ScalePlan::default_for(N).unwrap();
    let mut acc = vec![0.0; q.len()];
    for s in 0..SEEDS {
        let spec = mfdfa(&gen_ar1(N, 0.7, 1.0, s).unwrap(), &q, &plan).unwrap();
        for (a, h) in acc.iter_mut().zip(&spec.h) {
            *a += h.unwrap() / SEEDS as f64;
        }
    }
    let spread =
        acc.iter().cloned().fold(f64::MIN, f64::max) - acc.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.1, "{acc:?}");
}

#[test]
fn uniform_noise_moments_and_hurst() {
    let u = Dist::Uniform {
        low: 0.0,
        high: 1.0,
    };
    let x = gen_iid(N, u, 21).unwrap();
    assert!((mean(x.values()) - 0.5).abs() <= 0.02);
    assert!((var(x.values()) - 1.0 / 12.0).abs() <= 0.005);
    let h2 = seed_mean(|s| hurst_h2(&gen_iid(N, u, s).unwrap()).unwrap());
    assert!((0.45..=0.55).contains(&h2), "{h2}");
}

#[test]
fn normal_noise_matches_white_fgn_in_distribution() {
    let a = gen_iid(
        N,
        Dist::Normal {
            mean: 0.0,
            std: 1.0,
        },
        5,
    )
    .unwrap()
    .into_values();
    let b = gen_fgn(N, 0.5, 6).unwrap().into_values();
    // two-sample Kolmogorov-Smirnov statistic
    let mut sa = a.clone();
    let mut sb = b.clone();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / sa.len() as f64 - j as f64 / sb.len() as f64).abs());
    }
    // critical value at the 0.1% level: 1.95 sqrt(2/n)
    let crit = 1.95 * (2.0 / N as f64).sqrt();
    assert!(d < crit, "KS {d} >= {crit}");
}
