use mfmix_core::analysis::{mfdfa, moment_spectrum, QGrid, ScalePlan};
use mfmix_core::traffic::{cascade_theoretical_h, exp_transform, gen_cascade, gen_fgn, generate};
use mfmix_core::{Dist, ModelDescriptor, ModelSpec, Series};
use proptest::prelude::*;

fn model_spec() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|hurst| ModelSpec::Fgn { hurst }),
        (0.05f64..0.95).prop_map(|hurst| ModelSpec::Fbm { hurst }),
        (0.05f64..0.95).prop_map(|hurst| ModelSpec::ExpFgn { hurst }),
        (1u32..10, 0.1f64..10.0).prop_map(|(depth, alpha)| ModelSpec::Cascade { depth, alpha }),
        (-0.95f64..0.95, 0.1f64..5.0).prop_map(|(phi, sigma)| ModelSpec::Ar1 { phi, sigma }),
        (-5.0f64..5.0, 0.1f64..3.0).prop_map(|(low, w)| ModelSpec::Iid {
            dist: Dist::Uniform { low, high: low + w }
        }),
    ]
}

fn descriptor() -> impl Strategy<Value = ModelDescriptor> {
    (model_spec(), 2usize..600, any::<u64>()).prop_map(|(spec, n, seed)| match spec.implied_len() {
        Some(_) => ModelDescriptor::with_implied_len(spec, seed).unwrap(),
        None => ModelDescriptor::new(spec, n, seed).unwrap(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generation_is_a_function_of_the_descriptor(desc in descriptor()) {
        let a = generate(&desc).unwrap();
        let b = generate(&desc).unwrap();
        prop_assert_eq!(a.len(), desc.n);
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cascade_conserves_mass_and_stays_positive(depth in 1u32..13, alpha in 0.1f64..10.0, seed in any::<u64>()) {
        let x = gen_cascade(depth, alpha, seed).unwrap();
        prop_assert_eq!(x.len(), 1usize << depth);
        let m = x.values().iter().sum::<f64>() / x.len() as f64;
        prop_assert!((m - 1.0).abs() <= 1e-10, "mean {}", m);
        prop_assert!(x.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn exp_transform_is_positive_and_elementwise(n in 2usize..400, hurst in 0.05f64..0.95, seed in any::<u64>()) {
        let x = gen_fgn(n, hurst, seed).unwrap();
        let y = exp_transform(&x).unwrap();
        for (a, b) in x.values().iter().zip(y.values()) {
            prop_assert!(*b > 0.0);
            prop_assert_eq!(*b, a.exp());
        }
    }

    #[test]
    fn oracle_decreases_in_q(alpha in 0.2f64..20.0, q in 0.1f64..8.0, dq in 0.05f64..3.0) {
        let a = cascade_theoretical_h(q, alpha).unwrap();
        let b = cascade_theoretical_h(q + dq, alpha).unwrap();
        prop_assert!(b < a, "h({}) = {} not below h({}) = {}", q + dq, b, q, a);
    }

    #[test]
    fn mfdfa_slopes_survive_positive_scaling(seed in any::<u64>(), log_c in -6.0f64..6.0) {
        let x = gen_cascade(10, 1.0, seed).unwrap();
        let c = 10f64.powf(log_c);
        let y = x.map(|v| c * v).unwrap();
        let q = QGrid::new(vec![-3.0, 0.0, 1.0, 2.0, 5.0]).unwrap();
        let p = ScalePlan::default_for(x.len()).unwrap();
        let a = mfdfa(&x, &q, &p).unwrap();
        let b = mfdfa(&y, &q, &p).unwrap();
        for (ha, hb) in a.h.iter().zip(&b.h) {
            prop_assert!((ha.unwrap() - hb.unwrap()).abs() <= 1e-8);
        }
        for r2 in a.r2.iter().flatten() {
            prop_assert!((0.0..=1.0).contains(r2));
        }
    }

    #[test]
    fn constant_series_has_unit_moment_exponents(c in 1e-3f64..1e3, n in 64usize..512) {
        let x = Series::from_values(vec![c; n]).unwrap();
        let q = QGrid::new(vec![-2.0, 0.5, 1.0, 3.0]).unwrap();
        let s = moment_spectrum(&x, &q, &[1, 2, 4, 8, 16]).unwrap();
        for h in &s.h {
            prop_assert!((h.unwrap() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn q_range_grids_are_strictly_increasing(min in -10.0f64..5.0, span in 0.0f64..10.0, step in 0.1f64..2.0) {
        let g = QGrid::range(min, min + span, step).unwrap();
        prop_assert!(g.values().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*g.values().last().unwrap() <= min + span + 1e-9);
    }
}
