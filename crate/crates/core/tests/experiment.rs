use std::fs;

use mfmix_core::analysis::{QGrid, ScalePlan};
use mfmix_core::experiment::{
    emit_results, render_results, run_sweep, ExperimentConfig, NoiseModel, RESULTS_FILE,
    SUMMARY_FILE,
};
use mfmix_core::{Dist, Error, ModelSpec};

fn small(n_noise: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_sweep();
    cfg.signal = ModelSpec::Cascade {
        depth: 11,
        alpha: 1.0,
    };
    cfg.n = 1 << 11;
    cfg.plan = ScalePlan::default_for(cfg.n).unwrap();
    cfg.noise.truncate(n_noise);
    cfg.replicates = 4;
    cfg
}

#[test]
fn emits_two_tables_plus_one_figure_per_noise_model() {
    let cfg = small(2);
    let table = run_sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 2 * 5 * cfg.q.len());
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_results(&table, dir.path()).unwrap();
    assert_eq!(paths.len(), 4);
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names[0], RESULTS_FILE);
    assert_eq!(names[1], SUMMARY_FILE);
    for fig in &paths[2..] {
        let text = fs::read_to_string(fig).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 2 + cfg.snr_levels.len());
        assert_eq!(lines.count(), cfg.q.len());
    }
    let first: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
    emit_results(&table, dir.path()).unwrap();
    let second: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn sweeps_are_deterministic() {
    let cfg = small(2);
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(render_results(&a).unwrap(), render_results(&b).unwrap());
}

#[test]
fn deviations_are_nonnegative_and_counted() {
    let cfg = small(4);
    let t = run_sweep(&cfg).unwrap();
    assert!(t.failures.is_empty(), "{:?}", t.failures);
    for s in &t.summary {
        assert!(s.deviation_mean >= 0.0);
        assert_eq!(s.replicates_ok + s.replicates_failed, cfg.replicates);
    }
    for r in &t.rows {
        assert_eq!(r.defined_fraction, 1.0);
    }
    assert_eq!(t.noise_floor.count, cfg.replicates);
}

#[test]
fn every_default_noise_model_converges() {
    let cfg = ExperimentConfig::default_sweep();
    let t = run_sweep(&cfg).unwrap();
    for label in &t.noise_labels {
        let lo = t.summary_for(label, 1.0).unwrap().deviation_mean;
        let hi = t.summary_for(label, 10.0).unwrap().deviation_mean;
        assert!(hi < lo, "{label}: SNR 10 gives {hi}, SNR 1 gives {lo}");
    }
}

#[test]
fn averaging_more_replicates_tightens_the_mean() {
    // spread of deviation_mean across independent sweeps, 10 vs 40 replicates
    let mut base = small(0);
    base.n = 1 << 12;
    base.signal = ModelSpec::Cascade {
        depth: 12,
        alpha: 1.0,
    };
    base.plan = ScalePlan::default_for(base.n).unwrap();
    base.noise = vec![NoiseModel {
        label: "white".into(),
        spec: ModelSpec::ExpFgn { hurst: 0.5 },
    }];
    base.snr_levels = vec![2.0];
    let spread = |replicates: usize, trial: u64| {
        let means: Vec<f64> = (0..8u64)
            .map(|k| {
                let mut cfg = base.clone();
                cfg.replicates = replicates;
                cfg.base_seed = 1_000_000 * (trial + 1) + 1000 * k + replicates as u64;
                run_sweep(&cfg).unwrap().summary[0].deviation_mean
            })
            .collect();
        let m = means.iter().sum::<f64>() / means.len() as f64;
        (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt()
    };
    let wins = (0..3).filter(|&t| spread(40, t) < spread(10, t)).count();
    assert!(wins >= 2, "only {wins} of 3 trials tightened");
}

#[test]
fn config_round_trips_and_reports_field_paths() {
    let cfg = small(4);
    let text = cfg.to_toml_string();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);

    let bad = "replicates = 0\n";
    match ExperimentConfig::from_toml_str(bad) {
        Err(Error::Config { path, .. }) => assert_eq!(path, "replicates"),
        other => panic!("{other:?}"),
    }
    let bad = "[[noise]]\nlabel = \"u\"\nmodel = \"iid\"\ndist = \"uniform\"\nlow = 1\nhigh = 0\n";
    match ExperimentConfig::from_toml_str(bad) {
        Err(Error::Config { path, .. }) => assert!(path.starts_with("noise[0]"), "{path}"),
        other => panic!("{other:?}"),
    }
    assert!(ExperimentConfig::from_toml_str("colour = 3\n").is_err());
}

#[test]
fn default_suite_has_the_four_families() {
    let cfg = ExperimentConfig::default_sweep();
    assert_eq!(cfg.n, 1 << 14);
    assert_eq!(cfg.replicates, 20);
    assert_eq!(cfg.snr_levels, vec![1.0, 2.0, 4.0, 5.0, 10.0]);
    assert_eq!(cfg.q, QGrid::positive_default());
    let specs: Vec<ModelSpec> = cfg.noise.iter().map(|n| n.spec).collect();
    assert_eq!(
        specs,
        vec![
            ModelSpec::ExpFgn { hurst: 0.5 },
            ModelSpec::ExpFgn { hurst: 0.8 },
            ModelSpec::Ar1 {
                phi: 0.7,
                sigma: 1.0
            },
            ModelSpec::Iid {
                dist: Dist::Uniform {
                    low: 0.0,
                    high: 1.0
                }
            },
        ]
    );
}
