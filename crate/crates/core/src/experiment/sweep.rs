use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::analysis::{mfdfa, moment_spectrum, spectrum_deviation, HurstSpectrum, Method};
use crate::error::{Error, Result};
use crate::mixer::{mix, MixSpec};
use crate::series::{ModelDescriptor, Series};
use crate::stats::{mean, sample_std};
use crate::traffic::generate;

/// Stream id reserved for the second, independent signal behind the noise floor.
const FLOOR_STREAM: u64 = 0xFFFF;

/// One (noise, snr, q) row of aggregated estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub noise_label: String,
    pub snr: f64,
    pub q: f64,
    pub h_sum_mean: f64,
    pub h_sum_std: f64,
    pub h_multi_mean: f64,
    /// Share of replicates in which h_SUM(q) was defined.
    pub defined_fraction: f64,
}

/// Deviation of h_SUM from h_MULTI for one (noise, snr) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub noise_label: String,
    pub snr: f64,
    pub deviation_mean: f64,
    pub deviation_std: f64,
    pub replicates_ok: usize,
    pub replicates_failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Empty for failures of the signal itself.
    pub noise_label: String,
    pub snr: Option<f64>,
    pub replicate: usize,
    pub message: String,
}

/// Deviation between h_MULTI of two independent signal realizations; the
/// smallest deviation a sweep cell can be expected to resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloor {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub q: Vec<f64>,
    pub snr_levels: Vec<f64>,
    pub noise_labels: Vec<String>,
    pub replicates: usize,
    /// Ordered by noise model, then SNR, then q.
    pub rows: Vec<ResultRow>,
    /// Ordered by noise model, then SNR.
    pub summary: Vec<SummaryRow>,
    pub h_multi_mean: Vec<f64>,
    pub noise_floor: NoiseFloor,
    pub failures: Vec<Failure>,
}

impl ResultsTable {
    pub fn summary_for(&self, noise_label: &str, snr: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.noise_label == noise_label && r.snr == snr)
    }
}

/// Seed of noise stream `(stream, level)` in replicate `replicate`: the base
/// seed xor a fixed, well-mixed offset of the cell key.
pub fn derive_seed(base_seed: u64, stream: u64, level: u64, replicate: u64) -> u64 {
    let key = (stream << 48) ^ (level << 32) ^ replicate;
    base_seed ^ splitmix64(key ^ 0x6E6F_6973_655F_6B65)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Cell {
    spectrum: Option<HurstSpectrum>,
    deviation: std::result::Result<f64, String>,
}

struct Replicate {
    h_multi: Option<HurstSpectrum>,
    floor: Option<f64>,
    /// Indexed `noise * snr_levels.len() + snr`.
    cells: Vec<Cell>,
    signal_error: Option<String>,
}

/// Runs the sweep on the current rayon pool.
///
/// Cells are computed independently and collected in index order, so the
/// table does not depend on scheduling or thread count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let replicates: Vec<Replicate> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, r))
        .collect();
    Ok(aggregate(cfg, &replicates))
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ResultsTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    pool.install(|| run_sweep(cfg))
}

fn estimate(cfg: &ExperimentConfig, x: &Series) -> Result<HurstSpectrum> {
    match cfg.method {
        Method::Mfdfa => mfdfa(x, &cfg.q, &cfg.plan),
        Method::Moments => moment_spectrum(x, &cfg.q, cfg.plan.scales()),
        Method::CascadeOracle => Err(Error::param("method", "the oracle is not an estimator")),
    }
}

fn signal_spectrum(cfg: &ExperimentConfig, seed: u64) -> Result<(Series, HurstSpectrum)> {
    let signal = generate(&ModelDescriptor::new(cfg.signal, cfg.n, seed)?)?;
    let spectrum = estimate(cfg, &signal)?;
    Ok((signal, spectrum))
}

fn run_replicate(cfg: &ExperimentConfig, r: usize) -> Replicate {
    let n_cells = cfg.noise.len() * cfg.snr_levels.len();
    let (signal, h_multi) = match signal_spectrum(cfg, cfg.base_seed.wrapping_add(r as u64)) {
        Ok(v) => v,
        Err(e) => {
            return Replicate {
                h_multi: None,
                floor: None,
                cells: (0..n_cells)
                    .map(|_| Cell {
                        spectrum: None,
                        deviation: Err(format!("signal failed: {e}")),
                    })
                    .collect(),
                signal_error: Some(e.to_string()),
            }
        }
    };
    let (lo, hi) = cfg.deviation_range;
    let floor = signal_spectrum(cfg, derive_seed(cfg.base_seed, FLOOR_STREAM, 0, r as u64))
        .and_then(|(_, other)| spectrum_deviation(&h_multi, &other, lo, hi))
        .ok();

    let cells = (0..n_cells)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cfg.snr_levels.len(), idx % cfg.snr_levels.len());
            let seed = derive_seed(cfg.base_seed, i as u64 + 1, j as u64, r as u64);
            let result = (|| {
                let noise = generate(&ModelDescriptor::new(cfg.noise[i].spec, cfg.n, seed)?)?;
                let mixed = mix(&signal, &noise, MixSpec::new(cfg.snr_levels[j])?)?;
                estimate(cfg, &mixed.sum)
            })();
            match result {
                Ok(spectrum) => {
                    let deviation =
                        spectrum_deviation(&spectrum, &h_multi, lo, hi).map_err(|e| e.to_string());
                    Cell {
                        spectrum: Some(spectrum),
                        deviation,
                    }
                }
                Err(e) => Cell {
                    spectrum: None,
                    deviation: Err(e.to_string()),
                },
            }
        })
        .collect();

    Replicate {
        h_multi: Some(h_multi),
        floor,
        cells,
        signal_error: None,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], f64::NAN),
        _ => (mean(values), sample_std(values)),
    }
}

fn aggregate(cfg: &ExperimentConfig, reps: &[Replicate]) -> ResultsTable {
    let nq = cfg.q.len();
    let n_snr = cfg.snr_levels.len();

    let h_multi_mean: Vec<f64> = (0..nq)
        .map(|k| {
            let vals: Vec<f64> = reps
                .iter()
                .filter_map(|rep| rep.h_multi.as_ref().and_then(|s| s.h[k]))
                .collect();
            mean_std(&vals).0
        })
        .collect();

    let floors: Vec<f64> = reps.iter().filter_map(|rep| rep.floor).collect();
    let (floor_mean, floor_std) = mean_std(&floors);

    let mut failures = Vec::new();
    for (r, rep) in reps.iter().enumerate() {
        if let Some(msg) = &rep.signal_error {
            failures.push(Failure {
                noise_label: String::new(),
                snr: None,
                replicate: r,
                message: msg.clone(),
            });
        }
    }

    let mut rows = Vec::with_capacity(cfg.noise.len() * n_snr * nq);
    let mut summary = Vec::with_capacity(cfg.noise.len() * n_snr);
    for (i, noise) in cfg.noise.iter().enumerate() {
        for (j, &snr) in cfg.snr_levels.iter().enumerate() {
            let idx = i * n_snr + j;
            let mut deviations = Vec::new();
            let mut failed = 0;
            for (r, rep) in reps.iter().enumerate() {
                match &rep.cells[idx].deviation {
                    Ok(d) => deviations.push(*d),
                    Err(msg) => {
                        failed += 1;
                        if rep.signal_error.is_none() {
                            failures.push(Failure {
                                noise_label: noise.label.clone(),
                                snr: Some(snr),
                                replicate: r,
                                message: msg.clone(),
                            });
                        }
                    }
                }
            }
            let (deviation_mean, deviation_std) = mean_std(&deviations);
            summary.push(SummaryRow {
                noise_label: noise.label.clone(),
                snr,
                deviation_mean,
                deviation_std,
                replicates_ok: deviations.len(),
                replicates_failed: failed,
            });

            for (k, &q) in cfg.q.values().iter().enumerate() {
                let vals: Vec<f64> = reps
                    .iter()
                    .filter_map(|rep| rep.cells[idx].spectrum.as_ref().and_then(|s| s.h[k]))
                    .collect();
                let (h_sum_mean, h_sum_std) = mean_std(&vals);
                rows.push(ResultRow {
                    noise_label: noise.label.clone(),
                    snr,
                    q,
                    h_sum_mean,
                    h_sum_std,
                    h_multi_mean: h_multi_mean[k],
                    defined_fraction: vals.len() as f64 / cfg.replicates as f64,
                });
            }
        }
    }

    ResultsTable {
        q: cfg.q.values().to_vec(),
        snr_levels: cfg.snr_levels.clone(),
        noise_labels: cfg.noise.iter().map(|n| n.label.clone()).collect(),
        replicates: cfg.replicates,
        rows,
        summary,
        h_multi_mean,
        noise_floor: NoiseFloor {
            mean: floor_mean,
            std: floor_std,
            count: floors.len(),
        },
        failures,
    }
}
