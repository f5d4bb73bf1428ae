//! Signal/noise sweeps: for every replicate, noise model and SNR level, mix
//! fresh noise into the replicate's multifractal signal and compare the
//! estimated h_SUM(q) with the signal's own h_MULTI(q).

mod config;
mod emit;
mod sweep;

pub use config::{
    ExperimentConfig, NoiseModel, DEFAULT_DEVIATION_RANGE, DEFAULT_REPLICATES, DEFAULT_SNR_LEVELS,
};
pub use emit::{emit_results, figure_file_name, render_results, RESULTS_FILE, SUMMARY_FILE};
pub use sweep::{
    derive_seed, run_sweep, run_sweep_with_threads, Failure, NoiseFloor, ResultRow, ResultsTable,
    SummaryRow,
};
