use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::ResultsTable;
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Renders every output file as `(file name, contents)`, in a fixed order.
pub fn render_results(t: &ResultsTable) -> Result<Vec<(String, String)>> {
    if t.rows.is_empty() {
        return Err(Error::Degenerate("results table is empty".into()));
    }
    let mut files = vec![
        (RESULTS_FILE.to_string(), render_rows(t)),
        (SUMMARY_FILE.to_string(), render_summary(t)),
    ];
    for (i, label) in t.noise_labels.iter().enumerate() {
        files.push((figure_file_name(i, label), render_figure(t, label)));
    }
    Ok(files)
}

/// Writes `results.csv`, `summary.csv` and one `fig<k>_<label>.csv` per noise
/// model into `out_dir`, creating it if needed. Returns the written paths.
pub fn emit_results(t: &ResultsTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render_results(t)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// `fig<k>_<label>.csv` with k counted from 1 and the label reduced to
/// filename-safe characters.
pub fn figure_file_name(index: usize, label: &str) -> String {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("fig{}_{}.csv", index + 1, safe)
}

fn render_rows(t: &ResultsTable) -> String {
    let mut out =
        String::from("noise_label,snr,q,h_sum_mean,h_sum_std,h_multi_mean,defined_fraction\n");
    for r in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.noise_label,
            r.snr,
            r.q,
            r.h_sum_mean,
            r.h_sum_std,
            r.h_multi_mean,
            r.defined_fraction
        );
    }
    out
}

fn render_summary(t: &ResultsTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# replicates={}", t.replicates);
    let _ = writeln!(out, "# noise_floor_mean={}", t.noise_floor.mean);
    let _ = writeln!(out, "# noise_floor_std={}", t.noise_floor.std);
    let _ = writeln!(out, "# noise_floor_count={}", t.noise_floor.count);
    for f in &t.failures {
        let snr = f.snr.map(|s| s.to_string()).unwrap_or_default();
        let noise = if f.noise_label.is_empty() {
            "<signal>"
        } else {
            &f.noise_label
        };
        let message = f.message.replace('\n', " ");
        let _ = writeln!(
            out,
            "# failure noise={noise} snr={snr} replicate={}: {message}",
            f.replicate
        );
    }
    out.push_str("noise_label,snr,deviation_mean,deviation_std,replicates_ok,replicates_failed\n");
    for s in &t.summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.noise_label,
            s.snr,
            s.deviation_mean,
            s.deviation_std,
            s.replicates_ok,
            s.replicates_failed
        );
    }
    out
}

fn render_figure(t: &ResultsTable, label: &str) -> String {
    let mut out = String::from("q,h_multi");
    for snr in &t.snr_levels {
        let _ = write!(out, ",h_sum_snr_{snr}");
    }
    out.push('\n');
    for (k, q) in t.q.iter().enumerate() {
        let _ = write!(out, "{q},{}", t.h_multi_mean[k]);
        for snr in &t.snr_levels {
            let row = t
                .rows
                .iter()
                .find(|r| r.noise_label == label && r.snr == *snr && r.q == *q)
                .expect("one row per (noise, snr, q)");
            let _ = write!(out, ",{}", row.h_sum_mean);
        }
        out.push('\n');
    }
    out
}
