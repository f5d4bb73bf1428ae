//! Plain-text trace and spectrum files.
//!
//! Both formats are CSV preceded by `# key=value` comment lines. A trace has
//! the single column `value`, printed with 17 significant digits so values
//! round-trip exactly; its comments carry the full [`Provenance`]. A
//! spectrum has the columns `q,h,intercept,r2,defined`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{HurstSpectrum, Method, QGrid};
use crate::error::{Error, Result};
use crate::series::{Provenance, Series};

pub const TRACE_HEADER: &str = "value";
pub const SPECTRUM_HEADER: &str = "q,h,intercept,r2,defined";

pub fn format_trace(series: &Series) -> String {
    let mut out = String::with_capacity(series.len() * 24 + 256);
    for (k, v) in series.provenance().to_params() {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for v in series.values() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

pub fn write_trace(series: &Series, path: &Path) -> Result<()> {
    write_atomic(path, format_trace(series).as_bytes())
}

pub fn read_trace(path: &Path) -> Result<Series> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, path)
}

/// Parses trace text; `origin` is only used in error messages.
pub fn parse_trace(text: &str, origin: &Path) -> Result<Series> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut meta = BTreeMap::new();
    let mut values = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if let Some(comment) = line.strip_prefix('#') {
                let (k, v) = split_key_value(comment).ok_or_else(|| {
                    parse_err(line_no, format!("expected `# key=value`, got `{line}`"))
                })?;
                if meta.insert(k.clone(), v).is_some() {
                    return Err(parse_err(line_no, format!("duplicate metadata key `{k}`")));
                }
            } else if line == TRACE_HEADER {
                seen_header = true;
            } else {
                return Err(parse_err(
                    line_no,
                    format!("expected header `{TRACE_HEADER}`, got `{line}`"),
                ));
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(line_no, format!("not a number: `{line}`")))?;
        if !v.is_finite() {
            return Err(parse_err(line_no, format!("non-finite value `{line}`")));
        }
        values.push(v);
    }
    if !seen_header {
        return Err(parse_err(
            text.lines().count().max(1),
            format!("missing header `{TRACE_HEADER}`"),
        ));
    }
    let provenance =
        Provenance::from_params(&meta).map_err(|e| parse_err(1, format!("bad metadata: {e}")))?;
    if let Provenance::Generated(d) = &provenance {
        if d.n != values.len() {
            return Err(parse_err(
                text.lines().count(),
                format!(
                    "metadata says n={} but the file holds {} values",
                    d.n,
                    values.len()
                ),
            ));
        }
    }
    Series::new(values, provenance)
}

/// Spectrum CSV. `input` describes the analysed trace; `extra` adds further
/// `# key=value` lines after the standard ones.
pub fn format_spectrum(
    spec: &HurstSpectrum,
    input: &Provenance,
    extra: &[(String, String)],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# method={}\n", spec.method));
    if !spec.scales.is_empty() {
        let scales: Vec<String> = spec.scales.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("# scales={}\n", scales.join(";")));
    }
    if let Some(order) = spec.detrend_order {
        out.push_str(&format!("# detrend_order={order}\n"));
    }
    for (k, v) in input.to_params() {
        out.push_str(&format!("# input.{k}={v}\n"));
    }
    for (k, v) in extra {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for i in 0..spec.q.len() {
        let q = spec.q.values()[i];
        match (spec.h[i], spec.intercept[i], spec.r2[i]) {
            (Some(h), Some(c), Some(r2)) => out.push_str(&format!("{q},{h},{c},{r2},1\n")),
            _ => out.push_str(&format!("{q},NaN,NaN,NaN,0\n")),
        }
    }
    out
}

pub fn write_spectrum(
    spec: &HurstSpectrum,
    input: &Provenance,
    extra: &[(String, String)],
    path: &Path,
) -> Result<()> {
    write_atomic(path, format_spectrum(spec, input, extra).as_bytes())
}

/// Parses a spectrum file, returning the spectrum and all comment metadata.
pub fn parse_spectrum(
    text: &str,
    origin: &Path,
) -> Result<(HurstSpectrum, BTreeMap<String, String>)> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut meta = BTreeMap::new();
    let mut seen_header = false;
    let (mut q, mut h, mut intercept, mut r2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if let Some(comment) = line.strip_prefix('#') {
                let (k, v) = split_key_value(comment).ok_or_else(|| {
                    parse_err(line_no, format!("expected `# key=value`, got `{line}`"))
                })?;
                meta.insert(k, v);
            } else if line == SPECTRUM_HEADER {
                seen_header = true;
            } else {
                return Err(parse_err(
                    line_no,
                    format!("expected header `{SPECTRUM_HEADER}`"),
                ));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(
                line_no,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("not a number: `{s}`")))
        };
        q.push(num(fields[0])?);
        match fields[4].trim() {
            "1" => {
                h.push(Some(num(fields[1])?));
                intercept.push(Some(num(fields[2])?));
                r2.push(Some(num(fields[3])?));
            }
            "0" => {
                h.push(None);
                intercept.push(None);
                r2.push(None);
            }
            other => {
                return Err(parse_err(
                    line_no,
                    format!("`defined` must be 0 or 1, got `{other}`"),
                ))
            }
        }
    }
    if !seen_header {
        return Err(parse_err(1, format!("missing header `{SPECTRUM_HEADER}`")));
    }
    let method: Method = meta
        .get("method")
        .ok_or_else(|| parse_err(1, "missing `method` metadata".into()))?
        .parse()
        .map_err(|e: Error| parse_err(1, e.to_string()))?;
    let scales = match meta.get("scales") {
        Some(s) => s
            .split(';')
            .map(|v| v.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(1, format!("bad scales `{s}`")))?,
        None => Vec::new(),
    };
    let detrend_order = match meta.get("detrend_order") {
        Some(s) => Some(
            s.parse()
                .map_err(|_| parse_err(1, format!("bad detrend_order `{s}`")))?,
        ),
        None => None,
    };
    let q = QGrid::new(q).map_err(|e| parse_err(1, e.to_string()))?;
    Ok((
        HurstSpectrum {
            method,
            q,
            h,
            intercept,
            r2,
            scales,
            detrend_order,
            warnings: Vec::new(),
        },
        meta,
    ))
}

pub fn read_spectrum(path: &Path) -> Result<(HurstSpectrum, BTreeMap<String, String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum(&text, path)
}

/// Writes via a temporary sibling file and a rename, so a failed write never
/// leaves a partial file at `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

fn split_key_value(comment: &str) -> Option<(String, String)> {
    let (k, v) = comment.trim().split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}
