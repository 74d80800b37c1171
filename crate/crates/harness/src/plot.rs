//! Smoothed learning curves from a metrics file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, HarnessError};
use crate::metrics::read_metrics;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotReport {
    pub files: Vec<PathBuf>,
    pub skipped_rows: usize,
}

/// Trailing moving average: element `i` is the mean of the last `window`
/// values up to and including `i` (fewer at the start). Computed as an
/// offset from the window's first value so constant runs come back exactly.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            let base = values[lo];
            let n = (i - lo + 1) as f64;
            base + values[lo..=i].iter().map(|v| v - base).sum::<f64>() / n
        })
        .collect()
}

/// Writes `curve_<component>.dat` for each raw component return,
/// `curve_total.dat` and `curve_m_<component>.dat` for each weight.
pub fn emit_plotdata(metrics: &Path, out: &Path, window: usize) -> Result<PlotReport, HarnessError> {
    if window == 0 {
        return Err(HarnessError::Config("window must be at least 1".into()));
    }
    let table = read_metrics(metrics)?;
    let ep_col = table.column("episode").expect("checked by reader");
    let mut curves: Vec<(String, usize)> = Vec::new();
    for (i, c) in table.columns.iter().enumerate() {
        if let Some(name) = c.strip_prefix("ret_raw_") {
            curves.push((format!("curve_{name}.dat"), i));
        }
    }
    if let Some(i) = table.column("total_return") {
        curves.push(("curve_total.dat".into(), i));
    }
    for (i, c) in table.columns.iter().enumerate() {
        if let Some(name) = c.strip_prefix("m_") {
            curves.push((format!("curve_m_{name}.dat"), i));
        }
    }
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let episodes: Vec<f64> = table.rows.iter().map(|r| r[ep_col]).collect();
    let mut files = Vec::new();
    for (name, col) in curves {
        let raw: Vec<f64> = table.rows.iter().map(|r| r[col]).collect();
        let smooth = moving_average(&raw, window);
        let mut text = String::new();
        for (e, v) in episodes.iter().zip(&smooth) {
            let _ = writeln!(text, "{e} {v}");
        }
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    if table.skipped > 0 {
        log::warn!("{}: skipped {} malformed rows", metrics.display(), table.skipped);
    }
    Ok(PlotReport {
        files,
        skipped_rows: table.skipped,
    })
}
