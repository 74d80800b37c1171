//! Per-episode metrics rows and their CSV form.
//!
//! ```text
//! # config_hash=<sha256 hex>
//! episode,steps,total_steps,ret_raw_<c>..,ret_norm_<c>..,total_return,m_<c>..,critic_loss,actor_grad_norm,updates
//! ```
//!
//! Floats are written in shortest round-trip form so identical runs produce
//! identical bytes. Wall-clock time goes to a separate `timing.csv`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{io_err, HarnessError};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub episode: usize,
    pub steps: usize,
    pub total_steps: u64,
    pub ret_raw: Vec<f64>,
    pub ret_norm: Vec<f64>,
    pub total_return: f64,
    /// Priority weight per reward component (all ones for single-head DDPG).
    pub m: Vec<f64>,
    /// Means over this episode's updates; zero when there were none.
    pub critic_loss: f64,
    pub actor_grad_norm: f64,
    pub updates: u64,
}

pub fn header(components: &[String]) -> String {
    let mut cols: Vec<String> = vec!["episode".into(), "steps".into(), "total_steps".into()];
    cols.extend(components.iter().map(|c| format!("ret_raw_{c}")));
    cols.extend(components.iter().map(|c| format!("ret_norm_{c}")));
    cols.push("total_return".into());
    cols.extend(components.iter().map(|c| format!("m_{c}")));
    cols.extend(["critic_loss", "actor_grad_norm", "updates"].map(String::from));
    cols.join(",")
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        let mut f: Vec<String> = vec![
            self.episode.to_string(),
            self.steps.to_string(),
            self.total_steps.to_string(),
        ];
        f.extend(self.ret_raw.iter().map(f64::to_string));
        f.extend(self.ret_norm.iter().map(f64::to_string));
        f.push(self.total_return.to_string());
        f.extend(self.m.iter().map(f64::to_string));
        f.push(self.critic_loss.to_string());
        f.push(self.actor_grad_norm.to_string());
        f.push(self.updates.to_string());
        f.join(",")
    }
}

pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path, config_hash: &str, components: &[String]) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# config_hash={config_hash}")
            .and_then(|_| writeln!(out, "{}", header(components)))
            .map_err(|e| io_err(path, e))?;
        Ok(Self { out })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<(), HarnessError> {
        writeln!(self.out, "{}", row.to_csv())
            .and_then(|_| self.out.flush())
            .map_err(|e| HarnessError::Io(format!("metrics: {e}")))
    }
}

/// Parsed metrics file. Rows with the wrong field count or unparsable
/// numbers are skipped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub config_hash: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl MetricsTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn read_metrics(path: &Path) -> Result<MetricsTable, HarnessError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut config_hash = None;
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(h) = c.trim().strip_prefix("config_hash=") {
                config_hash = Some(h.to_string());
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(cols) => {
                let parsed: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse()).collect();
                match parsed {
                    Ok(v) if v.len() == cols.len() => rows.push(v),
                    _ => {
                        log::warn!("{}: skipping malformed row at line {}", path.display(), n + 1);
                        skipped += 1;
                    }
                }
            }
        }
    }
    let columns = columns
        .ok_or_else(|| HarnessError::Metrics(format!("{}: no header row", path.display())))?;
    if columns.first().map(String::as_str) != Some("episode") {
        return Err(HarnessError::Metrics(format!(
            "{}: header does not start with 'episode'",
            path.display()
        )));
    }
    Ok(MetricsTable {
        config_hash,
        columns,
        rows,
        skipped,
    })
}
