//! Multi-seed comparison of configurations with paired sign tests.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::config::RunConfig;
use crate::error::{io_err, HarnessError};
use crate::train::{final_window_mean, train};

#[derive(Debug, Clone, PartialEq)]
pub struct PairStat {
    pub a: String,
    pub b: String,
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    /// Mean over seeds of `a - b`.
    pub mean_diff: f64,
    /// One-sided sign-test p-value for "a beats b".
    pub p_a_greater: f64,
    /// One-sided sign-test p-value for "b beats a".
    pub p_b_greater: f64,
    pub p_two_sided: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub labels: Vec<String>,
    pub seeds: Vec<u64>,
    /// `values[seed][label]`: final-window mean return.
    pub values: Vec<Vec<f64>>,
    pub pairs: Vec<PairStat>,
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(k: usize, n: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let b = Binomial::new(0.5, n as u64).expect("valid binomial");
    b.sf(k as u64 - 1)
}

/// Paired sign test on `a[i]` vs `b[i]`; ties are dropped.
pub fn sign_test(label_a: &str, label_b: &str, a: &[f64], b: &[f64]) -> PairStat {
    let mut wins_a = 0;
    let mut wins_b = 0;
    let mut ties = 0;
    let mut diff = 0.0;
    for (x, y) in a.iter().zip(b) {
        diff += x - y;
        if x > y {
            wins_a += 1;
        } else if y > x {
            wins_b += 1;
        } else {
            ties += 1;
        }
    }
    let n = wins_a + wins_b;
    let p_a = binomial_upper_tail(wins_a, n);
    let p_b = binomial_upper_tail(wins_b, n);
    PairStat {
        a: label_a.to_string(),
        b: label_b.to_string(),
        wins_a,
        wins_b,
        ties,
        mean_diff: diff / a.len().max(1) as f64,
        p_a_greater: p_a,
        p_b_greater: p_b,
        p_two_sided: (2.0 * p_a.min(p_b)).min(1.0),
    }
}

/// Builds the report from per-seed values; all labels must cover the same
/// seeds in the same order.
pub fn paired_report(
    labels: Vec<String>,
    seed_lists: &[Vec<u64>],
    per_label: &[Vec<f64>],
) -> Result<CompareReport, HarnessError> {
    if labels.len() < 2 {
        return Err(HarnessError::Config("compare needs at least two configurations".into()));
    }
    let seeds = seed_lists
        .first()
        .cloned()
        .ok_or_else(|| HarnessError::Config("no seed lists".into()))?;
    if seed_lists.len() != labels.len() || seed_lists.iter().any(|s| *s != seeds) {
        return Err(HarnessError::Config("seed lists differ between configurations".into()));
    }
    if per_label.len() != labels.len() || per_label.iter().any(|v| v.len() != seeds.len()) {
        return Err(HarnessError::Config("one value per seed and configuration required".into()));
    }
    let values = (0..seeds.len())
        .map(|s| per_label.iter().map(|v| v[s]).collect())
        .collect();
    let mut pairs = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            pairs.push(sign_test(&labels[i], &labels[j], &per_label[i], &per_label[j]));
        }
    }
    Ok(CompareReport {
        labels,
        seeds,
        values,
        pairs,
    })
}

/// Trains every (configuration, seed) pair and compares final-window mean
/// returns. Configurations must share env and episode budget; seeds from
/// `seeds` override each config's own.
pub fn compare(
    configs: &[(String, RunConfig)],
    seeds: &[u64],
    out: Option<&Path>,
) -> Result<CompareReport, HarnessError> {
    if configs.len() < 2 {
        return Err(HarnessError::Config("compare needs at least two configurations".into()));
    }
    if seeds.is_empty() {
        return Err(HarnessError::Config("compare needs at least one seed".into()));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(HarnessError::Config("duplicate seeds".into()));
    }
    let (_, first) = &configs[0];
    for (label, c) in configs {
        if c.env != first.env || c.episodes != first.episodes {
            return Err(HarnessError::Config(format!(
                "configuration {label} differs in env or episode budget"
            )));
        }
        c.validate()?;
    }
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let results: Vec<Result<f64, HarnessError>> = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let (label, cfg) = &configs[c];
            let mut cfg = cfg.clone();
            cfg.seed = seed;
            let dir = out.map(|o| o.join(label).join(format!("seed{seed}")));
            let outcome = train(&cfg, dir.as_deref())?;
            Ok(final_window_mean(&outcome.rows))
        })
        .collect();
    let mut per_label = vec![Vec::with_capacity(seeds.len()); configs.len()];
    for ((c, _), r) in jobs.iter().zip(results) {
        per_label[*c].push(r?);
    }
    let labels = configs.iter().map(|(l, _)| l.clone()).collect();
    let report = paired_report(labels, &vec![seeds.to_vec(); configs.len()], &per_label)?;
    if let Some(o) = out {
        write_report(&report, o)?;
    }
    Ok(report)
}

impl CompareReport {
    pub fn table_csv(&self) -> String {
        let mut s = format!("seed,{}\n", self.labels.join(","));
        for (seed, row) in self.seeds.iter().zip(&self.values) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            let _ = writeln!(s, "{seed},{}", cells.join(","));
        }
        let n = self.values.len() as f64;
        let means: Vec<String> = (0..self.labels.len())
            .map(|j| (self.values.iter().map(|r| r[j]).sum::<f64>() / n).to_string())
            .collect();
        let _ = writeln!(s, "mean,{}", means.join(","));
        s
    }

    pub fn pairs_csv(&self) -> String {
        let mut s =
            String::from("a,b,wins_a,wins_b,ties,mean_diff,p_a_greater,p_b_greater,p_two_sided\n");
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                p.a, p.b, p.wins_a, p.wins_b, p.ties, p.mean_diff, p.p_a_greater, p.p_b_greater,
                p.p_two_sided
            );
        }
        s
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairStat> {
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }

    pub fn mean(&self, label: &str) -> Option<f64> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.values.iter().map(|r| r[j]).sum::<f64>() / self.values.len() as f64)
    }
}

/// Writes `compare.csv` (per-seed rows and a mean row) and
/// `compare_pairs.csv`.
pub fn write_report(report: &CompareReport, out: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let p = out.join("compare.csv");
    fs::write(&p, report.table_csv()).map_err(|e| io_err(&p, e))?;
    let p = out.join("compare_pairs.csv");
    fs::write(&p, report.pairs_csv()).map_err(|e| io_err(&p, e))?;
    Ok(())
}

/// Parses `0..9` (inclusive) or `1,4,7`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Config(format!("bad seed list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}
