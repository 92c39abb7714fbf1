use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagram::fmt_value;
use crate::error::Result;
use crate::harness::config::ExperimentConfig;

/// One repetition of one (alpha, N) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    pub kind: String,
    pub alpha: f64,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub bottleneck: Option<f64>,
    pub supnorm: Option<f64>,
    pub time_s: Option<f64>,
}

/// Grouped means and standard errors for one (kind, alpha, N).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub kind: String,
    pub alpha: f64,
    pub n: usize,
    pub count: usize,
    pub mean_bottleneck: Option<f64>,
    pub se_bottleneck: Option<f64>,
    pub mean_supnorm: Option<f64>,
    pub se_supnorm: Option<f64>,
    pub mean_time_s: Option<f64>,
}

/// Named table written as `<name>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A yes/no outcome computed by a run, with a human-readable detail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub raw: Vec<RawRow>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentReport { config, raw: Vec::new(), tables: Vec::new(), checks: Vec::new() }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Group-by means over the raw rows, in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, u64, usize)> = Vec::new();
        for r in &self.raw {
            let k = (r.kind.clone(), r.alpha.to_bits(), r.n);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(kind, alpha_bits, n)| {
                let rows: Vec<&RawRow> = self
                    .raw
                    .iter()
                    .filter(|r| r.kind == kind && r.alpha.to_bits() == alpha_bits && r.n == n)
                    .collect();
                let col = |f: fn(&RawRow) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(|r| f(r)).collect() };
                let (mb, sb) = mean_se(&col(|r| r.bottleneck));
                let (ms, ss) = mean_se(&col(|r| r.supnorm));
                let (mt, _) = mean_se(&col(|r| r.time_s));
                SummaryRow {
                    kind,
                    alpha: f64::from_bits(alpha_bits),
                    n,
                    count: rows.len(),
                    mean_bottleneck: mb,
                    se_bottleneck: sb,
                    mean_supnorm: ms,
                    se_supnorm: ss,
                    mean_time_s: mt,
                }
            })
            .collect()
    }

    /// Hash of the crate version and the config, echoed in `config.json`.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_NAME"));
        h.update(env!("CARGO_PKG_VERSION"));
        h.update(serde_json::to_vec(&self.config).expect("config serialises"));
        hex::encode(h.finalize())
    }
}

/// Mean and standard error (sample standard deviation over sqrt(count)).
pub fn mean_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

/// Seconds with three significant digits.
pub fn fmt_seconds(s: f64) -> String {
    if s == 0.0 {
        return "0".into();
    }
    let digits = (2 - s.abs().log10().floor() as i32).max(0) as usize;
    format!("{s:.digits$}")
}

pub const RAW_HEADER: [&str; 8] = ["kind", "alpha", "N", "rep", "seed", "bottleneck", "supnorm", "time_s"];
pub const SUMMARY_HEADER: [&str; 9] = [
    "kind",
    "alpha",
    "N",
    "count",
    "mean_bottleneck",
    "se_bottleneck",
    "mean_supnorm",
    "se_supnorm",
    "mean_time_s",
];

/// Writes `raw.csv`, `summary.csv`, `config.json`, `checks.csv`,
/// `plotdata/*.csv` and one CSV per extra table into `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("plotdata"))?;

    let mut w = csv::Writer::from_path(dir.join("raw.csv"))?;
    w.write_record(RAW_HEADER)?;
    for r in &report.raw {
        w.write_record([
            r.kind.clone(),
            fmt_value(r.alpha),
            r.n.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            opt(r.bottleneck),
            opt(r.supnorm),
            r.time_s.map(fmt_value).unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let summary = report.summary();
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(SUMMARY_HEADER)?;
    for s in &summary {
        w.write_record([
            s.kind.clone(),
            fmt_value(s.alpha),
            s.n.to_string(),
            s.count.to_string(),
            opt(s.mean_bottleneck),
            opt(s.se_bottleneck),
            opt(s.mean_supnorm),
            opt(s.se_supnorm),
            s.mean_time_s.map(fmt_seconds).unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    // one series per alpha and metric, x = N
    let mut alphas: Vec<f64> = summary.iter().map(|s| s.alpha).collect();
    alphas.dedup();
    for &a in &alphas {
        let rows: Vec<&SummaryRow> = summary.iter().filter(|s| s.alpha == a).collect();
        for (metric, mean, se) in [
            ("bottleneck", (|s: &SummaryRow| s.mean_bottleneck) as fn(&SummaryRow) -> Option<f64>, (|s: &SummaryRow| s.se_bottleneck) as fn(&SummaryRow) -> Option<f64>),
            ("supnorm", |s| s.mean_supnorm, |s| s.se_supnorm),
            ("time_s", |s| s.mean_time_s, |_| None),
        ] {
            if rows.iter().all(|s| mean(s).is_none()) {
                continue;
            }
            let mut w = csv::Writer::from_path(dir.join("plotdata").join(format!("{metric}_alpha_{}.csv", fmt_value(a))))?;
            w.write_record(["N", "mean", "stderr"])?;
            for s in &rows {
                w.write_record([s.n.to_string(), opt(mean(s)), opt(se(s))])?;
            }
            w.flush()?;
        }
    }

    for t in &report.tables {
        t.write(&dir.join(format!("{}.csv", t.name)))?;
    }

    let mut w = csv::Writer::from_path(dir.join("checks.csv"))?;
    w.write_record(["name", "passed", "detail"])?;
    for c in &report.checks {
        w.write_record([c.name.as_str(), if c.passed { "true" } else { "false" }, c.detail.as_str()])?;
    }
    w.flush()?;

    let echo = serde_json::json!({
        "config": report.config,
        "config_hash": report.config_hash(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&echo)? + "\n")?;
    Ok(())
}
