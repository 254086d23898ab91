//! Per-sample measurements and their summary.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: usize,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` for skipped samples (`0/0`, failed preconditions).
    pub ratio: Option<f64>,
    pub flag: Option<String>,
}

impl SampleRow {
    pub fn measured(index: usize, label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 {
            Some(lhs / rhs)
        } else if lhs == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        };
        Self {
            index,
            label: label.into(),
            lhs,
            rhs,
            ratio,
            flag: if ratio.is_none() { Some("zero_over_zero".into()) } else { None },
        }
    }

    pub fn skipped(index: usize, label: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            index,
            label: label.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: None,
            flag: Some(reason.into()),
        }
    }

    /// Keep the measurement but mark it (it still counts towards the stats).
    pub fn flagged(mut self, reason: impl Into<String>) -> Self {
        self.flag = Some(reason.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub estimate: String,
    pub seed: u64,
    pub ensemble_size: usize,
    pub delta: Option<f64>,
    pub ceiling: f64,
    /// Lower end of a two-sided band, when the estimate is an equivalence.
    pub floor: Option<f64>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub min_ratio: f64,
    pub measured: usize,
    pub skipped: usize,
    pub pass: bool,
    /// Derived quantities (cross-checks, per-order maxima, fitted rates).
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub samples: Vec<SampleRow>,
}

impl VerificationReport {
    pub fn new(
        estimate: &str,
        seed: u64,
        ensemble_size: usize,
        delta: Option<f64>,
        ceiling: f64,
        samples: Vec<SampleRow>,
    ) -> Self {
        let mut r = Self {
            estimate: estimate.into(),
            seed,
            ensemble_size,
            delta,
            ceiling,
            floor: None,
            max_ratio: 0.0,
            median_ratio: 0.0,
            min_ratio: 0.0,
            measured: 0,
            skipped: 0,
            pass: true,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            samples,
        };
        r.summarize();
        r
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self.summarize();
        self
    }

    /// Ratios of measured samples, in sample order.
    pub fn ratios(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.ratio).collect()
    }

    /// Recompute the summary and the pass flag from the rows.
    pub fn summarize(&mut self) {
        let mut r = self.ratios();
        self.measured = r.len();
        self.skipped = self.samples.len() - r.len();
        r.sort_by(f64::total_cmp);
        if r.is_empty() {
            self.max_ratio = 0.0;
            self.min_ratio = 0.0;
            self.median_ratio = 0.0;
        } else {
            self.max_ratio = r[r.len() - 1];
            self.min_ratio = r[0];
            let mid = r.len() / 2;
            self.median_ratio = if r.len() % 2 == 1 { r[mid] } else { 0.5 * (r[mid - 1] + r[mid]) };
        }
        self.pass = self.max_ratio <= self.ceiling
            && self.floor.map_or(true, |f| r.is_empty() || self.min_ratio >= f);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    /// Writes `<estimate>.csv` and `<estimate>.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.estimate));
        let json = dir.join(format!("{}.json", self.estimate));
        self.write_csv(&csv)?;
        self.write_json(&json)?;
        Ok((csv, json))
    }
}
