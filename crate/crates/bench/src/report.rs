//! Result tables: one row per measured quantity, written as CSV with a fixed
//! header and 17 significant digits so that files round-trip exactly.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use crate::{BenchError, Result};

pub const HEADER: &str = "experiment_id,method,parameter,nnz_fraction,metric,value,trial,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment_id: String,
    pub method: String,
    pub parameter: f64,
    pub nnz_fraction: f64,
    pub metric: String,
    pub value: f64,
    pub trial: usize,
    pub seed: u64,
}

impl Row {
    fn key_cmp(&self, other: &Row) -> Ordering {
        self.experiment_id
            .cmp(&other.experiment_id)
            .then_with(|| self.method.cmp(&other.method))
            .then_with(|| self.parameter.total_cmp(&other.parameter))
            .then_with(|| self.trial.cmp(&other.trial))
            .then_with(|| self.metric.cmp(&other.metric))
    }

    fn check(&self) -> Result<()> {
        let bad = |why: &str| Err(BenchError::Report(format!("{why} in {self:?}")));
        for s in [&self.experiment_id, &self.method, &self.metric] {
            if s.is_empty() || s.contains([',', '\n', '"']) {
                return bad("empty or unquotable label");
            }
        }
        if !self.parameter.is_finite() || !self.value.is_finite() {
            return bad("non-finite number");
        }
        if !(self.nnz_fraction > 0.0 && self.nnz_fraction <= 1.0) {
            return bad("nnz fraction outside (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    rows: Vec<Row>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: Row) -> Result<()> {
        row.check()?;
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    /// Rows in canonical order.
    pub fn rows(&self) -> Vec<&Row> {
        let mut r: Vec<&Row> = self.rows.iter().collect();
        r.sort_by(|a, b| a.key_cmp(b));
        r
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one method and metric.
    pub fn select<'a>(&'a self, method: &'a str, metric: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.method == method && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in self.rows() {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{:.16e},{},{}",
                r.experiment_id, r.method, r.parameter, r.nnz_fraction, r.metric, r.value, r.trial, r.seed
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Report> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(BenchError::Report("missing header".into()));
        }
        let mut report = Report::new();
        for (ln, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || BenchError::Report(format!("line {}: {line:?}", ln + 2));
            if f.len() != 8 {
                return Err(bad());
            }
            report.push(Row {
                experiment_id: f[0].to_string(),
                method: f[1].to_string(),
                parameter: f[2].parse().map_err(|_| bad())?,
                nnz_fraction: f[3].parse().map_err(|_| bad())?,
                metric: f[4].to_string(),
                value: f[5].parse().map_err(|_| bad())?,
                trial: f[6].parse().map_err(|_| bad())?,
                seed: f[7].parse().map_err(|_| bad())?,
            })?;
        }
        Ok(report)
    }
}
