//! Aggregated experiment results: per-trial metric series with mean and
//! spread, and a serializable report shaped like the result tables
//! (scorer rows × metric columns).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and spread of one metric across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub mean: f64,
    /// Population standard deviation over trials; present exactly when
    /// there was more than one trial.
    pub std: Option<f64>,
    pub per_trial: Vec<f64>,
}

impl Metric {
    /// Aggregate one value per trial. A deterministic quantity repeated
    /// across trials yields `std == Some(0.0)`, rendered as `(0)`.
    pub fn from_trials(values: &[f64]) -> Result<Metric> {
        if values.is_empty() {
            return Err(Error::precondition("a metric needs at least one trial"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("trial metrics must be finite"));
        }
        let n = values.len() as f64;
        // A constant series (deterministic quantity) gets mean and spread
        // computed exactly, so rounding in the running sum can never turn
        // a true zero spread into 1e-16.
        let constant = values.windows(2).all(|w| w[0] == w[1]);
        let mean = if constant {
            values[0]
        } else {
            values.iter().sum::<f64>() / n
        };
        let std = if values.len() == 1 {
            None
        } else if constant {
            Some(0.0)
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            Some(var.sqrt())
        };
        Ok(Metric {
            mean,
            std,
            per_trial: values.to_vec(),
        })
    }
}

impl std::fmt::Display for Metric {
    /// `0.7315`, `0.7174(0.0077)`, or `0.6730(0)` for an exactly-zero
    /// spread.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4}", self.mean)?;
        match self.std {
            None => Ok(()),
            Some(0.0) => write!(f, "(0)"),
            Some(s) => write!(f, "({s:.4})"),
        }
    }
}

/// One table row: a scorer and its metric per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scorer: String,
    pub cells: Vec<(String, Metric)>,
}

impl ReportRow {
    pub fn cell(&self, column: &str) -> Option<&Metric> {
        self.cells
            .iter()
            .find(|(name, _)| name == column)
            .map(|(_, m)| m)
    }
}

/// A full experiment result: enough descriptor to reproduce the run,
/// plus the result rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Which protocol produced this (e.g. `new_links`, `attributes`).
    pub experiment: String,
    pub train: String,
    pub validate: String,
    pub test: String,
    pub scope: String,
    pub trials: usize,
    pub seed: u64,
    /// Free-form provenance lines (negative sampling mode, chosen
    /// hyperparameters, …).
    pub notes: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl MetricsReport {
    /// Deterministic pretty JSON, newline-terminated. Identical reports
    /// serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<MetricsReport> {
        serde_json::from_str(text).map_err(|e| Error::parse("report", None, e.to_string()))
    }

    /// Result-table CSV: one row per scorer, one column per metric, cells
    /// formatted as `mean(std)`. Columns are the union over rows in
    /// first-appearance order; a row missing a column leaves the cell
    /// empty.
    pub fn to_table_csv(&self) -> String {
        let mut columns: Vec<&str> = Vec::new();
        for row in &self.rows {
            for (name, _) in &row.cells {
                if !columns.contains(&name.as_str()) {
                    columns.push(name);
                }
            }
        }
        let mut out = String::from("scorer");
        for c in &columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.scorer);
            for c in &columns {
                out.push(',');
                if let Some(metric) = row.cell(c) {
                    out.push_str(&metric.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}
