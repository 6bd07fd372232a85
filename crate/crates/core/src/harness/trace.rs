//! Per-iteration experiment records and their CSV serialization.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::harness::config::{Strategy, Task};

/// One iteration of an experiment loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub iteration: usize,
    pub query: Vec<f64>,
    pub outcome: Vec<f64>,
    pub score: f64,
    pub epistemic: f64,
    pub pragmatic: f64,
    pub metrics: Vec<f64>,
}

/// The full trace of one seed's run.
#[derive(Debug, Clone)]
pub struct ExperimentTrace {
    pub task: Task,
    pub strategy: Strategy,
    pub seed: u64,
    pub query_labels: Vec<String>,
    pub outcome_labels: Vec<String>,
    pub metric_labels: Vec<String>,
    pub records: Vec<Record>,
    /// Diagnostic set when a numeric failure aborted this seed; the records
    /// cover the iterations completed before the failure.
    pub aborted: Option<String>,
    pub config_hash: u64,
    /// Wall time of the run (diagnostic only; never serialized).
    pub wall_time_s: f64,
    pub n_env_evals: u64,
    pub n_dm_queries: u64,
    /// Outcomes of the initial design (GP tasks), for metric recomputation.
    pub initial_outcomes: Vec<Vec<f64>>,
}

/// 17-significant-digit float serialization used in every CSV cell.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentTrace {
    /// Fixed header: iteration, query components, outcome components, score,
    /// epistemic, pragmatic, then the task metric columns.
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["iteration".to_string()];
        cols.extend(self.query_labels.iter().cloned());
        cols.extend(self.outcome_labels.iter().cloned());
        cols.extend(["score".into(), "epistemic".into(), "pragmatic".into()]);
        cols.extend(self.metric_labels.iter().cloned());
        cols.join(",")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.csv_header());
        out.push('\n');
        for r in &self.records {
            let mut cells = vec![r.iteration.to_string()];
            cells.extend(r.query.iter().map(|v| fmt_float(*v)));
            cells.extend(r.outcome.iter().map(|v| fmt_float(*v)));
            cells.push(fmt_float(r.score));
            cells.push(fmt_float(r.epistemic));
            cells.push(fmt_float(r.pragmatic));
            cells.extend(r.metrics.iter().map(|v| fmt_float(*v)));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    /// `<task>_<strategy>_seed<k>.csv`
    pub fn file_name(&self) -> String {
        format!("{}_{}_seed{}.csv", self.task, self.strategy, self.seed)
    }
}
