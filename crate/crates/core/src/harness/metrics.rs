//! Metric extraction from traces and cross-seed aggregation.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::{Strategy, Task};
use crate::harness::trace::{fmt_float, ExperimentTrace};
use crate::util::median;

/// Per-iteration metric values of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub labels: Vec<String>,
    /// `rows[iteration][metric]`.
    pub rows: Vec<Vec<f64>>,
}

/// Expected metric columns per task.
pub fn metric_labels(task: Task) -> Vec<String> {
    match task {
        Task::CsiLocalization | Task::CsiWind | Task::CsiSources => {
            vec!["est_error".into(), "cum_violations".into()]
        }
        Task::Tas => vec!["cov_outcome".into(), "cov_param".into()],
        Task::Composite => vec!["iter_utility".into(), "best_utility".into()],
    }
}

/// Extracts the metric table of a completed trace, checking the trace
/// belongs to `task` and honors the task's monotonicity contracts.
pub fn metrics(trace: &ExperimentTrace, task: Task) -> Result<MetricTable> {
    if trace.task != task {
        return Err(Error::Domain(format!(
            "trace is for task {}, not {task}",
            trace.task
        )));
    }
    let labels = metric_labels(task);
    if trace.metric_labels != labels {
        return Err(Error::Domain("metric labels do not match the task".into()));
    }
    let rows: Vec<Vec<f64>> = trace.records.iter().map(|r| r.metrics.clone()).collect();
    // Monotonicity contracts: cumulative violations and coverage fractions
    // never decrease; the best utility is a prefix maximum.
    let monotone_col = match task {
        Task::CsiLocalization | Task::CsiWind | Task::CsiSources => vec![1],
        Task::Tas => vec![0, 1],
        Task::Composite => vec![1],
    };
    for &c in &monotone_col {
        for w in rows.windows(2) {
            if w[1][c] < w[0][c] - 1e-12 {
                return Err(Error::Domain(format!(
                    "metric '{}' decreased between iterations",
                    labels[c]
                )));
            }
        }
    }
    Ok(MetricTable { labels, rows })
}

/// Per-iteration mean, standard deviation (population), and median of each
/// metric across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub labels: Vec<String>,
    pub iterations: usize,
    /// `mean[iteration][metric]`, etc.
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
    pub median: Vec<Vec<f64>>,
}

pub fn aggregate(tables: &[MetricTable]) -> Result<AggregateTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Parameter("aggregate needs at least one trace".into()))?;
    let iterations = first.rows.len();
    let n_metrics = first.labels.len();
    for t in tables {
        if t.rows.len() != iterations || t.labels != first.labels {
            return Err(Error::Parameter("ragged traces cannot be aggregated".into()));
        }
    }
    let n = tables.len() as f64;
    let mut mean = vec![vec![0.0; n_metrics]; iterations];
    let mut std = vec![vec![0.0; n_metrics]; iterations];
    let mut med = vec![vec![0.0; n_metrics]; iterations];
    for it in 0..iterations {
        for m in 0..n_metrics {
            let values: Vec<f64> = tables.iter().map(|t| t.rows[it][m]).collect();
            let mu = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean[it][m] = mu;
            std[it][m] = var.sqrt();
            med[it][m] = median(&values);
        }
    }
    Ok(AggregateTable {
        labels: first.labels.clone(),
        iterations,
        mean,
        std,
        median: med,
    })
}

/// Serializes a per-task summary: one row per iteration, aggregate columns
/// prefixed by the strategy name.
pub fn summary_csv(strategy: Strategy, agg: &AggregateTable) -> String {
    let mut header = vec!["iteration".to_string()];
    for label in &agg.labels {
        for stat in ["mean", "std", "median"] {
            header.push(format!("{strategy}_{label}_{stat}"));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for it in 0..agg.iterations {
        let mut cells = vec![it.to_string()];
        for m in 0..agg.labels.len() {
            cells.push(fmt_float(agg.mean[it][m]));
            cells.push(fmt_float(agg.std[it][m]));
            cells.push(fmt_float(agg.median[it][m]));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_summary(
    path: &Path,
    strategy: Strategy,
    agg: &AggregateTable,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(summary_csv(strategy, agg).as_bytes())?;
    Ok(())
}
