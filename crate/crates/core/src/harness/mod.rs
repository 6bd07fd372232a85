//! Seeded experiment harness: configuration, task assembly, the run loops,
//! per-iteration traces, and cross-seed aggregation.

pub mod config;
pub mod metrics;
pub mod runner;
pub mod tasks;
pub mod trace;

pub use config::{EnvOverrides, ExperimentConfig, Strategy, Task};
pub use metrics::{aggregate, metrics, AggregateTable, MetricTable};
pub use runner::{run, write_outputs};
pub use trace::{ExperimentTrace, Record};
