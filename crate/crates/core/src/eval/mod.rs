//! Batch evaluation: load bundles, run recognisers, score and aggregate.

mod metrics;
mod report;
mod run;

pub use metrics::{aggregate, score_problem, MetricsRow, PerProblemMetrics, ALL_DOMAINS};
pub use report::{emit_report, per_problem_csv, ReportFormat, PER_PROBLEM_COLUMNS, SUMMARY_COLUMNS};
pub use run::{
    load_suite, parallel_map, run_eval, write_atomic, EvalError, LoadFailure, RecognizerSpec, RunConfig, RunOutcome,
};
pub use crate::bundle::load_bundle;
