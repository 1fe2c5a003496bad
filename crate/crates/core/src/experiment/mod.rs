//! Experiment configuration, the run harness, strategy sweeps, random
//! hyperparameter search and report emission.

mod kv;
mod report;
mod runner;
mod search;
mod spec;

pub use kv::KvConfig;
pub use report::{experiment_reports, metrics_table, parse_runs_csv, render_table, runs_csv, summarize, summary_csv, ReportError, SummaryRow, SweepResult, SweepRow};
pub use runner::{load_instances, run_dir, run_experiment, run_jobs, run_one, run_sweep, ExperimentData, ExperimentError, RunRecord, SweepOutcome};
pub use search::{random_search, Conditional, Dist, SampledConfig, SchedulerChoice, SearchError, SearchSpace};
pub use spec::{EvalSplit, ExperimentSpec, GridPoint, Limit};
