//! Run configuration, the stream loop, report emission and comparison.

mod compare;
mod config;
mod emit;
mod run;

pub use compare::{compare_runs, Comparison, ComparisonRow};
pub use config::{OutputConfig, RunConfig};
pub use emit::{curve_rows, emit_report, read_report, write_curves, write_events, write_report};
pub use run::{
    concat_datasets, load_datasets, run_batch, run_protocol, run_stream, worker_threads, RunEvent,
    RunOutcome,
};
