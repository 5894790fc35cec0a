//! Seeded experiments: generate or ingest input vectors, run every
//! algorithm in a simulated format, and record scaled errors next to their
//! first-order bounds.
//!
//! Trials are independent and run in parallel; records always come back in
//! trial order, so output does not depend on the thread count.

mod data;
mod experiment;
mod io;
mod summary;
mod svg;

pub use data::{generate, ingest_csv, ingest_csv_reader, write_vectors_csv, DataSource, DataSpec, Generator};
pub use experiment::{
    kernel_of, run_experiment, run_experiment_with, run_trial, ExperimentOptions, Measurement, TrialRecord,
};
pub use io::{
    emit_records_csv, emit_summary_csv, read_records, read_records_csv, write_records, write_summary, RECORD_HEADER,
};
pub use summary::{median, summarize, AlgorithmStats, RatioStats, SumDeviationStats, Summary, RATIO_PAIRS};
pub use svg::{emit_svg_scatter, render_scatter, ScatterOptions, STANDARD_PLOTS};
