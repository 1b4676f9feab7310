//! Summary statistics over solve traces and CSV / JSON / gnuplot output.

mod emit;
mod summary;

pub use emit::{emit_csv, emit_gnuplot, emit_json, load_json, read_csv_series, TraceFile, SCHEMA_VERSION};
pub use summary::{format_table, lower_median, summarize, summarize_with_reference, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("trace has no iteration records")]
    EmptyTrace,
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("malformed trace file: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for ReportError {
    fn from(e: serde_json::Error) -> Self {
        ReportError::Parse(e.to_string())
    }
}
