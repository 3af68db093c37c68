//! Batch experiments and normalized growth metrics.

mod batch;
mod compare;

pub use batch::{relative_growth, run_batch, write_report, Aggregate, BatchReport, BatchRow, REPORT_SCHEMA_VERSION};
pub use compare::{compare, write_compare_csv, CompareRow};
