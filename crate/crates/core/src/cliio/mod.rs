//! Dataset ingestion, experiment configuration, report emission and the CLI driver.

mod app;
mod csvload;
mod report;

pub use app::{load_config, parse_config, run_experiment, validate_config, Overrides, RunSummary};
pub use csvload::{load_csv_dataset, CsvDatasetSchema, LabelColumn};
pub use report::{
    emit_report, write_csv_summary, Diagnostics, ReportDocument, Timings, Units, CSV_COLUMNS,
    SCHEMA_VERSION,
};
