use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cvharness::{
    Aggregate, ClippedWeights, ExperimentConfig, ProtocolOutput, ReportEntry, WilcoxonSummary,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 12] = [
    "protocol",
    "method",
    "dataset",
    "shift_kind",
    "lambda",
    "fragment_index",
    "accuracy",
    "mu",
    "var_pop",
    "var_sample",
    "delta_percent",
    "seed",
];

/// Units of the numeric fields in the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub accuracy: String,
    pub variance: String,
    pub delta: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            accuracy: "fraction in [0, 1]".into(),
            variance: "fraction squared; var_population divides by n, var_sample by n - 1".into(),
            delta: "percent, 100 * (mu - baseline) / baseline".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    pub clipped_weights: Vec<ClippedWeights>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

/// Everything one experiment run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub protocol: String,
    pub dataset: String,
    pub shift_kind: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub units: Units,
    pub entries: Vec<ReportEntry>,
    pub aggregates: Vec<Aggregate>,
    pub wilcoxon: Vec<WilcoxonSummary>,
    pub diagnostics: Diagnostics,
    pub timings: Timings,
}

impl ReportDocument {
    pub fn new(config: ExperimentConfig, output: ProtocolOutput, timings: Timings) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: crate::VERSION.to_string(),
            protocol: config.protocol.name().to_string(),
            dataset: config.dataset.name(),
            shift_kind: config.shift.kind.name().to_string(),
            seeds: output.seeds,
            units: Units::default(),
            entries: output.entries,
            aggregates: output.aggregates,
            wilcoxon: output.wilcoxon,
            diagnostics: Diagnostics {
                warnings: output.warnings,
                clipped_weights: output.clipped_weights,
            },
            timings,
            config,
        }
    }

    /// The flat summary: one row per (entry, fragment), percentages with fixed decimals.
    pub fn csv_summary(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for e in &self.entries {
            let r = &e.report;
            let lambda = e.lambda.map(|l| l.to_string()).unwrap_or_default();
            let var_sample = r.var_sample.map(|v| format!("{:.6}", v * 1e4)).unwrap_or_default();
            for (i, acc) in r.per_fragment_accuracy.iter().enumerate() {
                let fields = [
                    format!("{}:{}", self.protocol, e.setting),
                    e.method.name().to_string(),
                    self.dataset.clone(),
                    self.shift_kind.clone(),
                    lambda.clone(),
                    i.to_string(),
                    format!("{:.4}", acc * 100.0),
                    format!("{:.4}", r.mean_mu * 100.0),
                    format!("{:.6}", r.var_population * 1e4),
                    var_sample.clone(),
                    format!("{:.2}", r.delta_percent),
                    e.seed.to_string(),
                ];
                for (j, f) in fields.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&csv_field(f));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, body).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_csv_summary(doc: &ReportDocument, csv_path: &Path) -> Result<()> {
    write(csv_path, &doc.csv_summary())
}

/// Writes the full document as pretty JSON and the flat CSV summary.
pub fn emit_report(doc: &ReportDocument, json_path: &Path, csv_path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(doc)?;
    json.push('\n');
    write(json_path, &json)?;
    write_csv_summary(doc, csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvharness::{summarize, Method, Protocol};

    fn doc(entries: Vec<ReportEntry>) -> ReportDocument {
        let config = ExperimentConfig::blobs(Protocol::E1, 50, 2, 2.0);
        let output = ProtocolOutput { entries, seeds: vec![0], ..Default::default() };
        ReportDocument::new(config, output, Timings::default())
    }

    #[test]
    fn empty_report_has_header_only() {
        let d = doc(Vec::new());
        assert_eq!(d.csv_summary(), format!("{}\n", CSV_COLUMNS.join(",")));
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["entries"], serde_json::json!([]));
    }

    #[test]
    fn delta_column_prints_table_fixture() {
        let report = summarize(&[0.887], 0.948).unwrap();
        let d = doc(vec![ReportEntry {
            trial: 0,
            seed: 7,
            setting: "ratio=0.5".into(),
            method: Method::StCv,
            lambda: None,
            baseline: "bl1".into(),
            report,
        }]);
        let csv = d.csv_summary();
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "e1:ratio=0.5,st_cv,blobs,none,,0,88.7000,88.7000,0.000000,,-6.43,7");
    }
}
