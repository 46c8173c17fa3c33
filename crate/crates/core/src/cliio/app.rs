use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::report::{emit_report, ReportDocument, Timings};
use crate::cvharness::{run_protocol, ExperimentConfig, Protocol};
use crate::error::{Error, Result};

/// Command-line values that replace the matching config keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    pub document: ReportDocument,
}

fn valid_protocols() -> String {
    Protocol::ALL.iter().map(|p| p.name()).collect::<Vec<_>>().join(", ")
}

/// Parses and validates a config document. Relative CSV paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let mut message = e.inner().to_string();
        if path == "protocol" {
            message.push_str(&format!("; valid protocols: {}", valid_protocols()));
        }
        Error::ConfigSchema { path, message }
    })?;
    config.dataset.resolve_relative(base_dir);
    if let Some(dir) = config.output_dir.as_mut().filter(|d| d.is_relative()) {
        *dir = base_dir.join(&*dir);
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

/// Parses the config and checks that its dataset loads.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let config = load_config(path)?;
    crate::cvharness::prepare_trial::<f64>(&config, 0)?;
    Ok(config)
}

/// Runs the protocol named in the config at `config_path` and writes
/// `<protocol>_report.json` and `<protocol>_summary.csv` into the output directory.
pub fn run_experiment(config_path: &Path, overrides: &Overrides) -> Result<RunSummary> {
    let mut config = load_config(config_path)?;
    if let Some(t) = overrides.trials {
        config.trials = t;
    }
    if let Some(s) = overrides.seed {
        config.base_seed = s;
    }
    if let Some(dir) = &overrides.out_dir {
        config.output_dir = Some(dir.clone());
    }
    config.validate()?;
    let out_dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("ficsr-out"));

    let start = Instant::now();
    let output = run_protocol(&config)?;
    let timings = Timings { total_seconds: start.elapsed().as_secs_f64() };
    let name = config.protocol.name();
    let document = ReportDocument::new(config, output, timings);
    let json_path = out_dir.join(format!("{name}_report.json"));
    let csv_path = out_dir.join(format!("{name}_summary.csv"));
    emit_report(&document, &json_path, &csv_path)?;
    Ok(RunSummary { json_path, csv_path, document })
}
