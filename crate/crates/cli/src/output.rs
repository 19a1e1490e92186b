//! Writes experiment tables and the summary file.

use std::fs;
use std::path::{Path, PathBuf};

use microdisk::table::write_csv;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{Outcome, Target};

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    config_hash: &'a str,
    files: Vec<String>,
    targets: &'a [Target],
    all_pass: bool,
}

/// Writes every table and `<name>_summary.json` into `dir`; returns the paths.
pub fn write_outcome(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &Outcome,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    for table in &outcome.tables {
        let file = format!("{}{}.csv", config.name, table.suffix);
        let mut buf = Vec::new();
        let comments = [
            format!("config-hash: {}", config.hash),
            format!("experiment: {}", config.experiment.name()),
        ];
        let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
        write_csv(&mut buf, &comments, &header, &table.rows)
            .map_err(|e| CliError::Io(e.to_string()))?;
        let path = dir.join(&file);
        fs::write(&path, buf)?;
        written.push(path);
        names.push(file);
    }
    let summary = Summary {
        experiment: config.experiment.name(),
        config_hash: &config.hash,
        files: names,
        targets: &outcome.targets,
        all_pass: outcome.targets.iter().all(|t| t.pass),
    };
    let path = dir.join(format!("{}_summary.json", config.name));
    let mut text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
