//! Run artifacts, written to a staging directory and moved into place only when complete.

use std::fs;
use std::path::{Path, PathBuf};

use eulerlab::lagrangian::VortexState;
use eulerlab::ScalarField2D;

use crate::error::CliError;

#[derive(Default)]
pub struct Artifacts {
    pub summary: serde_json::Value,
    pub series: Option<Csv>,
    pub checkpoints: Vec<(String, VortexState)>,
    pub fields: Vec<(String, ScalarField2D)>,
}

/// Comma-separated table; numbers use the shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self { text: format!("{}\n", columns.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Formats numbers for a CSV row.
#[macro_export]
macro_rules! cells {
    ($($v:expr),* $(,)?) => { vec![$(format!("{}", $v)),*] };
}

pub const OUTPUT_ROOT_ENV: &str = "EULERLAB_OUTPUT_ROOT";

/// Relative paths are resolved against `$EULERLAB_OUTPUT_ROOT` when it is set.
pub fn resolve_output_dir(explicit: Option<&Path>, command: &str) -> PathBuf {
    let rel = explicit.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(command));
    if rel.is_absolute() {
        return rel;
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root).join(rel),
        None if explicit.is_some() => rel,
        None => PathBuf::from("eulerlab-runs").join(rel),
    }
}

fn write_all(dir: &Path, artifacts: &Artifacts, config_json: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), config_json)?;
    let summary = serde_json::to_string_pretty(&artifacts.summary).map_err(eulerlab::Error::from)?;
    fs::write(dir.join("summary.json"), summary + "\n")?;
    if let Some(series) = &artifacts.series {
        fs::write(dir.join("series.csv"), series.as_str())?;
    }
    if !artifacts.checkpoints.is_empty() || !artifacts.fields.is_empty() {
        let fields = dir.join("fields");
        fs::create_dir_all(&fields)?;
        for (name, state) in &artifacts.checkpoints {
            eulerlab::io::write_checkpoint_csv(state, &fields.join(name))?;
        }
        for (name, field) in &artifacts.fields {
            eulerlab::io::write_field_csv(field, &fields.join(name))?;
        }
    }
    Ok(())
}

/// Writes everything into `<dir>.partial` and renames it to `dir`. An existing `dir` is
/// replaced only if it holds a previous run (it contains `summary.json`).
pub fn commit(dir: &Path, artifacts: &Artifacts, config_json: &str) -> Result<(), CliError> {
    if dir.exists() {
        let previous_run = dir.join("summary.json").is_file();
        let empty = dir.read_dir()?.next().is_none();
        if !previous_run && !empty {
            return Err(CliError::Config(format!(
                "output directory {} exists and does not hold a previous run",
                dir.display()
            )));
        }
    }
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let staging = dir.with_file_name(format!(".{name}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    if let Err(e) = write_all(&staging, artifacts, config_json) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::rename(&staging, dir)?;
    Ok(())
}
