//! Pass/fail summaries and output files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One gated measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, max: f64) -> Self {
        Check { name: name.into(), value, min: None, max: Some(max), pass: value <= max }
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Check { name: name.into(), value, min: Some(min), max: None, pass: value >= min }
    }

    pub fn within(name: impl Into<String>, value: f64, [min, max]: [f64; 2]) -> Self {
        Check { name: name.into(), value, min: Some(min), max: Some(max), pass: (min..=max).contains(&value) }
    }

    /// A boolean property, recorded as 1 (holds) or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, min: Some(1.0), max: None, pass: ok }
    }
}

/// Machine-readable summary written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
}

impl Summary {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Collects checks and output files for one command run.
pub struct Reporter {
    out: PathBuf,
    command: String,
    hash: String,
    checks: Vec<Check>,
    outputs: Vec<String>,
}

impl Reporter {
    pub fn new(out: &Path, command: &str, hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Reporter { out: out.to_path_buf(), command: command.into(), hash: hash.into(), checks: Vec::new(), outputs: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Creates `name` in the output directory and hands a buffered writer to `f`.
    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.out.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| std::io::Write::flush(&mut w)).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            std::io::Write::write_all(w, b"\n")
        })
    }

    /// Writes the JSON sidecar `<stem>.meta.json` for a CSV output.
    pub fn write_sidecar(&mut self, csv_name: &str, extra: serde_json::Value) -> Result<(), CliError> {
        let stem = csv_name.trim_end_matches(".csv");
        let mut meta = serde_json::json!({
            "file": csv_name,
            "command": self.command,
            "version": cdgreen::VERSION,
            "config_sha256": self.hash,
        });
        if let (Some(m), serde_json::Value::Object(e)) = (meta.as_object_mut(), extra) {
            m.extend(e);
        }
        self.write_json(&format!("{stem}.meta.json"), &meta)
    }

    /// Writes `<command>_summary.json` and returns the summary.
    pub fn finish(mut self) -> Result<Summary, CliError> {
        let name = format!("{}_summary.json", self.command);
        self.outputs.push(name.clone());
        let summary = Summary {
            command: self.command.clone(),
            version: cdgreen::VERSION.to_string(),
            config_sha256: self.hash.clone(),
            pass: self.checks.iter().all(|c| c.pass),
            checks: std::mem::take(&mut self.checks),
            outputs: std::mem::take(&mut self.outputs),
        };
        let path = self.out.join(&name);
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(summary)
    }
}
