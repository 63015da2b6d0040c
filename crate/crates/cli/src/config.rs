//! Run configuration and output writing. Every file written by a command
//! carries the full configuration (including the seed) in a header so it can
//! be regenerated.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Settings shared by all commands, plus the command name and its own
/// arguments.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub format: Option<String>,
    pub has_header: bool,
    pub sample_rate_hz: u32,
    pub precision: String,
    pub skip_preprocess: bool,
    pub outlier_factor: f64,
    pub window_len: usize,
    pub window_count: usize,
    pub n_select: usize,
    pub bins: usize,
    pub folds: usize,
    pub seed: u64,
    pub repeats: usize,
    /// Left out of headers so identical runs into different directories
    /// produce identical files.
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Command-specific arguments.
    pub args: serde_json::Value,
}

impl RunConfig {
    fn one_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Writes `name` under the output directory and returns its path.
    fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create output directory {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// JSON object with the configuration under `run_config`.
    pub fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        let config = serde_json::to_value(self)?;
        match v.as_object_mut() {
            Some(map) => {
                map.insert("run_config".into(), config);
            }
            None => v = serde_json::json!({ "run_config": config, "data": v }),
        }
        self.write(name, &(serde_json::to_string_pretty(&v)? + "\n"))
    }

    /// CSV and edge lists: `# run_config: {...}` first line.
    pub fn write_hash_commented(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &format!("# run_config: {}\n{body}", self.one_line()))
    }

    /// DOT: `// run_config: {...}` first line.
    pub fn write_dot(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &format!("// run_config: {}\n{body}", self.one_line()))
    }

    pub fn write_markdown(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &format!("<!-- run_config: {} -->\n\n{body}", self.one_line()))
    }

    pub fn input(&self) -> Result<&Path> {
        self.input.as_deref().context("no input file given")
    }
}
