//! Run manifest: enough to rerun an artifact directory from it alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::exit::{CliError, ExitCode};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub core_version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Set when the symbol vanishes and the run is the free flow.
    pub linear: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_delta: Option<f64>,
    pub status: String,
    pub artifacts: Vec<String>,
    pub config: ScenarioConfig,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ScenarioConfig) -> Self {
        Self {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            core_version: nlnls::VERSION.into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            linear: cfg.is_linear(),
            c_delta: None,
            status: "ok".into(),
            artifacts: Vec::new(),
            config: cfg.clone(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::new(ExitCode::Config, "manifest", format!("unreadable manifest in {}: {e}", dir.display()))
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        fs::write(dir.join(CONFIG_COPY), self.config.to_toml())?;
        Ok(())
    }
}

/// Creates the output directory. A directory already holding a manifest
/// with another config hash is refused unless `force` is set.
pub fn prepare_output(cfg: &ScenarioConfig, force: bool) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir.clone();
    if dir.join(MANIFEST_FILE).exists() && !force {
        let old = Manifest::load(&dir)?;
        let new = cfg.hash();
        if old.config_hash != new {
            return Err(CliError::new(
                ExitCode::Config,
                "manifest_mismatch",
                format!(
                    "{} holds a run with config hash {}, this config hashes to {new}; pass --force or pick another directory",
                    dir.display(),
                    old.config_hash
                ),
            ));
        }
    }
    fs::create_dir_all(&dir)?;
    Ok(dir)
}
