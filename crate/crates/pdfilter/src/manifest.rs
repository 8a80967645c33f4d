//! Run manifests: everything needed to reproduce a command's outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::commands::ExperimentConfig;
use crate::{Error, ModelFile, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub model: ModelFile,
}

impl Manifest {
    pub fn new(config: ExperimentConfig, model: ModelFile) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            config,
            model,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.seed != m.config.seed {
            return Err(Error::Config("manifest seed disagrees with its config".into()));
        }
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::export::write_json(&dir.join(MANIFEST_FILE), self)
    }
}
