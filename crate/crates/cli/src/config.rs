//! Run configuration read from a TOML file.
//!
//! Units are kN and m. See the README for the full schema.

use std::fs;
use std::path::{Path, PathBuf};

use melan::{BridgeParams, LcMode, LoadProfile, ModelVariant, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub bridge: BridgeParams,
    pub load: LoadProfile,
    #[serde(default = "default_variant")]
    pub variant: ModelVariant,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub lc_mode: LcMode,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_variant() -> ModelVariant {
    ModelVariant::Full
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bridge: BridgeParams::wollmann(),
            load: LoadProfile::uniform(30.0),
            variant: ModelVariant::Full,
            solver: SolverOptions::default(),
            lc_mode: LcMode::Exact,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every nested invariant without running a solve.
    pub fn validate(&self) -> Result<(), CliError> {
        let config = |e: melan::MelanError| CliError::Config(e.to_string());
        self.bridge.validate().map_err(config)?;
        self.load.validate(self.bridge.length).map_err(config)?;
        self.solver.validate().map_err(config)?;
        self.lc_mode.validate().map_err(config)?;
        Ok(())
    }
}
