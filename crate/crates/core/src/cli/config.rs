use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::lab::ExperimentConfig;
use crate::spectral::GridSpec;

pub const RUN_CONFIG_VERSION: u32 = 1;

/// The JSON Schema published for [`RunConfig`].
pub const RUN_CONFIG_SCHEMA: &str = include_str!("../../schema/run-config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeBlock {
    #[serde(default = "default_symbol")]
    pub symbol: String,
    #[serde(default = "default_cuts")]
    pub n_cut: Vec<u32>,
    /// Truncations of the elementary expansion; the last one is archived.
    #[serde(default)]
    pub k: Vec<usize>,
}

fn default_symbol() -> String {
    "dn".into()
}

fn default_cuts() -> Vec<u32> {
    vec![4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub n_pts: Vec<usize>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Aliases usable wherever a symbol id is expected.
    #[serde(default)]
    pub symbols: BTreeMap<String, String>,
    #[serde(default)]
    pub decompose: Option<DecomposeBlock>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            schema_version: RUN_CONFIG_VERSION,
            grid: None,
            seed: None,
            out: None,
            symbols: BTreeMap::new(),
            decompose: None,
            experiments: Vec::new(),
            sweep: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| config(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RUN_CONFIG_VERSION {
            return Err(config(format!(
                "schema_version {} is not supported; expected {RUN_CONFIG_VERSION}",
                self.schema_version
            )));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for e in &self.experiments {
            if !ids.insert(e.id.as_str()) {
                return Err(config(format!("duplicate experiment id `{}`", e.id)));
            }
        }
        if let Some(s) = &self.sweep {
            if s.n_pts.is_empty() {
                return Err(config("sweep.n_pts must not be empty"));
            }
        }
        Ok(())
    }

    /// Replaces an alias by its catalogue id.
    pub fn resolve_symbol(&self, id: &str) -> String {
        self.symbols.get(id).cloned().unwrap_or_else(|| id.to_string())
    }
}
