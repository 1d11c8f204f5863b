//! Run configuration files.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, FunctionSpec, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when present.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

fn resolve_paths(spec: &mut FunctionSpec, base: &Path) -> Result<()> {
    match spec {
        FunctionSpec::GridFile { path } => {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            if !path.is_file() {
                return Err(Error::ConfigInvalid(format!("function.path: {} does not exist", path.display())));
            }
        }
        FunctionSpec::Sum { terms } => {
            for t in terms {
                resolve_paths(t, base)?;
            }
        }
        _ => {}
    }
    Ok(())
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Reads a config file; grid-file paths are taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = cfg.function.as_mut() {
            resolve_paths(f, base)?;
        }
        Ok(cfg)
    }

    /// Command-specific parameters; a missing `params` reads as `{}`.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        let v = if self.params.is_null() { serde_json::json!({}) } else { self.params.clone() };
        serde_json::from_value(v).map_err(|e| Error::ConfigInvalid(format!("params: {e}")))
    }

    /// Samples `function` on `grid`.
    pub fn grid_function(&self) -> Result<GridFunction> {
        let f = self.function.as_ref().ok_or_else(|| Error::ConfigInvalid("missing field `function`".into()))?;
        let g = self.grid.as_ref().ok_or_else(|| Error::ConfigInvalid("missing field `grid`".into()))?;
        if g.origin.len() != g.dims.len() {
            return Err(Error::ConfigInvalid(format!(
                "grid.origin has {} entries but grid.dims has {}",
                g.origin.len(),
                g.dims.len()
            )));
        }
        sample(f, &g.origin, g.spacing, &g.dims).map_err(|e| match e {
            Error::InvalidSpec(m) => Error::ConfigInvalid(format!("function: {m}")),
            Error::GridTooSmall(m) => Error::ConfigInvalid(format!("grid: {m}")),
            other => other,
        })
    }
}
