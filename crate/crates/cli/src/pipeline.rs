//! TOML-described multi-stage runs.
//!
//! ```toml
//! input = "scene.pgm"
//! output_dir = "out"
//!
//! [[stage]]
//! name = "filter"
//! kind = "median"
//! radius = 1
//!
//! [[stage]]
//! name = "canny"
//! low = 0.1
//! high = 0.3
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::params::{
    CannyArgs, CircleArgs, EdgesArgs, FilterArgs, GhtDetectArgs, HarrisArgs, LineArgs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Pgm,
    Png,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Pgm => "pgm",
            OutputFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(rename = "stage", default)]
    pub stages: Vec<StageConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum StageConfig {
    Filter(FilterArgs),
    Edges(EdgesArgs),
    Canny(CannyArgs),
    Harris(HarrisArgs),
    HoughLine(LineArgs),
    HoughCircle(CircleArgs),
    GhtDetect(GhtDetectArgs),
}

impl StageConfig {
    pub fn name(&self) -> &'static str {
        match self {
            StageConfig::Filter(_) => "filter",
            StageConfig::Edges(_) => "edges",
            StageConfig::Canny(_) => "canny",
            StageConfig::Harris(_) => "harris",
            StageConfig::HoughLine(_) => "hough-line",
            StageConfig::HoughCircle(_) => "hough-circle",
            StageConfig::GhtDetect(_) => "ght-detect",
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig, String> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if config.stages.is_empty() {
            return Err("pipeline has no [[stage]] entries".into());
        }
        Ok(config)
    }
}
