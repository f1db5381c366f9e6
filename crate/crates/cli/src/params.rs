//! Stage parameters shared by the subcommands and the pipeline config.
//!
//! Each struct is both a clap argument group and a serde table, so a flag
//! `--nms-radius` and a config key `nms_radius` mean the same thing and
//! carry the same default.

use std::path::PathBuf;

use clap::{Args, FromArgMatches, ValueEnum};
use edgecraft_core::canny::{CannyParams, HysteresisMode, ThresholdMode};
use edgecraft_core::filters::{FilterKind, FilterSpec, NoiseVariance};
use edgecraft_core::ght::GhtParams;
use edgecraft_core::gradient::{Connectivity, FirstOrderKind};
use edgecraft_core::harris::HarrisParams;
use edgecraft_core::hough::{CircleSearch, VoteThreshold};
use edgecraft_core::BorderPolicy;
use serde::Deserialize;

/// Defaults as declared on the clap attributes.
fn clap_defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults").no_binary_name(true));
    let matches = cmd.get_matches_from(std::iter::empty::<String>());
    T::from_arg_matches(&matches).expect("every argument has a default")
}

macro_rules! clap_default {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                clap_defaults()
            }
        })*
    };
}

clap_default!(
    FilterArgs,
    EdgesArgs,
    CannyArgs,
    HarrisArgs,
    LineArgs,
    CircleArgs,
    GhtDetectArgs
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Border {
    Replicate,
    Reflect,
    Zero,
}

impl From<Border> for BorderPolicy {
    fn from(b: Border) -> Self {
        match b {
            Border::Replicate => BorderPolicy::Replicate,
            Border::Reflect => BorderPolicy::Reflect,
            Border::Zero => BorderPolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterName {
    Mean,
    Median,
    Gaussian,
    Wiener,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeOp {
    Prewitt,
    Sobel,
    Roberts,
    #[value(name = "laplacian4")]
    #[serde(rename = "laplacian4")]
    Laplacian4,
    #[value(name = "laplacian8")]
    #[serde(rename = "laplacian8")]
    Laplacian8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ratio,
    Absolute,
}

impl From<Mode> for ThresholdMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ratio => ThresholdMode::RatioOfMax,
            Mode::Absolute => ThresholdMode::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hysteresis {
    Flood,
    OneHop,
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: FilterName,
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Known noise variance for the Wiener filter; estimated when absent.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_enum, default_value = "replicate")]
    pub border: Border,
}

impl FilterArgs {
    pub fn spec(&self) -> Result<FilterSpec, String> {
        let kind = match self.kind {
            FilterName::Mean => FilterKind::Mean,
            FilterName::Median => FilterKind::Median,
            FilterName::Gaussian => FilterKind::Gaussian,
            FilterName::Wiener => FilterKind::AdaptiveWiener,
            FilterName::Hybrid => FilterKind::Hybrid,
        };
        let spec = FilterSpec {
            kind,
            radius: self.radius,
            sigma: self.sigma,
            noise_variance: self.noise.map_or(NoiseVariance::Auto, NoiseVariance::Known),
            policy: self.border.into(),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgesArgs {
    #[arg(long, value_enum, default_value = "sobel")]
    pub op: EdgeOp,
    #[arg(long, value_enum, default_value = "replicate")]
    pub border: Border,
}

/// Either a first-order operator or a Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOperator {
    FirstOrder(FirstOrderKind),
    Laplacian(Connectivity),
}

impl EdgesArgs {
    pub fn operator(&self) -> EdgeOperator {
        match self.op {
            EdgeOp::Prewitt => EdgeOperator::FirstOrder(FirstOrderKind::Prewitt),
            EdgeOp::Sobel => EdgeOperator::FirstOrder(FirstOrderKind::Sobel),
            EdgeOp::Roberts => EdgeOperator::FirstOrder(FirstOrderKind::Roberts),
            EdgeOp::Laplacian4 => EdgeOperator::Laplacian(Connectivity::Four),
            EdgeOp::Laplacian8 => EdgeOperator::Laplacian(Connectivity::Eight),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyArgs {
    #[arg(long, default_value_t = 1.4)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub low: f64,
    #[arg(long, default_value_t = 0.3)]
    pub high: f64,
    #[arg(long, value_enum, default_value = "ratio")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "flood")]
    pub hysteresis: Hysteresis,
}

impl CannyArgs {
    pub fn params(&self) -> Result<CannyParams, String> {
        let p = CannyParams {
            sigma: self.sigma,
            low: self.low,
            high: self.high,
            mode: self.mode.into(),
            hysteresis: match self.hysteresis {
                Hysteresis::Flood => HysteresisMode::FloodFill,
                Hysteresis::OneHop => HysteresisMode::OneHop,
            },
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarrisArgs {
    #[arg(long, default_value_t = 0.04)]
    pub k: f64,
    /// Gaussian window sigma for the structure tensor.
    #[arg(long = "window-sigma", default_value_t = 1.0)]
    pub window_sigma: f64,
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "ratio")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub nms_radius: usize,
}

impl HarrisArgs {
    pub fn params(&self) -> Result<HarrisParams, String> {
        let p = HarrisParams {
            k: self.k,
            window_sigma: self.window_sigma,
            threshold: self.threshold,
            threshold_mode: self.mode.into(),
            nms_radius: self.nms_radius,
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }
}

fn vote_threshold(count: Option<u64>, ratio: f64) -> Result<VoteThreshold, String> {
    let t = match count {
        Some(n) => VoteThreshold::Count(n),
        None => VoteThreshold::RatioOfMax(ratio),
    };
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineArgs {
    #[arg(long, default_value_t = 180)]
    pub theta_bins: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho_step: f64,
    /// Absolute vote threshold; overrides `--ratio`.
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Vote threshold as a fraction of the accumulator maximum.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 2)]
    pub nms_radius: usize,
    /// Keep at most this many lines.
    #[arg(long)]
    pub max_lines: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSettings {
    pub theta_bins: usize,
    pub rho_step: f64,
    pub threshold: VoteThreshold,
    pub nms_radius: usize,
    pub max_lines: Option<usize>,
}

impl LineArgs {
    pub fn settings(&self) -> Result<LineSettings, String> {
        if self.theta_bins == 0 {
            return Err("theta_bins must be at least 1".into());
        }
        if !(self.rho_step.is_finite() && self.rho_step > 0.0) {
            return Err(format!("rho_step {} must be positive", self.rho_step));
        }
        Ok(LineSettings {
            theta_bins: self.theta_bins,
            rho_step: self.rho_step,
            threshold: vote_threshold(self.threshold, self.ratio)?,
            nms_radius: self.nms_radius,
            max_lines: self.max_lines,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleArgs {
    /// Circle radius in pixels; repeat for several radii.
    #[arg(long = "radius", num_args = 1..)]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 360)]
    pub theta_steps: usize,
    #[arg(long)]
    pub threshold: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 3)]
    pub nms_radius: usize,
    #[arg(long)]
    pub max_circles: Option<usize>,
}

impl CircleArgs {
    pub fn search(&self) -> Result<CircleSearch, String> {
        if self.radii.is_empty() {
            return Err("at least one --radius is required".into());
        }
        if let Some(r) = self.radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(format!("radius {r} must be positive"));
        }
        if self.theta_steps < 8 {
            return Err(format!(
                "theta_steps {} must be at least 8",
                self.theta_steps
            ));
        }
        Ok(CircleSearch {
            radii: self.radii.clone(),
            theta_steps: self.theta_steps,
            threshold: vote_threshold(self.threshold, self.ratio)?,
            nms_radius: self.nms_radius,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhtDetectArgs {
    /// R-table written by `ght-build`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<u64>,
    #[arg(long, default_value_t = 0.9)]
    pub ratio: f64,
    #[arg(long, default_value_t = 3)]
    pub nms_radius: usize,
}

impl GhtDetectArgs {
    pub fn model_path(&self) -> Result<&PathBuf, String> {
        self.model
            .as_ref()
            .ok_or_else(|| "a model R-table path is required".to_string())
    }

    /// Detection settings; `phi_bins` and phase mode come from the table.
    pub fn params(&self) -> Result<GhtParams, String> {
        Ok(GhtParams {
            threshold: vote_threshold(self.threshold, self.ratio)?,
            nms_radius: self.nms_radius,
            ..GhtParams::default()
        })
    }
}
