//! The experiment file: one JSON document per run, with a few command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gwf_core::galton_watson::OffspringDistribution;
use gwf_core::io::{from_json_str, IfsSpec, OffspringSpec};
use gwf_core::similarity::Ifs;
use gwf_core::symbols::{Symbol, Word};

use crate::error::CliError;

fn default_horizon() -> usize {
    12
}
fn default_trials() -> u64 {
    1000
}
fn default_samples() -> u64 {
    20
}
fn default_saved() -> usize {
    2
}
fn default_out() -> PathBuf {
    PathBuf::from("gwf-run")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ifs: IfsSpec,
    #[serde(default)]
    pub offspring: Option<OffspringSpec>,
    /// Depth of every sampled tree.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Section scales for the section-count bounds. Empty means four scales
    /// spread over the horizon.
    #[serde(default)]
    pub rho_schedule: Vec<f64>,
    /// Independent trials for the normalized generation sizes.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Generation of the normalized sizes; defaults to the horizon.
    #[serde(default)]
    pub ks_generation: Option<usize>,
    /// Surviving trees sampled for the section-count bounds.
    #[serde(default = "default_samples")]
    pub samples: u64,
    /// How many of those trees are written out with their clouds.
    #[serde(default = "default_saved")]
    pub saved_samples: usize,
    /// Surviving samples for the empirical reduced law; 0 skips it.
    #[serde(default)]
    pub reduced_law_samples: u64,
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Section scale of the projected clouds; defaults to `r_max^horizon`.
    #[serde(default)]
    pub projection_scale: Option<f64>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub zoom: ZoomConfig,
    #[serde(default)]
    pub render: RenderConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Grid base; defaults to `1/r_max` when that is an integer, else 2.
    pub base: Option<u32>,
    /// Guard factor between cell side and cloud resolution.
    pub guard: Option<f64>,
    /// Sampled window centers; all occupied windows when absent.
    pub centers: Option<usize>,
}

fn default_ssc_depth() -> usize {
    8
}
fn default_wsc_samples() -> usize {
    64
}
fn default_zoom_nodes() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "default_ssc_depth")]
    pub ssc_depth: usize,
    /// Ball radii for the weak separation profile; empty means `r_min/2^k`, k = 1..3.
    #[serde(default)]
    pub wsc_scales: Vec<f64>,
    #[serde(default = "default_wsc_samples")]
    pub wsc_samples: usize,
    /// Nodes of the sampled tree at which the zoom identity is checked.
    #[serde(default = "default_zoom_nodes")]
    pub zoom_nodes: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            ssc_depth: default_ssc_depth(),
            wsc_scales: Vec::new(),
            wsc_samples: default_wsc_samples(),
            zoom_nodes: default_zoom_nodes(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoomConfig {
    /// Path from the root, one symbol per step; empty means the leftmost
    /// path of the first sample, of half the horizon.
    #[serde(default)]
    pub path: Vec<Symbol>,
    /// Relative projection scale of the zooms; defaults to `r_max^(horizon − |path|)`.
    pub scale: Option<f64>,
}

fn default_pixels() -> usize {
    512
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    #[serde(default = "default_pixels")]
    pub width: usize,
    #[serde(default = "default_pixels")]
    pub height: usize,
    /// Raster window; defaults to the bounding box of the cloud.
    pub lo: Option<[f64; 2]>,
    pub hi: Option<[f64; 2]>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: default_pixels(),
            height: default_pixels(),
            lo: None,
            hi: None,
        }
    }
}

/// Command-line values that replace fields of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
}

/// A validated configuration with its system and law built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub ifs: Ifs,
    pub law: Option<OffspringDistribution>,
}

impl Experiment {
    pub fn from_json(text: &str, overrides: &Overrides) -> Result<Experiment, CliError> {
        let mut config: ExperimentConfig = from_json_str(text).map_err(CliError::config)?;
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(out) = &overrides.out {
            config.output_dir = out.clone();
        }
        if let Some(trials) = overrides.trials {
            config.trials = trials;
        }
        let ifs = config.ifs.build().map_err(CliError::config)?;
        let law = config
            .offspring
            .as_ref()
            .map(|spec| spec.build(ifs.len()))
            .transpose()
            .map_err(|e| CliError::Config(format!("offspring: {e}")))?;
        Word::from(config.zoom.path.clone())
            .check(ifs.len())
            .map_err(|e| CliError::Config(format!("zoom.path: {e}")))?;
        if config.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        Ok(Experiment { config, ifs, law })
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Experiment::from_json(&text, overrides)
    }

    /// The offspring law, required by the commands that sample trees.
    pub fn law(&self) -> Result<&OffspringDistribution, CliError> {
        self.law
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs an \"offspring\" law".into()))
    }

    pub fn projection_scale(&self) -> f64 {
        self.config
            .projection_scale
            .unwrap_or_else(|| self.ifs.r_max().powi(self.config.horizon as i32))
    }

    /// Explicit schedule, or `min(r_max^k, r_min/2)` for `k` spread over the horizon.
    pub fn rho_schedule(&self) -> Vec<f64> {
        if !self.config.rho_schedule.is_empty() {
            return self.config.rho_schedule.clone();
        }
        let h = self.config.horizon;
        let mut out: Vec<f64> = (1..=4)
            .map(|j| ((j * h + 2) / 4).max(1))
            .map(|k| self.ifs.r_max().powi(k as i32).min(0.5 * self.ifs.r_min()))
            .collect();
        out.dedup();
        out
    }

    pub fn grid_base(&self) -> u32 {
        if let Some(b) = self.config.estimator.base {
            return b;
        }
        let inv = 1.0 / self.ifs.r_max();
        let rounded = inv.round();
        if rounded >= 2.0 && (inv - rounded).abs() < 1e-9 {
            rounded as u32
        } else {
            2
        }
    }
}
