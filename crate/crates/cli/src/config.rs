//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fiscast_core::estimation::{ArimaOrder, TransformTag};
use fiscast_core::revenue_models::{OrderPolicy, Tax, TaxModelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MAX_HOLDOUT: usize = 10;
pub const MAX_LAMBDA: f64 = 1e8;
pub const MAX_ARMA_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// `arima = "auto"` or `arima = { p = 1, d = 0, q = 0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArimaPolicy {
    Auto(AutoKeyword),
    Fixed { p: usize, d: usize, q: usize },
}

impl Default for ArimaPolicy {
    fn default() -> Self {
        ArimaPolicy::Auto(AutoKeyword::Auto)
    }
}

/// Where the comparison forecasts come from: a series in the data file, or
/// the elasticity emulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elasticities: Option<BTreeMap<String, f64>>,
    /// Revenue series driven by the elasticities; defaults to the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revenue_column: Option<String>,
    /// Forecast separately by AR(1) and added to the elasticity block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddd_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSettings {
    /// Defaults to the model's predictors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<String>>,
    #[serde(default = "default_strength")]
    pub strength_threshold: f64,
    #[serde(default = "default_bins")]
    pub chi2_bins: usize,
}

impl Default for ScreenSettings {
    fn default() -> Self {
        Self {
            predictors: None,
            strength_threshold: default_strength(),
            chi2_bins: default_bins(),
        }
    }
}

fn default_strength() -> f64 {
    0.7
}

fn default_bins() -> usize {
    2
}

fn default_holdout() -> usize {
    3
}

fn default_lambda() -> f64 {
    100.0
}

fn default_alpha() -> f64 {
    0.01
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Relative paths are resolved against the config file's directory.
    pub data_path: PathBuf,
    pub tax: Tax,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<String>>,
    /// Restricts the pipeline to one transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformTag>,
    #[serde(default = "default_holdout")]
    pub holdout_years: usize,
    #[serde(default = "default_lambda")]
    pub hp_lambda: f64,
    #[serde(default)]
    pub arima: ArimaPolicy,
    #[serde(default = "default_alpha")]
    pub significance: f64,
    pub seed: u64,
    /// Not part of the report or its fingerprint.
    #[serde(default = "default_output", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineConfig>,
    #[serde(default)]
    pub screen: ScreenSettings,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub hp_lambda: Option<f64>,
    pub holdout_years: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    /// Reads, applies overrides, validates and resolves `data_path`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        config.apply(overrides);
        config.validate()?;
        let data = if config.data_path.is_absolute() {
            config.data_path.clone()
        } else {
            path.parent().unwrap_or(Path::new(".")).join(&config.data_path)
        };
        Ok((config, data))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(l) = o.hp_lambda {
            self.hp_lambda = l;
        }
        if let Some(h) = o.holdout_years {
            self.holdout_years = h;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let range = |msg: String| Err(CliError::ConfigRange(msg));
        if !(1..=MAX_HOLDOUT).contains(&self.holdout_years) {
            return range(format!("holdout_years must be in 1..={MAX_HOLDOUT}, got {}", self.holdout_years));
        }
        if !(self.hp_lambda > 0.0 && self.hp_lambda <= MAX_LAMBDA) {
            return range(format!("hp_lambda must be in (0, {MAX_LAMBDA}], got {}", self.hp_lambda));
        }
        if !(self.significance > 0.0 && self.significance < 0.5) {
            return range(format!("significance must be in (0, 0.5), got {}", self.significance));
        }
        if let ArimaPolicy::Fixed { p, d, q } = self.arima {
            if p > MAX_ARMA_ORDER || q > MAX_ARMA_ORDER || d > 2 {
                return range(format!(
                    "arima order ({p},{d},{q}) outside p, q ≤ {MAX_ARMA_ORDER}, d ≤ 2"
                ));
            }
        }
        if !(self.screen.strength_threshold > 0.0 && self.screen.strength_threshold <= 1.0) {
            return range(format!(
                "screen.strength_threshold must be in (0, 1], got {}",
                self.screen.strength_threshold
            ));
        }
        if !(2..=10).contains(&self.screen.chi2_bins) {
            return range(format!("screen.chi2_bins must be in 2..=10, got {}", self.screen.chi2_bins));
        }
        if let Some(b) = &self.baseline {
            if b.column.is_some() == b.elasticities.is_some() {
                return Err(CliError::ConfigParse(
                    "[baseline] needs exactly one of `column` or `elasticities`".into(),
                ));
            }
            if b.column.is_some() && (b.ddd_column.is_some() || b.adjustment_column.is_some() || b.revenue_column.is_some()) {
                return Err(CliError::ConfigParse(
                    "[baseline] `column` cannot be combined with emulator settings".into(),
                ));
            }
        }
        self.model_spec()
            .validate()
            .map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    pub fn model_spec(&self) -> TaxModelSpec {
        let mut spec = TaxModelSpec::new(self.tax);
        if let Some(t) = &self.target {
            spec.target_column = t.clone();
        }
        if let Some(p) = &self.predictors {
            spec.predictor_columns = p.clone();
        }
        spec.transform = self.transform;
        spec.holdout_years = self.holdout_years;
        spec.hp_lambda = self.hp_lambda;
        spec.order = match self.arima {
            ArimaPolicy::Auto(_) if self.tax == Tax::Dzp => OrderPolicy::Fixed(ArimaOrder::white_noise()),
            ArimaPolicy::Auto(_) => OrderPolicy::default(),
            ArimaPolicy::Fixed { p, d, q } => OrderPolicy::Fixed(ArimaOrder { p, d, q }),
        };
        spec
    }

    /// SHA-256 of the serialized config (output directory excluded).
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
