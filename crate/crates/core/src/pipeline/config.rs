use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autoencoder::{AutoencoderConfig, EmbedSource};
use crate::error::{Error, Result};
use crate::gbt::GbtConfig;

/// Every knob of a run. The top-level `seed` is authoritative: it fixes the
/// validation split and overwrites the seeds of the autoencoder and of every
/// boosting setup (see [`ExperimentConfig::resolved`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// `u1` .. `u5`.
    pub fold: String,
    /// Adds a `year=unknown` movie column instead of leaving the year block
    /// empty for undated movies.
    pub year_unknown_column: bool,
    pub embed_source: EmbedSource,
    pub clip_predictions: bool,
    /// Retrain the selected setup on train + validation before testing.
    pub refit_with_validation: bool,
    /// Latent sizes for the sweep; empty skips it.
    pub sweep_dims: Vec<usize>,
    /// Also train both sides without attention for comparison.
    pub ablation: bool,
    pub autoencoder: AutoencoderConfig,
    pub gbt_setups: Vec<GbtConfig>,
}

/// The four boosting setups of the grid; only the round count varies.
pub fn table_setups() -> Vec<GbtConfig> {
    [1300, 1500, 1700, 1900]
        .into_iter()
        .map(|n_estimators| GbtConfig {
            n_estimators,
            max_depth: 9,
            learning_rate: 0.01,
            subsample: 1.0,
            colsample_bytree: 0.2,
            reg_lambda: 1.0,
            reg_alpha: 3.0,
            ..GbtConfig::default()
        })
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            fold: "u1".into(),
            year_unknown_column: false,
            embed_source: EmbedSource::PostAttention,
            clip_predictions: true,
            refit_with_validation: false,
            sweep_dims: vec![16, 32, 64, 128, 256],
            ablation: true,
            autoencoder: AutoencoderConfig::default(),
            gbt_setups: table_setups(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = cfg.resolved();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Copy with the top-level seed pushed into every stage.
    pub fn resolved(mut self) -> Self {
        self.autoencoder.seed = self.seed;
        for s in &mut self.gbt_setups {
            s.seed = self.seed;
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.resolved()
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.fold.as_str(), "u1" | "u2" | "u3" | "u4" | "u5") {
            return Err(Error::Config(format!("unknown fold `{}` (expected u1..u5)", self.fold)));
        }
        self.autoencoder.validate()?;
        if self.gbt_setups.is_empty() {
            return Err(Error::Config("at least one boosting setup is required".into()));
        }
        for s in &self.gbt_setups {
            s.validate()?;
        }
        if self.sweep_dims.contains(&0) {
            return Err(Error::Config("sweep dimensions must be at least 1".into()));
        }
        Ok(())
    }

    /// Autoencoder config for one sweep point or ablation variant.
    pub fn autoencoder_variant(&self, latent_dim: usize, attention: bool) -> AutoencoderConfig {
        AutoencoderConfig { latent_dim, attention_enabled: attention, ..self.autoencoder.clone() }
    }
}
