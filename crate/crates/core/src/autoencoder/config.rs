use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::AdamConfig;

/// Which latent code is exported for the downstream regressor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedSource {
    PreAttention,
    #[default]
    PostAttention,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    pub leaky_slope: f64,
    pub epochs: usize,
    /// Stop once validation loss has not improved for this many epochs.
    pub patience: Option<usize>,
    pub seed: u64,
    pub attention_enabled: bool,
    pub alpha_init: f64,
    pub layer_norm_eps: f64,
    pub layernorm_affine: bool,
    pub optimizer: AdamConfig,
    pub validation_fraction: f64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            latent_dim: 64,
            leaky_slope: 0.01,
            epochs: 500,
            patience: None,
            seed: 42,
            attention_enabled: true,
            alpha_init: 0.5,
            layer_norm_eps: 1e-5,
            layernorm_affine: false,
            optimizer: AdamConfig { weight_decay: 5e-3, ..AdamConfig::default() },
            validation_fraction: 0.1,
        }
    }
}

impl AutoencoderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.latent_dim == 0 {
            return bad("latent_dim must be at least 1");
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return bad("leaky_slope must lie in (0, 1)");
        }
        if !(self.alpha_init > 0.0 && self.alpha_init < 1.0) {
            return bad("alpha_init must lie in (0, 1)");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must lie in (0, 1)");
        }
        if self.layer_norm_eps <= 0.0 {
            return bad("layer_norm_eps must be positive");
        }
        let o = &self.optimizer;
        if o.learning_rate <= 0.0 || !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) || o.eps <= 0.0 {
            return bad("optimizer settings out of range");
        }
        if o.weight_decay < 0.0 {
            return bad("weight_decay must be non-negative");
        }
        Ok(())
    }
}
