use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub reg_lambda: f64,
    pub reg_alpha: f64,
    pub min_child_weight: f64,
    /// `None` starts from the target mean.
    pub base_score: Option<f64>,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_estimators: 1900,
            max_depth: 9,
            learning_rate: 0.01,
            subsample: 1.0,
            colsample_bytree: 0.2,
            reg_lambda: 1.0,
            reg_alpha: 3.0,
            min_child_weight: 1.0,
            base_score: None,
            seed: 42,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if !(self.colsample_bytree > 0.0 && self.colsample_bytree <= 1.0) {
            return bad("colsample_bytree must lie in (0, 1]");
        }
        if self.reg_lambda < 0.0 || self.reg_alpha < 0.0 {
            return bad("regularization weights must be non-negative");
        }
        if self.max_depth > 30 {
            return bad("max_depth must be at most 30");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.min_child_weight < 0.0 {
            return bad("min_child_weight must be non-negative");
        }
        Ok(())
    }

    /// True when the two configs can only differ in tree count, so the
    /// smaller ensemble is a prefix of the larger one.
    pub fn same_except_rounds(&self, other: &GbtConfig) -> bool {
        GbtConfig { n_estimators: 0, ..self.clone() } == GbtConfig { n_estimators: 0, ..other.clone() }
    }
}
