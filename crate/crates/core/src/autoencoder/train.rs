use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{backward, forward, masked_rmse_at, AutoencoderParams, MaskedRatings, ModelInputs};
use super::{AutoencoderConfig, EmbedSource};
use crate::dataio::{RatingData, Side};
use crate::error::{Error, Result};
use crate::hashing::config_hash;
use crate::numeric::{adam_step, AdamState, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
    pub alpha: f64,
}

/// Parameters at the epoch with the lowest validation loss, plus the
/// per-epoch trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedAutoencoder {
    pub side: Side,
    pub config: AutoencoderConfig,
    pub params: AutoencoderParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_validation_loss: f64,
}

impl TrainedAutoencoder {
    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }
}

/// Builds the fixed model inputs for one side: the training ratings (unknown
/// cells as 0) and the entity feature rows.
pub fn side_inputs(train: &RatingData, side: Side, features: &Matrix) -> Result<ModelInputs> {
    ModelInputs::new(train.dense(side), features.clone())
}

fn init_rng(seed: u64, side: Side) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match side {
        Side::User => 1,
        Side::Movie => 2,
    });
    rng
}

pub fn initial_params(side: Side, inputs: &ModelInputs, cfg: &AutoencoderConfig) -> AutoencoderParams {
    let mut rng = init_rng(cfg.seed, side);
    AutoencoderParams::init(inputs.ratings.cols(), inputs.features.cols(), cfg, &mut rng)
}

/// Full-batch training on `train`, scoring `validation` before every step.
/// Validation cells must not be part of `train`; they are absent from the
/// encoder input and from the loss mask.
pub fn fit(
    side: Side,
    train: &RatingData,
    validation: &RatingData,
    features: &Matrix,
    cfg: &AutoencoderConfig,
) -> Result<TrainedAutoencoder> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Domain("training and validation ratings must be non-empty".into()));
    }
    let inputs = side_inputs(train, side, features)?;
    let train_cells = MaskedRatings::from_ratings(train, side);
    let val_cells = MaskedRatings::from_ratings(validation, side);
    let mut params = initial_params(side, &inputs, cfg);
    let mut adam = AdamState::new(cfg.optimizer, &params.tensors);

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, Vec<Matrix>)> = None;
    let started = Instant::now();
    for epoch in 0..cfg.epochs {
        let pass = forward(&inputs, &params, cfg, &train_cells, Some(&val_cells))?;
        let validation_loss = masked_rmse_at(&val_cells, &pass.eval_predictions)?;
        let (train_loss, grads) = backward(&inputs, &params, cfg, &train_cells, &pass)?;
        if !train_loss.is_finite() || !validation_loss.is_finite() {
            return Err(Error::Training(format!("{side}-side loss diverged at epoch {epoch}")));
        }
        history.push(EpochRecord { epoch, train_loss, validation_loss, alpha: params.alpha() });
        if best.as_ref().is_none_or(|b| validation_loss < b.1) {
            best = Some((epoch, validation_loss, params.values()));
        }
        if let (Some(p), Some(b)) = (cfg.patience, &best) {
            if epoch - b.0 >= p {
                break;
            }
        }
        for (t, g) in params.tensors.iter_mut().zip(grads) {
            t.grad = Some(g);
        }
        adam_step(&mut params.tensors, &mut adam)
            .map_err(|e| Error::Training(format!("{side}-side epoch {epoch}: {e}")))?;
        if epoch % 50 == 0 {
            crate::progress::note(&format!(
                "{side} d={} epoch {epoch}: train {train_loss:.4} val {validation_loss:.4} alpha {:.3} ({:.1}s)",
                cfg.latent_dim,
                params.alpha(),
                started.elapsed().as_secs_f64()
            ));
        }
    }
    let (best_epoch, best_validation_loss, values) =
        best.ok_or_else(|| Error::Config("epochs must be at least 1".into()))?;
    Ok(TrainedAutoencoder {
        side,
        config: cfg.clone(),
        params: params.with_values(&values),
        history,
        best_epoch,
        best_validation_loss,
    })
}

/// Learned rows for one entity type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    pub side: Side,
    pub source: EmbedSource,
    pub config_hash: String,
    pub matrix: Matrix,
}

/// Latent codes of every entity under the model's selected parameters.
pub fn extract_embeddings(model: &TrainedAutoencoder, inputs: &ModelInputs, source: EmbedSource) -> Result<EmbeddingSet> {
    let slope = model.config.leaky_slope;
    let latent = super::model::encode(&inputs.ratings, &model.params, slope)?;
    let matrix = match source {
        EmbedSource::PreAttention => latent,
        EmbedSource::PostAttention => {
            super::model::attend(&latent, &inputs.features, &inputs.groups, &model.params, &model.config)?
        }
    };
    if !matrix.is_finite() {
        return Err(Error::Training(format!("{} embeddings are not finite", model.side)));
    }
    Ok(EmbeddingSet { side: model.side, source, config_hash: config_hash(&model.config), matrix })
}
