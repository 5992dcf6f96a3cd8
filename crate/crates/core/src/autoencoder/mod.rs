//! Feature-aware attention autoencoder, one instance per side: users
//! reconstruct rows of R, movies rows of Rᵀ.

pub mod checkpoint;
mod config;
mod model;
mod train;

pub use config::{AutoencoderConfig, EmbedSource};
pub use model::{
    attend, backward, decode, encode, forward, masked_rmse, masked_rmse_at, reconstruct, AttentionCache,
    AutoencoderParams, FeatureGroups, ForwardPass, MaskedRatings, ModelInputs, Slot,
};
pub use train::{extract_embeddings, fit, initial_params, side_inputs, EmbeddingSet, EpochRecord, TrainedAutoencoder};
