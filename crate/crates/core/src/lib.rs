//! Rating prediction for MovieLens 100K: feature-aware attention
//! autoencoders learn user and movie embeddings, and a gradient-boosted tree
//! ensemble regresses ratings from the concatenated embeddings and one-hot
//! side features.

pub mod autoencoder;
pub mod dataio;
pub mod error;
pub mod features;
pub mod gbt;
pub mod hashing;
pub mod numeric;
pub mod pipeline;
pub mod progress;

pub use error::{Error, Result};
