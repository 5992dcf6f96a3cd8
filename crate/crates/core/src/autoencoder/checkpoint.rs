//! JSON checkpoints. Floats are written in shortest round-trip form and
//! parsed exactly, so a reloaded model reproduces its embeddings bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainedAutoencoder;
use crate::error::{Error, Result};

const FORMAT: &str = "attnae-autoencoder";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    seed: u64,
    alpha: f64,
    model: TrainedAutoencoder,
}

pub fn to_json(model: &TrainedAutoencoder) -> Result<String> {
    let env = Envelope {
        format: FORMAT.into(),
        version: VERSION,
        seed: model.config.seed,
        alpha: model.alpha(),
        model: model.clone(),
    };
    serde_json::to_string(&env).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(text: &str) -> Result<TrainedAutoencoder> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Format(format!("checkpoint: {e}")))?;
    if env.format != FORMAT || env.version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint {} v{}", env.format, env.version)));
    }
    env.model.params.check_shapes()?;
    Ok(env.model)
}

pub fn save(model: &TrainedAutoencoder, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<TrainedAutoencoder> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
