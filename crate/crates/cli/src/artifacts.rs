use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use attnae::autoencoder::{AutoencoderConfig, EmbedSource};
use attnae::dataio::Side;
use attnae::gbt::GbtConfig;
use attnae::hashing::config_hash;
use attnae::pipeline::ExperimentConfig;
use serde::Serialize;

/// File names under the output directory. Each embeds the hash of exactly
/// the inputs that determine its content, so a cached file is reused only
/// for a matching config.
#[derive(Clone, Debug)]
pub struct Layout {
    root: PathBuf,
    cfg: ExperimentConfig,
}

#[derive(Serialize)]
struct SplitKey<'a> {
    fold: &'a str,
    validation_fraction: f64,
    seed: u64,
}

#[derive(Serialize)]
struct FeatureKey {
    year_unknown_column: bool,
}

#[derive(Serialize)]
struct AutoencoderKey<'a> {
    split: String,
    features: String,
    side: Side,
    config: &'a AutoencoderConfig,
}

#[derive(Serialize)]
struct EmbedKey {
    autoencoder: String,
    source: EmbedSource,
}

#[derive(Serialize)]
struct EnsembleKey<'a> {
    user: String,
    movie: String,
    setups: &'a [GbtConfig],
    clip: bool,
    refit_with_validation: bool,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>, cfg: ExperimentConfig) -> Self {
        Layout { root: root.into(), cfg }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn experiment_hash(&self) -> String {
        config_hash(&self.cfg)
    }

    fn split_hash(&self) -> String {
        config_hash(&SplitKey {
            fold: &self.cfg.fold,
            validation_fraction: self.cfg.autoencoder.validation_fraction,
            seed: self.cfg.seed,
        })
    }

    fn feature_hash(&self) -> String {
        config_hash(&FeatureKey { year_unknown_column: self.cfg.year_unknown_column })
    }

    pub fn features(&self, side: Side) -> PathBuf {
        self.root.join(format!("features-{side}-{}.csv", self.feature_hash()))
    }

    pub fn train_split(&self) -> PathBuf {
        self.root.join(format!("train-{}.tsv", self.split_hash()))
    }

    pub fn validation_split(&self) -> PathBuf {
        self.root.join(format!("validation-{}.tsv", self.split_hash()))
    }

    pub fn autoencoder_hash(&self, side: Side, config: &AutoencoderConfig) -> String {
        config_hash(&AutoencoderKey { split: self.split_hash(), features: self.feature_hash(), side, config })
    }

    pub fn autoencoder(&self, side: Side, config: &AutoencoderConfig) -> PathBuf {
        self.root.join(format!("ae-{side}-{}.json", self.autoencoder_hash(side, config)))
    }

    fn embedding_hash(&self, side: Side) -> String {
        config_hash(&EmbedKey {
            autoencoder: self.autoencoder_hash(side, &self.cfg.autoencoder),
            source: self.cfg.embed_source,
        })
    }

    pub fn embedding(&self, side: Side) -> PathBuf {
        self.root.join(format!("embed-{side}-{}.json", self.embedding_hash(side)))
    }

    fn ensemble_hash(&self) -> String {
        config_hash(&EnsembleKey {
            user: self.embedding_hash(Side::User),
            movie: self.embedding_hash(Side::Movie),
            setups: &self.cfg.gbt_setups,
            clip: self.cfg.clip_predictions,
            refit_with_validation: self.cfg.refit_with_validation,
        })
    }

    pub fn ensemble(&self) -> PathBuf {
        self.root.join(format!("gbt-{}.txt", self.ensemble_hash()))
    }

    pub fn grid(&self) -> PathBuf {
        self.root.join(format!("grid-{}.json", self.ensemble_hash()))
    }

    pub fn sweep(&self) -> PathBuf {
        let points: Vec<(String, String)> = self
            .cfg
            .sweep_dims
            .iter()
            .map(|&d| {
                let c = self.cfg.autoencoder_variant(d, self.cfg.autoencoder.attention_enabled);
                (self.autoencoder_hash(Side::User, &c), self.autoencoder_hash(Side::Movie, &c))
            })
            .collect();
        self.root.join(format!("sweep-{}.json", config_hash(&points)))
    }

    fn experiment_file(&self, stem: &str, ext: &str) -> PathBuf {
        self.root.join(format!("{stem}-{}.{ext}", self.experiment_hash()))
    }

    pub fn report_text(&self) -> PathBuf {
        self.experiment_file("report", "txt")
    }

    pub fn report_json(&self) -> PathBuf {
        self.experiment_file("report", "json")
    }

    pub fn loss_vs_epoch(&self) -> PathBuf {
        self.experiment_file("loss_vs_epoch", "csv")
    }

    pub fn loss_vs_dimension(&self) -> PathBuf {
        self.experiment_file("loss_vs_dimension", "csv")
    }

    pub fn config_snapshot(&self) -> PathBuf {
        self.experiment_file("config", "toml")
    }
}

/// Writes through a temporary sibling so an interrupted run never leaves a
/// truncated artifact behind under its final name.
pub fn write_atomic(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(())
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
