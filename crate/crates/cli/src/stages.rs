use std::cell::OnceCell;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use attnae::autoencoder::{self, checkpoint, extract_embeddings, side_inputs, AutoencoderConfig, EmbeddingSet, TrainedAutoencoder};
use attnae::dataio::{load_split, parse_ratings, Metadata, RatingData, Side};
use attnae::features::{encode_items, encode_users, FeatureMatrix};
use attnae::gbt::{self, GbtConfig, GbtEnsemble};
use attnae::pipeline::{
    build_dataset, dimension_sweep, evaluate, hyperparameter_grid, split_validation, AutoencoderSummary, DataSummary,
    ExperimentConfig, ExperimentReport, GridEntry, Role, SupervisedDataset, SweepResult, PUBLISHED_RMSE,
};
use attnae::progress::note;
use serde::{Deserialize, Serialize};

use crate::artifacts::{file_name, write_atomic, Layout};

/// Grid outcome stored next to the ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridRecord {
    entries: Vec<GridEntry>,
    selected_setup: usize,
}

/// One configured run over one dataset directory and one output directory.
pub struct Session {
    cfg: ExperimentConfig,
    data: PathBuf,
    layout: Layout,
    metadata: OnceCell<Metadata>,
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::User => "user",
        Side::Movie => "movie",
    }
}

fn missing(what: &str, path: &Path, stage: &str) -> anyhow::Error {
    anyhow!("missing {what} artifact {}; run `{stage}` first", path.display())
}

fn reuse(path: &Path) {
    note(&format!("cached {}", path.display()));
}

fn wrote(path: &Path) {
    println!("{}", path.display());
}

impl Session {
    pub fn new(cfg: ExperimentConfig, data: &Path, out: &Path) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let layout = Layout::new(out, cfg.clone());
        Ok(Session { cfg, data: data.to_path_buf(), layout, metadata: OnceCell::new() })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn metadata(&self) -> Result<&Metadata> {
        if let Some(m) = self.metadata.get() {
            return Ok(m);
        }
        let m = Metadata::load(&self.data).with_context(|| format!("loading metadata from {}", self.data.display()))?;
        Ok(self.metadata.get_or_init(|| m))
    }

    fn features(&self, side: Side) -> Result<FeatureMatrix> {
        let m = self.metadata()?;
        Ok(match side {
            Side::User => encode_users(&m.users, &m.occupations)?,
            Side::Movie => encode_items(&m.movies, &m.genres, self.cfg.year_unknown_column)?,
        })
    }

    fn fold(&self) -> Result<(RatingData, RatingData)> {
        load_split(&self.data, &self.cfg.fold).with_context(|| format!("loading fold {}", self.cfg.fold))
    }

    /// Training and validation parts written by `prepare`.
    fn split(&self) -> Result<(RatingData, RatingData)> {
        let (t, v) = (self.layout.train_split(), self.layout.validation_split());
        for p in [&t, &v] {
            if !p.exists() {
                return Err(missing("split", p, "prepare"));
            }
        }
        Ok((parse_ratings(&t)?, parse_ratings(&v)?))
    }

    pub fn prepare(&self) -> Result<()> {
        for side in [Side::User, Side::Movie] {
            let path = self.layout.features(side);
            if path.exists() {
                reuse(&path);
            } else {
                write_atomic(&path, self.features(side)?.to_csv())?;
                wrote(&path);
            }
        }
        let (t, v) = (self.layout.train_split(), self.layout.validation_split());
        if t.exists() && v.exists() {
            reuse(&t);
            reuse(&v);
            return Ok(());
        }
        let (base, _) = self.fold()?;
        let (train, validation) = split_validation(&base, self.cfg.autoencoder.validation_fraction, self.cfg.seed)?;
        write_atomic(&t, train.to_tsv())?;
        write_atomic(&v, validation.to_tsv())?;
        wrote(&t);
        wrote(&v);
        Ok(())
    }

    /// Trains (or loads) one autoencoder, keyed by side and config.
    fn autoencoder(&self, side: Side, cfg: &AutoencoderConfig, split: &(RatingData, RatingData)) -> Result<TrainedAutoencoder> {
        let path = self.layout.autoencoder(side, cfg);
        if path.exists() {
            let model = checkpoint::load(&path)?;
            if model.config != *cfg || model.side != side {
                bail!("stale autoencoder artifact {}: config does not match", path.display());
            }
            reuse(&path);
            return Ok(model);
        }
        let started = Instant::now();
        let features = self.features(side)?;
        let model = autoencoder::fit(side, &split.0, &split.1, &features.values, cfg)?;
        write_atomic(&path, checkpoint::to_json(&model)?)?;
        note(&format!(
            "{} d={} attention={}: best validation {} at epoch {} ({:.1}s)",
            side_name(side),
            cfg.latent_dim,
            cfg.attention_enabled,
            model.best_validation_loss,
            model.best_epoch,
            started.elapsed().as_secs_f64()
        ));
        wrote(&path);
        Ok(model)
    }

    fn ablation_config(&self) -> Option<AutoencoderConfig> {
        let main = &self.cfg.autoencoder;
        (self.cfg.ablation && main.attention_enabled).then(|| self.cfg.autoencoder_variant(main.latent_dim, false))
    }

    pub fn train_ae(&self) -> Result<()> {
        let split = self.split()?;
        for side in [Side::User, Side::Movie] {
            self.autoencoder(side, &self.cfg.autoencoder, &split)?;
            if let Some(c) = self.ablation_config() {
                self.autoencoder(side, &c, &split)?;
            }
        }
        Ok(())
    }

    pub fn sweep(&self) -> Result<Option<SweepResult>> {
        if self.cfg.sweep_dims.is_empty() {
            return Ok(None);
        }
        let path = self.layout.sweep();
        if path.exists() {
            reuse(&path);
            let text = fs::read_to_string(&path)?;
            return Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?));
        }
        let split = self.split()?;
        let attention = self.cfg.autoencoder.attention_enabled;
        let result = dimension_sweep(&self.cfg.sweep_dims, |side, d| {
            let c = self.cfg.autoencoder_variant(d, attention);
            Ok(self.autoencoder(side, &c, &split).map_err(|e| attnae::Error::Training(format!("{e:#}")))?.best_validation_loss)
        })?;
        write_atomic(&path, serde_json::to_string_pretty(&result)? + "\n")?;
        wrote(&path);
        Ok(Some(result))
    }

    fn trained(&self, side: Side, cfg: &AutoencoderConfig) -> Result<TrainedAutoencoder> {
        let path = self.layout.autoencoder(side, cfg);
        if !path.exists() {
            return Err(missing("autoencoder", &path, "train-ae"));
        }
        checkpoint::load(&path).with_context(|| format!("loading {}", path.display()))
    }

    pub fn embed(&self) -> Result<()> {
        let (train, _) = self.split()?;
        for side in [Side::User, Side::Movie] {
            let path = self.layout.embedding(side);
            if path.exists() {
                reuse(&path);
                continue;
            }
            let model = self.trained(side, &self.cfg.autoencoder)?;
            let inputs = side_inputs(&train, side, &self.features(side)?.values)?;
            let mut set = extract_embeddings(&model, &inputs, self.cfg.embed_source)?;
            set.config_hash = self.layout.autoencoder_hash(side, &self.cfg.autoencoder);
            write_atomic(&path, serde_json::to_string(&set)?)?;
            wrote(&path);
        }
        Ok(())
    }

    fn embedding(&self, side: Side) -> Result<EmbeddingSet> {
        let path = self.layout.embedding(side);
        if !path.exists() {
            return Err(missing("embedding", &path, "embed"));
        }
        let text = fs::read_to_string(&path)?;
        let set: EmbeddingSet = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if set.side != side || set.source != self.cfg.embed_source {
            bail!("stale embedding artifact {}", path.display());
        }
        Ok(set)
    }

    fn dataset(&self, ratings: &RatingData, role: Role) -> Result<SupervisedDataset> {
        let (eu, em) = (self.embedding(Side::User)?, self.embedding(Side::Movie)?);
        let (fu, fm) = (self.features(Side::User)?, self.features(Side::Movie)?);
        Ok(build_dataset(ratings, &eu.matrix, &em.matrix, &fu.values, &fm.values, role)?)
    }

    pub fn train_gbt(&self) -> Result<()> {
        let (path, grid_path) = (self.layout.ensemble(), self.layout.grid());
        if path.exists() && grid_path.exists() {
            reuse(&path);
            return Ok(());
        }
        let (train, validation) = self.split()?;
        let train_set = self.dataset(&train, Role::Train)?;
        let val_set = self.dataset(&validation, Role::Validation)?;
        let started = Instant::now();
        let outcome = hyperparameter_grid(&self.cfg.gbt_setups, &train_set, &val_set, self.cfg.clip_predictions)?;
        let entries: Vec<GridEntry> = self
            .cfg
            .gbt_setups
            .iter()
            .zip(&outcome.validation_rmse)
            .enumerate()
            .map(|(i, (s, &r))| GridEntry { setup: i + 1, n_estimators: s.n_estimators, validation_rmse: r })
            .collect();
        for e in &entries {
            note(&format!("setup {} ({} rounds): validation RMSE {}", e.setup, e.n_estimators, e.validation_rmse));
        }
        let model = if self.cfg.refit_with_validation {
            let both = RatingData::new(
                train.triplets().iter().chain(validation.triplets()).copied().collect(),
                train.n_users(),
                train.n_movies(),
            )?;
            let set = self.dataset(&both, Role::Train)?;
            let cfg: &GbtConfig = &self.cfg.gbt_setups[outcome.best];
            gbt::fit(&set.x, &set.y, cfg, None)?.0
        } else {
            outcome.model
        };
        note(&format!("boosting done ({:.1}s)", started.elapsed().as_secs_f64()));
        write_atomic(&path, gbt::to_text(&model))?;
        let record = GridRecord { entries, selected_setup: outcome.best + 1 };
        write_atomic(&grid_path, serde_json::to_string_pretty(&record)? + "\n")?;
        wrote(&path);
        wrote(&grid_path);
        Ok(())
    }

    fn ensemble(&self) -> Result<(GbtEnsemble, GridRecord)> {
        let (path, grid_path) = (self.layout.ensemble(), self.layout.grid());
        if !path.exists() {
            return Err(missing("ensemble", &path, "train-gbt"));
        }
        if !grid_path.exists() {
            return Err(missing("grid", &grid_path, "train-gbt"));
        }
        let model = gbt::from_text(&fs::read_to_string(&path)?).with_context(|| format!("parsing {}", path.display()))?;
        let record = serde_json::from_str(&fs::read_to_string(&grid_path)?)?;
        Ok((model, record))
    }

    fn summary(&self, side: Side, cfg: &AutoencoderConfig) -> Result<Option<AutoencoderSummary>> {
        let path = self.layout.autoencoder(side, cfg);
        if !path.exists() {
            return Ok(None);
        }
        let m = checkpoint::load(&path)?;
        let alpha = cfg.attention_enabled.then(|| m.alpha());
        Ok(Some(AutoencoderSummary {
            side,
            attention: cfg.attention_enabled,
            latent_dim: cfg.latent_dim,
            epochs_run: m.history.len(),
            best_epoch: m.best_epoch,
            best_validation_loss: m.best_validation_loss,
            alpha,
            alpha_in_published_band: alpha.map(ExperimentReport::alpha_band),
            checkpoint: file_name(&path),
            history: m.history,
        }))
    }

    /// Scores the ensemble on the test fold and writes the report from
    /// whatever upstream artifacts this config produced.
    pub fn evaluate(&self) -> Result<ExperimentReport> {
        let (model, grid) = self.ensemble()?;
        let (train, validation) = self.split()?;
        let (_, test) = self.fold()?;
        let test_set = self.dataset(&test, Role::Test)?;
        let test_rmse = evaluate(&model, &test_set, self.cfg.clip_predictions)?;

        let mut autoencoders = Vec::new();
        for side in [Side::User, Side::Movie] {
            autoencoders.extend(self.summary(side, &self.cfg.autoencoder)?);
            if let Some(c) = self.ablation_config() {
                autoencoders.extend(self.summary(side, &c)?);
            }
        }
        let sweep_path = self.layout.sweep();
        let sweep = if !self.cfg.sweep_dims.is_empty() && sweep_path.exists() {
            Some(serde_json::from_str(&fs::read_to_string(&sweep_path)?)?)
        } else {
            None
        };
        let report = ExperimentReport {
            config_hash: self.layout.experiment_hash(),
            config: self.cfg.clone(),
            data: DataSummary {
                fold: self.cfg.fold.clone(),
                n_train: train.len(),
                n_validation: validation.len(),
                n_test: test.len(),
                user_feature_columns: self.features(Side::User)?.cols(),
                movie_feature_columns: self.features(Side::Movie)?.cols(),
                dataset_columns: test_set.x.cols(),
            },
            autoencoders,
            sweep,
            grid: grid.entries,
            selected_setup: grid.selected_setup,
            ensemble: file_name(&self.layout.ensemble()),
            test_rmse,
            published_rmse: PUBLISHED_RMSE,
            baselines: ExperimentReport::baselines_for(test_rmse),
        };
        let files = [
            (self.layout.report_text(), report.to_text()),
            (self.layout.report_json(), report.to_json()),
            (self.layout.loss_vs_epoch(), report.loss_vs_epoch_csv()),
            (self.layout.loss_vs_dimension(), report.loss_vs_dimension_csv()),
            (self.layout.config_snapshot(), self.cfg.to_toml()),
        ];
        for (path, body) in files {
            write_atomic(&path, body)?;
            wrote(&path);
        }
        note(&format!("test RMSE {test_rmse}"));
        Ok(report)
    }

    pub fn run_all(&self) -> Result<ExperimentReport> {
        self.prepare()?;
        self.train_ae()?;
        self.sweep()?;
        self.embed()?;
        self.train_gbt()?;
        self.evaluate()
    }
}
