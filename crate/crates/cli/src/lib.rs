//! Command-line driver: resolves the experiment config, then runs one stage
//! or the whole chain, caching every stage's artifacts under `--out`.

mod artifacts;
mod stages;

use std::path::PathBuf;

use anyhow::{Context, Result};
use attnae::autoencoder::EmbedSource;
use attnae::pipeline::ExperimentConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use artifacts::Layout;
pub use stages::Session;

#[derive(Debug, Parser)]
#[command(name = "attnae", version, about = "Attention-autoencoder embeddings + boosted trees for MovieLens 100K")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode side features and write the train/validation split.
    Prepare,
    /// Train the user- and movie-side autoencoders.
    TrainAe,
    /// Train autoencoders over the configured latent sizes.
    Sweep,
    /// Export embeddings from the trained autoencoders.
    Embed,
    /// Run the boosted-tree grid and keep the selected ensemble.
    TrainGbt,
    /// Score the ensemble on the test fold and write the report.
    Evaluate,
    /// Every stage in order, reusing cached artifacts.
    RunAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fold {
    U1,
    U2,
    U3,
    U4,
    U5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Pre,
    Post,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (TOML); built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// MovieLens 100K directory.
    #[arg(long, global = true, default_value = "data/ml-100k")]
    pub data: PathBuf,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "runs/default")]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config's fold.
    #[arg(long, global = true, value_enum)]
    pub fold: Option<Fold>,
    /// Train the autoencoders without the attention branch.
    #[arg(long, global = true)]
    pub no_attention: bool,
    /// Embeddings handed to the boosted trees: before or after attention.
    #[arg(long, global = true, value_enum)]
    pub embed_source: Option<Source>,
    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

impl CommonArgs {
    pub fn resolve_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(f) = self.fold {
            cfg.fold = format!("{f:?}").to_lowercase();
        }
        if self.no_attention {
            cfg.autoencoder.attention_enabled = false;
        }
        if let Some(s) = self.embed_source {
            cfg.embed_source = match s {
                Source::Pre => EmbedSource::PreAttention,
                Source::Post => EmbedSource::PostAttention,
            };
        }
        let cfg = cfg.resolved();
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    if cli.common.quiet {
        attnae::progress::set_enabled(false);
    }
    let cfg = cli.common.resolve_config()?;
    let session = Session::new(cfg, &cli.common.data, &cli.common.out)?;
    match cli.command {
        Command::Prepare => session.prepare(),
        Command::TrainAe => session.train_ae(),
        Command::Sweep => session.sweep().map(|_| ()),
        Command::Embed => session.embed(),
        Command::TrainGbt => session.train_gbt(),
        Command::Evaluate => session.evaluate().map(|_| ()),
        Command::RunAll => session.run_all().map(|_| ()),
    }
}
