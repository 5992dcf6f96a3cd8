use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::sweep::SweepResult;
use crate::autoencoder::EpochRecord;
use crate::dataio::Side;

/// Published test RMSEs on the u1 fold, never recomputed.
pub const BASELINES: [(&str, f64); 6] = [
    ("WMLFF", 0.928),
    ("GLocal-K", 0.888),
    ("MG-GAT", 0.890),
    ("GRAEM", 0.917),
    ("GraphRec", 0.904),
    ("FactorizedEAE", 0.920),
];

/// Published test RMSE of this model.
pub const PUBLISHED_RMSE: f64 = 0.898;

/// Range the mixing weight is reported to settle in.
pub const PUBLISHED_ALPHA_BAND: (f64, f64) = (0.5, 0.7);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub fold: String,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub user_feature_columns: usize,
    pub movie_feature_columns: usize,
    pub dataset_columns: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderSummary {
    pub side: Side,
    pub attention: bool,
    pub latent_dim: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    /// Mixing weight at the selected epoch (attention models only).
    pub alpha: Option<f64>,
    pub alpha_in_published_band: Option<bool>,
    pub checkpoint: String,
    #[serde(skip)]
    pub history: Vec<EpochRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub setup: usize,
    pub n_estimators: usize,
    pub validation_rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub method: String,
    pub rmse: f64,
    /// This run's test RMSE minus the baseline's; negative is better.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub autoencoders: Vec<AutoencoderSummary>,
    pub sweep: Option<SweepResult>,
    pub grid: Vec<GridEntry>,
    pub selected_setup: usize,
    pub ensemble: String,
    pub test_rmse: f64,
    pub published_rmse: f64,
    pub baselines: Vec<Baseline>,
}

impl ExperimentReport {
    pub fn baselines_for(test_rmse: f64) -> Vec<Baseline> {
        BASELINES
            .iter()
            .map(|&(method, rmse)| Baseline { method: method.into(), rmse, gap: test_rmse - rmse })
            .collect()
    }

    pub fn alpha_band(alpha: f64) -> bool {
        (PUBLISHED_ALPHA_BAND.0..=PUBLISHED_ALPHA_BAND.1).contains(&alpha)
    }

    pub fn autoencoder(&self, side: Side, attention: bool) -> Option<&AutoencoderSummary> {
        self.autoencoders.iter().find(|a| a.side == side && a.attention == attention && a.latent_dim == self.config.autoencoder.latent_dim)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Format(format!("report: {e}")))
    }

    /// Human-readable rendering. Numbers are printed in shortest round-trip
    /// form, so they match the JSON rendering digit for digit.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "experiment {}", self.config_hash);
        let d = &self.data;
        let _ = writeln!(o, "fold {}: {} train, {} validation, {} test ratings", d.fold, d.n_train, d.n_validation, d.n_test);
        let _ = writeln!(
            o,
            "features: {} user + {} movie one-hot columns; {} regression columns",
            d.user_feature_columns, d.movie_feature_columns, d.dataset_columns
        );
        let _ = writeln!(o, "\nautoencoders (best validation M-RMSE)");
        for a in &self.autoencoders {
            let kind = if a.attention { "attention" } else { "vanilla" };
            let _ = write!(
                o,
                "  {:<5} {:<9} d={:<3} loss {} at epoch {} of {}",
                a.side.to_string(),
                kind,
                a.latent_dim,
                a.best_validation_loss,
                a.best_epoch,
                a.epochs_run
            );
            if let (Some(alpha), Some(band)) = (a.alpha, a.alpha_in_published_band) {
                let _ = write!(
                    o,
                    "; alpha {alpha} ({} [{}, {}])",
                    if band { "inside" } else { "outside" },
                    PUBLISHED_ALPHA_BAND.0,
                    PUBLISHED_ALPHA_BAND.1
                );
            }
            o.push('\n');
        }
        if let Some(s) = &self.sweep {
            let _ = writeln!(o, "\ndimension sweep (best validation M-RMSE)");
            for p in &s.points {
                let _ = writeln!(o, "  d={:<3} user {} movie {}", p.latent_dim, p.user_loss, p.movie_loss);
            }
            let _ = writeln!(o, "  argmin: user d={}, movie d={}", s.user_argmin, s.movie_argmin);
        }
        let _ = writeln!(o, "\nboosted-tree grid (validation RMSE)");
        for g in &self.grid {
            let mark = if g.setup == self.selected_setup { " *" } else { "" };
            let _ = writeln!(o, "  setup {} n_estimators={} rmse {}{mark}", g.setup, g.n_estimators, g.validation_rmse);
        }
        let _ = writeln!(o, "\ntest RMSE {} (published {})", self.test_rmse, self.published_rmse);
        for b in &self.baselines {
            let _ = writeln!(o, "  vs {:<13} {}  gap {:+}", b.method, b.rmse, b.gap);
        }
        o
    }

    /// `side,attention,latent_dim,epoch,train_loss,validation_loss,alpha`.
    pub fn loss_vs_epoch_csv(&self) -> String {
        let mut o = String::from("side,attention,latent_dim,epoch,train_loss,validation_loss,alpha\n");
        for a in &self.autoencoders {
            for h in &a.history {
                let _ = writeln!(
                    o,
                    "{},{},{},{},{},{},{}",
                    a.side, a.attention, a.latent_dim, h.epoch, h.train_loss, h.validation_loss, h.alpha
                );
            }
        }
        o
    }

    /// `latent_dim,user_loss,movie_loss`; header only without a sweep.
    pub fn loss_vs_dimension_csv(&self) -> String {
        let mut o = String::from("latent_dim,user_loss,movie_loss\n");
        if let Some(s) = &self.sweep {
            for p in &s.points {
                let _ = writeln!(o, "{},{},{}", p.latent_dim, p.user_loss, p.movie_loss);
            }
        }
        o
    }
}
