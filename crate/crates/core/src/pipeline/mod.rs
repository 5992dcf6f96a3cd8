//! End-to-end orchestration: validation split, supervised dataset assembly,
//! boosted-tree grid, dimension sweep and reporting.

mod config;
mod dataset;
mod grid;
mod report;
mod sweep;

pub use config::{table_setups, ExperimentConfig};
pub use dataset::{build_dataset, evaluate, rmse, split_validation, Role, SupervisedDataset};
pub use grid::{hyperparameter_grid, GridOutcome};
pub use report::{
    AutoencoderSummary, Baseline, DataSummary, ExperimentReport, GridEntry, BASELINES, PUBLISHED_ALPHA_BAND,
    PUBLISHED_RMSE,
};
pub use sweep::{dimension_sweep, SweepPoint, SweepResult};
