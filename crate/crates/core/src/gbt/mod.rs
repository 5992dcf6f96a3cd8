//! Second-order gradient boosting of regression trees under squared error,
//! with L1/L2-regularized leaf weights, per-tree row and column subsampling,
//! and exact greedy split search.

mod config;
mod ensemble;
mod format;
mod split;
mod tree;

pub use config::GbtConfig;
pub use ensemble::{fit, predict, FitTrace, GbtEnsemble};
pub use format::{from_text, to_text};
pub use split::{best_split, gain, leaf_weight, soft_threshold, split_score, SplitCandidate};
pub use tree::{Tree, TreeNode};
