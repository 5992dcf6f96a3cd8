use crate::error::{Error, Result};
use crate::gbt::{fit, GbtConfig, GbtEnsemble};

use super::dataset::{rmse, SupervisedDataset};

#[derive(Clone, Debug)]
pub struct GridOutcome {
    /// Validation RMSE of every setup, in input order.
    pub validation_rmse: Vec<f64>,
    /// Index of the lowest RMSE; the first one on ties.
    pub best: usize,
    /// The selected setup's ensemble, trained on `train`.
    pub model: GbtEnsemble,
}

/// Trains every setup on `train` and scores it on `validation`. Setups that
/// differ only in round count share one ensemble: the first `k` trees of a
/// longer run are exactly the `k`-round model.
pub fn hyperparameter_grid(
    setups: &[GbtConfig],
    train: &SupervisedDataset,
    validation: &SupervisedDataset,
    clip: bool,
) -> Result<GridOutcome> {
    if setups.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let mut models: Vec<Option<GbtEnsemble>> = vec![None; setups.len()];
    for i in 0..setups.len() {
        if models[i].is_some() {
            continue;
        }
        let family: Vec<usize> = (i..setups.len()).filter(|&j| setups[j].same_except_rounds(&setups[i])).collect();
        let longest = family.iter().map(|&j| setups[j].n_estimators).max().unwrap_or(0);
        let cfg = GbtConfig { n_estimators: longest, ..setups[i].clone() };
        let (full, _) = fit(&train.x, &train.y, &cfg, None)?;
        for j in family {
            let mut m = full.truncated(setups[j].n_estimators);
            m.config = setups[j].clone();
            models[j] = Some(m);
        }
    }
    let models: Vec<GbtEnsemble> = models.into_iter().map(|m| m.expect("every setup trained")).collect();
    let mut validation_rmse = Vec::with_capacity(setups.len());
    for m in &models {
        validation_rmse.push(rmse(&m.predict(&validation.x)?, &validation.y, clip)?);
    }
    let mut best = 0;
    for (i, v) in validation_rmse.iter().enumerate() {
        if *v < validation_rmse[best] {
            best = i;
        }
    }
    let model = models.into_iter().nth(best).expect("best index in range");
    Ok(GridOutcome { validation_rmse, best, model })
}
