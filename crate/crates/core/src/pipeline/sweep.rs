use serde::{Deserialize, Serialize};

use crate::dataio::Side;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub latent_dim: usize,
    pub user_loss: f64,
    pub movie_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub user_argmin: usize,
    pub movie_argmin: usize,
}

impl SweepResult {
    pub fn loss(&self, side: Side, dim: usize) -> Option<f64> {
        self.points.iter().find(|p| p.latent_dim == dim).map(|p| match side {
            Side::User => p.user_loss,
            Side::Movie => p.movie_loss,
        })
    }
}

/// Best validation loss of one autoencoder per side and latent size.
/// `train(side, dim)` returns that loss; callers decide about caching.
pub fn dimension_sweep(dims: &[usize], mut train: impl FnMut(Side, usize) -> Result<f64>) -> Result<SweepResult> {
    if dims.is_empty() {
        return Err(Error::Config("empty dimension sweep".into()));
    }
    let mut points = Vec::with_capacity(dims.len());
    for &d in dims {
        points.push(SweepPoint { latent_dim: d, user_loss: train(Side::User, d)?, movie_loss: train(Side::Movie, d)? });
    }
    let argmin = |f: fn(&SweepPoint) -> f64| {
        points.iter().fold(&points[0], |b, p| if f(p) < f(b) { p } else { b }).latent_dim
    };
    let user_argmin = argmin(|p| p.user_loss);
    let movie_argmin = argmin(|p| p.movie_loss);
    Ok(SweepResult { points, user_argmin, movie_argmin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_per_side_first_on_ties() {
        let r = dimension_sweep(&[16, 64, 256], |side, d| {
            Ok(match side {
                Side::User => [(16, 1.0), (64, 0.5), (256, 0.7)].iter().find(|x| x.0 == d).unwrap().1,
                Side::Movie => 2.0,
            })
        })
        .unwrap();
        assert_eq!((r.user_argmin, r.movie_argmin), (64, 16));
        assert_eq!(r.loss(Side::User, 256), Some(0.7));
        assert!(dimension_sweep(&[], |_, _| Ok(0.0)).is_err());
    }
}
