use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::RatingData;
use crate::error::{Error, Result};
use crate::gbt::GbtEnsemble;
use crate::numeric::Matrix;

/// Uniform random partition of the triplets into `(train', validation)`,
/// both kept in source order. The validation part has
/// `round(fraction · n)` triplets.
pub fn split_validation(train: &RatingData, fraction: f64, seed: u64) -> Result<(RatingData, RatingData)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!("validation fraction {fraction} must lie in (0, 1)")));
    }
    let n = train.len();
    let k = (fraction * n as f64).round() as usize;
    if k == 0 || k == n {
        return Err(Error::Domain(format!("validation fraction {fraction} leaves an empty side of {n} ratings")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    let mut picked = vec![false; n];
    for i in index::sample(&mut rng, n, k) {
        picked[i] = true;
    }
    let (val, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| picked[i]);
    Ok((train.select(&rest), train.select(&val)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Validation,
    Test,
}

/// One row per rating: `[E_u row, E_m row, F_u row, F_m row]` → rating.
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedDataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// `(user_id, movie_id)` of every row.
    pub provenance: Vec<(u32, u32)>,
    pub role: Role,
}

impl SupervisedDataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

pub fn build_dataset(
    ratings: &RatingData,
    user_embedding: &Matrix,
    movie_embedding: &Matrix,
    user_features: &Matrix,
    movie_features: &Matrix,
    role: Role,
) -> Result<SupervisedDataset> {
    if user_embedding.rows() != user_features.rows() || movie_embedding.rows() != movie_features.rows() {
        return Err(Error::Dimension("embedding and feature row counts differ".into()));
    }
    let blocks = [user_embedding.cols(), movie_embedding.cols(), user_features.cols(), movie_features.cols()];
    let width: usize = blocks.iter().sum();
    let mut data = Vec::with_capacity(ratings.len() * width);
    let mut y = Vec::with_capacity(ratings.len());
    let mut provenance = Vec::with_capacity(ratings.len());
    for t in ratings.triplets() {
        let u = t.user_id as usize;
        let m = t.movie_id as usize;
        if u == 0 || u > user_embedding.rows() || m == 0 || m > movie_embedding.rows() {
            return Err(Error::Index(format!("rating ({}, {}) is outside the embedding tables", t.user_id, t.movie_id)));
        }
        data.extend_from_slice(user_embedding.row(u - 1));
        data.extend_from_slice(movie_embedding.row(m - 1));
        data.extend_from_slice(user_features.row(u - 1));
        data.extend_from_slice(movie_features.row(m - 1));
        y.push(f64::from(t.rating));
        provenance.push((t.user_id, t.movie_id));
    }
    Ok(SupervisedDataset { x: Matrix::from_vec(y.len(), width, data)?, y, provenance, role })
}

/// RMSE of `predicted` against `truth`, optionally clipping predictions to
/// the 1..5 rating scale first.
pub fn rmse(predicted: &[f64], truth: &[f64], clip: bool) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Domain("cannot score an empty set".into()));
    }
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!("{} predictions for {} targets", predicted.len(), truth.len())));
    }
    let sum: f64 = predicted
        .iter()
        .zip(truth)
        .map(|(&p, &t)| {
            let p = if clip { p.clamp(1.0, 5.0) } else { p };
            (p - t) * (p - t)
        })
        .sum();
    Ok((sum / truth.len() as f64).sqrt())
}

pub fn evaluate(model: &GbtEnsemble, data: &SupervisedDataset, clip: bool) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Domain("empty evaluation set".into()));
    }
    rmse(&model.predict(&data.x)?, &data.y, clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::RatingTriplet;

    fn ratings(n: usize) -> RatingData {
        let t = (0..n)
            .map(|i| RatingTriplet { user_id: (i % 9 + 1) as u32, movie_id: (i / 9 + 1) as u32, rating: 3, timestamp: 0 })
            .collect();
        RatingData::new(t, 9, n / 9 + 1).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let data = ratings(100);
        let (a, b) = split_validation(&data, 0.1, 3).unwrap();
        assert_eq!((a.len(), b.len()), (90, 10));
        let (a2, b2) = split_validation(&data, 0.1, 3).unwrap();
        assert_eq!((a.triplets(), b.triplets()), (a2.triplets(), b2.triplets()));
        let (_, b3) = split_validation(&data, 0.1, 4).unwrap();
        assert_ne!(b.triplets(), b3.triplets());
        assert!(a.pairs().is_disjoint(&b.pairs()));
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let data = ratings(100);
        for f in [0.0, 1.0, -0.2, 0.001] {
            assert!(split_validation(&data, f, 1).is_err(), "{f}");
        }
    }

    #[test]
    fn zero_inputs_give_zero_row() {
        let data = RatingData::new(vec![RatingTriplet { user_id: 1, movie_id: 1, rating: 5, timestamp: 0 }], 1, 1).unwrap();
        let d = build_dataset(
            &data,
            &Matrix::zeros(1, 64),
            &Matrix::zeros(1, 64),
            &Matrix::zeros(1, 28),
            &Matrix::zeros(1, 23),
            Role::Train,
        )
        .unwrap();
        assert_eq!(d.x.shape(), (1, 179));
        assert!(d.x.as_slice().iter().all(|v| *v == 0.0));
        assert_eq!(d.y, vec![5.0]);
    }

    #[test]
    fn rows_follow_block_order() {
        let data = RatingData::new(vec![RatingTriplet { user_id: 2, movie_id: 1, rating: 4, timestamp: 0 }], 2, 1).unwrap();
        let eu = Matrix::from_rows(&[&[0.0], &[1.5]]);
        let em = Matrix::from_rows(&[&[2.5]]);
        let fu = Matrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let fm = Matrix::from_rows(&[&[0.0, 1.0]]);
        let d = build_dataset(&data, &eu, &em, &fu, &fm, Role::Test).unwrap();
        assert_eq!(d.x.row(0), &[1.5, 2.5, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(d.provenance, vec![(2, 1)]);
    }

    #[test]
    fn out_of_range_entity_is_an_index_error() {
        let data = RatingData::new(vec![RatingTriplet { user_id: 3, movie_id: 1, rating: 4, timestamp: 0 }], 3, 1).unwrap();
        let e = build_dataset(&data, &Matrix::zeros(2, 1), &Matrix::zeros(1, 1), &Matrix::zeros(2, 1), &Matrix::zeros(1, 1), Role::Test);
        assert!(matches!(e, Err(Error::Index(_))));
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 5.0], &[1.0, 5.0], true).unwrap(), 0.0);
        assert_eq!(rmse(&[3.0, 3.0], &[1.0, 5.0], true).unwrap(), 2.0);
        assert_eq!(rmse(&[7.0], &[5.0], true).unwrap(), 0.0);
        assert_eq!(rmse(&[7.0], &[5.0], false).unwrap(), 2.0);
        assert!(rmse(&[], &[], true).is_err());
    }
}
