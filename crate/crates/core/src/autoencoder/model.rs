//! Forward and backward passes of the feature-aware autoencoder.
//!
//! ```text
//! E  = σ(σ(R·W₁ + b₁)·W₂ + b₂)
//! Q' = rownorm(F·W_q)      K' = rownorm(F·W_k)
//! A  = softmax(Q'·K'ᵀ)     Ê = LayerNorm(α·A·E + (1−α)·E)
//! R̂ = σ(σ(Ê·D₁ + c₁)·D₂ + c₂)
//! ```
//!
//! Queries and keys both come from the one-hot feature rows, so `A` only
//! depends on which feature group each entity belongs to. Attention is
//! evaluated over groups: with `p[g][h]` the weight one entity of group `g`
//! gives one entity of group `h`, `A·E` becomes `p · (per-group sums of E)`.
//! The n×n matrix is never formed during training.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AutoencoderConfig;
use crate::dataio::{RatingData, Side};
use crate::error::{Error, Result};
use crate::numeric::{
    l2_normalize_rows, l2_normalize_rows_backward, layer_norm_rows, layer_norm_rows_backward, leaky_relu,
    leaky_relu_backward, logistic, matmul, matmul_nt, matmul_tn, LayerNormCache, Matrix, ParamTensor,
};

/// Position of each tensor in [`AutoencoderParams::tensors`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Enc1W,
    Enc1B,
    Enc2W,
    Enc2B,
    QueryW,
    KeyW,
    AlphaRaw,
    NormGain,
    NormBias,
    Dec1W,
    Dec1B,
    Dec2W,
    Dec2B,
}

impl Slot {
    pub const ALL: [Slot; 13] = [
        Slot::Enc1W,
        Slot::Enc1B,
        Slot::Enc2W,
        Slot::Enc2B,
        Slot::QueryW,
        Slot::KeyW,
        Slot::AlphaRaw,
        Slot::NormGain,
        Slot::NormBias,
        Slot::Dec1W,
        Slot::Dec1B,
        Slot::Dec2W,
        Slot::Dec2B,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Enc1W => "enc1.weight",
            Slot::Enc1B => "enc1.bias",
            Slot::Enc2W => "enc2.weight",
            Slot::Enc2B => "enc2.bias",
            Slot::QueryW => "attn.query",
            Slot::KeyW => "attn.key",
            Slot::AlphaRaw => "attn.alpha_raw",
            Slot::NormGain => "norm.gain",
            Slot::NormBias => "norm.bias",
            Slot::Dec1W => "dec1.weight",
            Slot::Dec1B => "dec1.bias",
            Slot::Dec2W => "dec2.weight",
            Slot::Dec2B => "dec2.bias",
        }
    }
}

/// All learnable tensors of one autoencoder. `n_items` is the width of a
/// rating row (movies for the user side, users for the movie side).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderParams {
    pub tensors: Vec<ParamTensor>,
}

impl std::ops::Index<Slot> for AutoencoderParams {
    type Output = Matrix;

    fn index(&self, s: Slot) -> &Matrix {
        &self.tensors[s as usize].value
    }
}

impl AutoencoderParams {
    /// Uniform `±1/√fan_in` initialization for weights and biases.
    pub fn init(n_items: usize, n_features: usize, cfg: &AutoencoderConfig, rng: &mut ChaCha8Rng) -> Self {
        let d = cfg.latent_dim;
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            let data = (0..rows * cols).map(|_| rng.random_range(-bound..bound)).collect();
            Matrix::from_vec(rows, cols, data).expect("sized above")
        };
        let mut values = vec![
            uniform(n_items, d, n_items),
            uniform(1, d, n_items),
            uniform(d, d, d),
            uniform(1, d, d),
            uniform(n_features, d, n_features),
            uniform(n_features, d, n_features),
        ];
        let alpha = cfg.alpha_init;
        values.push(Matrix::row_vector(&[(alpha / (1.0 - alpha)).ln()]));
        values.push(Matrix::filled(1, d, 1.0));
        values.push(Matrix::zeros(1, d));
        values.push(uniform(d, d, d));
        values.push(uniform(1, d, d));
        values.push(uniform(d, n_items, d));
        values.push(uniform(1, n_items, d));
        let tensors = Slot::ALL.iter().zip(values).map(|(s, v)| ParamTensor::new(s.name(), v)).collect();
        AutoencoderParams { tensors }
    }

    pub fn alpha(&self) -> f64 {
        logistic(self[Slot::AlphaRaw].as_slice()[0])
    }

    pub fn latent_dim(&self) -> usize {
        self[Slot::Enc2W].cols()
    }

    pub fn n_items(&self) -> usize {
        self[Slot::Enc1W].rows()
    }

    pub fn n_features(&self) -> usize {
        self[Slot::QueryW].rows()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.value.is_finite())
    }

    pub fn values(&self) -> Vec<Matrix> {
        self.tensors.iter().map(|t| t.value.clone()).collect()
    }

    pub fn with_values(&self, values: &[Matrix]) -> Self {
        let mut p = self.clone();
        for (t, v) in p.tensors.iter_mut().zip(values) {
            t.value = v.clone();
            t.grad = None;
        }
        p
    }

    /// Checks tensor count, names and shapes against the architecture.
    pub fn check_shapes(&self) -> Result<()> {
        if self.tensors.len() != Slot::ALL.len() {
            return Err(Error::Format(format!("expected {} tensors, found {}", Slot::ALL.len(), self.tensors.len())));
        }
        let (m, f, d) = (self.n_items(), self.n_features(), self.latent_dim());
        let expected = [(m, d), (1, d), (d, d), (1, d), (f, d), (f, d), (1, 1), (1, d), (1, d), (d, d), (1, d), (d, m), (1, m)];
        for ((s, t), shape) in Slot::ALL.iter().zip(&self.tensors).zip(expected) {
            if t.name != s.name() || t.value.shape() != shape {
                return Err(Error::Dimension(format!(
                    "tensor {} has shape {:?}, expected {} {:?}",
                    t.name,
                    t.value.shape(),
                    s.name(),
                    shape
                )));
            }
        }
        Ok(())
    }
}

/// Observed cells of one side's rating matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedRatings {
    pub rows: usize,
    pub cols: usize,
    /// (row, col, rating) in source order.
    pub entries: Vec<(usize, usize, f64)>,
}

impl MaskedRatings {
    pub fn from_ratings(data: &RatingData, side: Side) -> Self {
        let (rows, cols) = match side {
            Side::User => (data.n_users(), data.n_movies()),
            Side::Movie => (data.n_movies(), data.n_users()),
        };
        let entries = data
            .triplets()
            .iter()
            .map(|t| {
                let (u, m) = (t.user_id as usize - 1, t.movie_id as usize - 1);
                let (r, c) = if side == Side::User { (u, m) } else { (m, u) };
                (r, c, f64::from(t.rating))
            })
            .collect();
        MaskedRatings { rows, cols, entries }
    }

    /// Dense view with unobserved cells set to 0.
    pub fn dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }
}

/// Root mean squared error over observed cells only; `predictions` is read at
/// the observed positions and nowhere else.
pub fn masked_rmse(truth: &MaskedRatings, predictions: &Matrix) -> Result<f64> {
    if predictions.shape() != (truth.rows, truth.cols) {
        return Err(Error::Dimension(format!(
            "predictions {:?} vs ratings {}x{}",
            predictions.shape(),
            truth.rows,
            truth.cols
        )));
    }
    let values: Vec<f64> = truth.entries.iter().map(|&(r, c, _)| predictions[(r, c)]).collect();
    masked_rmse_at(truth, &values)
}

/// Same as [`masked_rmse`] with predictions already gathered per entry.
pub fn masked_rmse_at(truth: &MaskedRatings, predicted: &[f64]) -> Result<f64> {
    if truth.entries.is_empty() {
        return Err(Error::Domain("masked RMSE over zero observed entries".into()));
    }
    debug_assert_eq!(predicted.len(), truth.entries.len());
    let sse: f64 = truth.entries.iter().zip(predicted).map(|(&(_, _, y), &p)| (y - p) * (y - p)).sum();
    Ok((sse / truth.entries.len() as f64).sqrt())
}

/// Entities sharing an identical feature row.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGroups {
    pub group_of: Vec<usize>,
    /// First entity of each group, in order of first appearance.
    pub representatives: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl FeatureGroups {
    pub fn new(features: &Matrix) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut group_of = Vec::with_capacity(features.rows());
        let mut representatives = Vec::new();
        let mut sizes = Vec::new();
        for (i, row) in features.iter_rows().enumerate() {
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            let g = *index.entry(key).or_insert_with(|| {
                representatives.push(i);
                sizes.push(0);
                representatives.len() - 1
            });
            sizes[g] += 1;
            group_of.push(g);
        }
        FeatureGroups { group_of, representatives, sizes }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Per-group sums of the rows of `x`, accumulated in entity order.
    fn sum_rows(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.len(), x.cols());
        for (i, &g) in self.group_of.iter().enumerate() {
            for (o, v) in out.row_mut(g).iter_mut().zip(x.row(i)) {
                *o += v;
            }
        }
        out
    }

    /// Row `i` of the result is row `group_of[i]` of `x`.
    fn broadcast(&self, x: &Matrix) -> Matrix {
        x.gather_rows(&self.group_of)
    }
}

/// Inputs that stay fixed across training steps.
#[derive(Clone, Debug)]
pub struct ModelInputs {
    /// Rating rows with unknown cells as 0.
    pub ratings: Matrix,
    pub features: Matrix,
    pub groups: FeatureGroups,
}

impl ModelInputs {
    pub fn new(ratings: Matrix, features: Matrix) -> Result<Self> {
        if ratings.rows() != features.rows() {
            return Err(Error::Dimension(format!(
                "{} rating rows but {} feature rows",
                ratings.rows(),
                features.rows()
            )));
        }
        let groups = FeatureGroups::new(&features);
        Ok(ModelInputs { ratings, features, groups })
    }
}

struct Dense {
    pre: Matrix,
    out: Matrix,
}

fn dense_layer(x: &Matrix, w: &Matrix, b: &Matrix, slope: f64) -> Result<Dense> {
    let mut pre = matmul(x, w)?;
    pre.add_row_broadcast(b)?;
    let out = leaky_relu(&pre, slope);
    Ok(Dense { pre, out })
}

#[derive(Clone, Debug)]
pub struct AttentionCache {
    group_features: Matrix,
    query_pre: Matrix,
    query: Matrix,
    key_pre: Matrix,
    key: Matrix,
    /// `weights[g][h]`: attention one entity of group g pays one entity of group h.
    pub weights: Matrix,
    value_sums: Matrix,
    /// A·E per group.
    context: Matrix,
    alpha: f64,
    norm: LayerNormCache,
}

impl AttentionCache {
    /// Expands the group weights into the full n×n attention matrix.
    pub fn attention_matrix(&self, groups: &FeatureGroups) -> Matrix {
        let n = groups.group_of.len();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            let w = self.weights.row(groups.group_of[i]);
            for (j, cell) in a.row_mut(i).iter_mut().enumerate() {
                *cell = w[groups.group_of[j]];
            }
        }
        a
    }
}

pub struct EncodeCache {
    first: Dense,
    second: Dense,
}

/// Two-layer encoder from rating rows to latent codes.
pub fn encode(ratings: &Matrix, params: &AutoencoderParams, slope: f64) -> Result<Matrix> {
    Ok(encode_cached(ratings, params, slope)?.second.out)
}

fn encode_cached(ratings: &Matrix, params: &AutoencoderParams, slope: f64) -> Result<EncodeCache> {
    let first = dense_layer(ratings, &params[Slot::Enc1W], &params[Slot::Enc1B], slope)?;
    let second = dense_layer(&first.out, &params[Slot::Enc2W], &params[Slot::Enc2B], slope)?;
    Ok(EncodeCache { first, second })
}

/// Blends latent codes with feature-driven cross-attention and layer-normalizes.
/// With attention disabled the codes pass through untouched.
pub fn attend(
    latent: &Matrix,
    features: &Matrix,
    groups: &FeatureGroups,
    params: &AutoencoderParams,
    cfg: &AutoencoderConfig,
) -> Result<Matrix> {
    Ok(attend_cached(latent, features, groups, params, cfg)?.0)
}

fn attend_cached(
    latent: &Matrix,
    features: &Matrix,
    groups: &FeatureGroups,
    params: &AutoencoderParams,
    cfg: &AutoencoderConfig,
) -> Result<(Matrix, Option<AttentionCache>)> {
    if !cfg.attention_enabled {
        return Ok((latent.clone(), None));
    }
    if features.rows() != latent.rows() || groups.group_of.len() != latent.rows() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} latent rows",
            features.rows(),
            latent.rows()
        )));
    }
    let group_features = features.gather_rows(&groups.representatives);
    let query_pre = matmul(&group_features, &params[Slot::QueryW])?;
    let key_pre = matmul(&group_features, &params[Slot::KeyW])?;
    let query = l2_normalize_rows(&query_pre);
    let key = l2_normalize_rows(&key_pre);
    let scores = matmul_nt(&query, &key)?;

    let mut weights = scores;
    for g in 0..groups.len() {
        let row = weights.row_mut(g);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (v, &size) in row.iter_mut().zip(&groups.sizes) {
            *v = (*v - max).exp();
            total += size as f64 * *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }

    let value_sums = groups.sum_rows(latent);
    let context = matmul(&weights, &value_sums)?;
    let alpha = params.alpha();
    let attended = groups.broadcast(&context);
    let mix = attended.zip_map(latent, |c, e| alpha * c + (1.0 - alpha) * e)?;
    let norm = layer_norm_rows(&mix, cfg.layer_norm_eps);
    let mut out = norm.normalized.clone();
    if cfg.layernorm_affine {
        let gain = &params[Slot::NormGain];
        for i in 0..out.rows() {
            for (v, g) in out.row_mut(i).iter_mut().zip(gain.as_slice()) {
                *v *= g;
            }
        }
        out.add_row_broadcast(&params[Slot::NormBias])?;
    }
    let cache = AttentionCache {
        group_features,
        query_pre,
        query,
        key_pre,
        key,
        weights,
        value_sums,
        context,
        alpha,
        norm,
    };
    Ok((out, Some(cache)))
}

pub struct DecodeCache {
    first: Dense,
}

/// Two-layer decoder back to full rating rows.
pub fn decode(embedding: &Matrix, params: &AutoencoderParams, slope: f64) -> Result<Matrix> {
    let first = dense_layer(embedding, &params[Slot::Dec1W], &params[Slot::Dec1B], slope)?;
    Ok(dense_layer(&first.out, &params[Slot::Dec2W], &params[Slot::Dec2B], slope)?.out)
}

/// Hidden decoder layer plus the output pre-activations at `cells` only.
fn decode_at(
    embedding: &Matrix,
    params: &AutoencoderParams,
    slope: f64,
    cells: &[&[(usize, usize, f64)]],
) -> Result<(DecodeCache, Vec<Vec<f64>>)> {
    let first = dense_layer(embedding, &params[Slot::Dec1W], &params[Slot::Dec1B], slope)?;
    let out_t = params[Slot::Dec2W].transpose();
    let bias = params[Slot::Dec2B].as_slice();
    let pre = cells
        .iter()
        .map(|set| {
            set.iter()
                .map(|&(r, c, _)| {
                    let mut acc = 0.0;
                    for (h, w) in first.out.row(r).iter().zip(out_t.row(c)) {
                        acc += h * w;
                    }
                    acc + bias[c]
                })
                .collect()
        })
        .collect();
    Ok((DecodeCache { first }, pre))
}

/// Everything a training step needs from one forward pass.
pub struct ForwardPass {
    encode: EncodeCache,
    pub embedding: Matrix,
    pub attention: Option<AttentionCache>,
    decode: DecodeCache,
    train_pre: Vec<f64>,
    pub train_predictions: Vec<f64>,
    pub eval_predictions: Vec<f64>,
}

impl ForwardPass {
    pub fn latent(&self) -> &Matrix {
        &self.encode.second.out
    }
}

/// Runs the model and evaluates the decoder at the training cells and,
/// optionally, at a second set of evaluation cells.
pub fn forward(
    inputs: &ModelInputs,
    params: &AutoencoderParams,
    cfg: &AutoencoderConfig,
    train: &MaskedRatings,
    eval: Option<&MaskedRatings>,
) -> Result<ForwardPass> {
    let slope = cfg.leaky_slope;
    let encode = encode_cached(&inputs.ratings, params, slope)?;
    let (embedding, attention) = attend_cached(&encode.second.out, &inputs.features, &inputs.groups, params, cfg)?;
    let empty = [];
    let eval_cells = eval.map_or(&empty[..], |e| &e.entries[..]);
    let (decode, mut pre) = decode_at(&embedding, params, slope, &[&train.entries, eval_cells])?;
    let eval_pre = pre.pop().expect("two cell sets");
    let train_pre = pre.pop().expect("two cell sets");
    let act = |v: f64| if v > 0.0 { v } else { slope * v };
    Ok(ForwardPass {
        train_predictions: train_pre.iter().map(|&v| act(v)).collect(),
        eval_predictions: eval_pre.iter().map(|&v| act(v)).collect(),
        train_pre,
        encode,
        embedding,
        attention,
        decode,
    })
}

/// Masked RMSE on the training cells and its gradient for every tensor, in
/// [`Slot`] order.
pub fn backward(
    inputs: &ModelInputs,
    params: &AutoencoderParams,
    cfg: &AutoencoderConfig,
    train: &MaskedRatings,
    pass: &ForwardPass,
) -> Result<(f64, Vec<Matrix>)> {
    let slope = cfg.leaky_slope;
    let loss = masked_rmse_at(train, &pass.train_predictions)?;
    let mut grads: Vec<Matrix> = params.tensors.iter().map(|t| Matrix::zeros(t.value.rows(), t.value.cols())).collect();
    let n_obs = train.entries.len() as f64;
    let d = params.latent_dim();

    // Output layer, sparse over the observed cells.
    let hidden = &pass.decode.first.out;
    let out_w_t = params[Slot::Dec2W].transpose();
    let mut d_out_w_t = Matrix::zeros(out_w_t.rows(), d);
    let mut d_out_b = vec![0.0; out_w_t.rows()];
    let mut d_hidden = Matrix::zeros(hidden.rows(), d);
    if loss > 0.0 {
        for (k, &(r, c, y)) in train.entries.iter().enumerate() {
            let dpred = (pass.train_predictions[k] - y) / (n_obs * loss);
            let dpre = if pass.train_pre[k] > 0.0 { dpred } else { slope * dpred };
            if dpre == 0.0 {
                continue;
            }
            d_out_b[c] += dpre;
            let h = hidden.row(r);
            for (g, &hv) in d_out_w_t.row_mut(c).iter_mut().zip(h) {
                *g += dpre * hv;
            }
            let w = out_w_t.row(c);
            for (g, &wv) in d_hidden.row_mut(r).iter_mut().zip(w) {
                *g += dpre * wv;
            }
        }
    }
    grads[Slot::Dec2W as usize] = d_out_w_t.transpose();
    grads[Slot::Dec2B as usize] = Matrix::row_vector(&d_out_b);

    let d_pre = leaky_relu_backward(&pass.decode.first.pre, &d_hidden, slope)?;
    grads[Slot::Dec1W as usize] = matmul_tn(&pass.embedding, &d_pre)?;
    grads[Slot::Dec1B as usize] = d_pre.column_sums();
    let d_embedding = matmul_nt(&d_pre, &params[Slot::Dec1W])?;

    let d_latent = match &pass.attention {
        None => d_embedding,
        Some(att) => attention_backward(inputs, params, cfg, pass.latent(), att, &d_embedding, &mut grads)?,
    };

    let enc = &pass.encode;
    let d_pre2 = leaky_relu_backward(&enc.second.pre, &d_latent, slope)?;
    grads[Slot::Enc2W as usize] = matmul_tn(&enc.first.out, &d_pre2)?;
    grads[Slot::Enc2B as usize] = d_pre2.column_sums();
    let d_h1 = matmul_nt(&d_pre2, &params[Slot::Enc2W])?;
    let d_pre1 = leaky_relu_backward(&enc.first.pre, &d_h1, slope)?;
    grads[Slot::Enc1W as usize] = matmul_tn(&inputs.ratings, &d_pre1)?;
    grads[Slot::Enc1B as usize] = d_pre1.column_sums();
    Ok((loss, grads))
}

/// Returns the gradient with respect to the latent codes and fills the
/// attention-branch gradients.
fn attention_backward(
    inputs: &ModelInputs,
    params: &AutoencoderParams,
    cfg: &AutoencoderConfig,
    latent: &Matrix,
    att: &AttentionCache,
    d_out: &Matrix,
    grads: &mut [Matrix],
) -> Result<Matrix> {
    let groups = &inputs.groups;
    let d_normalized = if cfg.layernorm_affine {
        let xhat = &att.norm.normalized;
        let mut d_gain = vec![0.0; xhat.cols()];
        for i in 0..xhat.rows() {
            for ((g, x), dy) in d_gain.iter_mut().zip(xhat.row(i)).zip(d_out.row(i)) {
                *g += x * dy;
            }
        }
        grads[Slot::NormGain as usize] = Matrix::row_vector(&d_gain);
        grads[Slot::NormBias as usize] = d_out.column_sums();
        let gain = params[Slot::NormGain].as_slice();
        let mut dn = d_out.clone();
        for i in 0..dn.rows() {
            for (v, g) in dn.row_mut(i).iter_mut().zip(gain) {
                *v *= g;
            }
        }
        dn
    } else {
        d_out.clone()
    };
    let d_mix = layer_norm_rows_backward(&att.norm, &d_normalized)?;

    // α·C + (1−α)·E with C broadcast from the group contexts.
    let alpha = att.alpha;
    let mut d_alpha = 0.0;
    for i in 0..latent.rows() {
        let c = att.context.row(groups.group_of[i]);
        for ((dm, cv), ev) in d_mix.row(i).iter().zip(c).zip(latent.row(i)) {
            d_alpha += dm * (cv - ev);
        }
    }
    grads[Slot::AlphaRaw as usize] = Matrix::row_vector(&[d_alpha * alpha * (1.0 - alpha)]);
    let mut d_latent = d_mix.scale(1.0 - alpha);
    let d_context = groups.sum_rows(&d_mix.scale(alpha));

    // Context = weights · value_sums.
    let d_value_sums = matmul_tn(&att.weights, &d_context)?;
    for (i, &g) in groups.group_of.iter().enumerate() {
        for (dl, dv) in d_latent.row_mut(i).iter_mut().zip(d_value_sums.row(g)) {
            *dl += dv;
        }
    }

    // Softmax over all n entities, expressed per group pair.
    let t = matmul_nt(&d_context, &att.value_sums)?;
    let mut d_scores = att.weights.clone();
    for g in 0..groups.len() {
        let u: f64 = d_context.row(g).iter().zip(att.context.row(g)).map(|(a, b)| a * b).sum();
        for ((s, &tv), &size) in d_scores.row_mut(g).iter_mut().zip(t.row(g)).zip(&groups.sizes) {
            *s *= tv - size as f64 * u;
        }
    }
    let d_query = matmul(&d_scores, &att.key)?;
    let d_key = matmul_tn(&d_scores, &att.query)?;
    let d_query_pre = l2_normalize_rows_backward(&att.query_pre, &att.query, &d_query)?;
    let d_key_pre = l2_normalize_rows_backward(&att.key_pre, &att.key, &d_key)?;
    grads[Slot::QueryW as usize] = matmul_tn(&att.group_features, &d_query_pre)?;
    grads[Slot::KeyW as usize] = matmul_tn(&att.group_features, &d_key_pre)?;
    Ok(d_latent)
}

/// Full reconstruction `R̂` for every cell.
pub fn reconstruct(inputs: &ModelInputs, params: &AutoencoderParams, cfg: &AutoencoderConfig) -> Result<Matrix> {
    let latent = encode(&inputs.ratings, params, cfg.leaky_slope)?;
    let embedding = attend(&latent, &inputs.features, &inputs.groups, params, cfg)?;
    decode(&embedding, params, cfg.leaky_slope)
}
