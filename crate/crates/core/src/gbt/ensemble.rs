use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::GbtConfig;
use super::split::{leaf_weight, Scan, SplitParams};
use super::tree::{Tree, TreeNode};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Predictions follow `base_score + learning_rate · Σ_t f_t(x)`, accumulated
/// one tree at a time so that the first `k` trees of an ensemble reproduce
/// the round-`k` predictions of training bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct GbtEnsemble {
    pub config: GbtConfig,
    pub n_features: usize,
    pub base_score: f64,
    pub trees: Vec<Tree>,
}

/// Root mean squared error after each boosting round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitTrace {
    pub train_rmse: Vec<f64>,
    pub eval_rmse: Vec<f64>,
}

const PARALLEL_ROWS: usize = 4096;

impl GbtEnsemble {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let lr = self.config.learning_rate;
        self.trees.iter().fold(self.base_score, |p, t| p + lr * t.predict_row(row))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(Error::Dimension(format!(
                "ensemble expects {} features, got {}",
                self.n_features,
                x.cols()
            )));
        }
        let rows: Vec<&[f64]> = x.iter_rows().collect();
        Ok(if rows.len() >= PARALLEL_ROWS {
            rows.par_iter().map(|r| self.predict_row(r)).collect()
        } else {
            rows.iter().map(|r| self.predict_row(r)).collect()
        })
    }

    /// The ensemble made of the first `n` trees.
    pub fn truncated(&self, n: usize) -> GbtEnsemble {
        let mut out = self.clone();
        out.trees.truncate(n);
        out.config.n_estimators = out.trees.len();
        out
    }
}

pub fn predict(model: &GbtEnsemble, x: &Matrix) -> Result<Vec<f64>> {
    model.predict(x)
}

fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let s: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    (s / y.len() as f64).sqrt()
}

/// Feature columns in row order, plus each sorted ascending with ties in
/// row order.
struct Presorted {
    columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

impl Presorted {
    fn new(x: &Matrix) -> Self {
        let columns: Vec<Vec<f64>> = (0..x.cols()).map(|f| (0..x.rows()).map(|r| x[(r, f)]).collect()).collect();
        let sorted: Vec<(Vec<u32>, Vec<f64>)> = columns
            .par_iter()
            .map(|col| {
                let mut order: Vec<u32> = (0..col.len() as u32).collect();
                order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                let values = order.iter().map(|&r| col[r as usize]).collect();
                (order, values)
            })
            .collect();
        let (order, values) = sorted.into_iter().unzip();
        Presorted { columns, order, values }
    }
}

/// Open node of each row at the current level; `CLOSED` for rows outside
/// the sample or already in a finished leaf.
const CLOSED: u32 = u32::MAX;

struct OpenNode {
    arena: usize,
    grad: f64,
    hess: f64,
}

#[derive(Clone, Copy, Debug)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn sample_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, fraction: f64) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let mut picked = index::sample(rng, n, sample_count(fraction, n)).into_vec();
    picked.sort_unstable();
    picked
}

/// Squared error has unit hessians, so every hessian sum is a row count.
/// On return `node_of` holds the leaf weight index of every sampled row in
/// the returned weights vector.
fn grow_tree(sorted: &Presorted, grad: &[f64], node_of: &mut [u32], features: &[usize], cfg: &GbtConfig) -> (Tree, Vec<f64>) {
    let params = SplitParams {
        reg_lambda: cfg.reg_lambda,
        reg_alpha: cfg.reg_alpha,
        min_child_weight: cfg.min_child_weight,
    };
    let leaf = |g: f64, h: f64| TreeNode::Leaf { weight: leaf_weight(g, h, cfg.reg_lambda, cfg.reg_alpha) };

    let (mut g0, mut h0) = (0.0, 0.0);
    for (r, &nd) in node_of.iter().enumerate() {
        if nd != CLOSED {
            g0 += grad[r];
            h0 += 1.0;
        }
    }
    // Gradients laid out in each feature's sorted order, so the level scans
    // only look up the small node array at random.
    let sorted_grad: Vec<Vec<f64>> = features
        .par_iter()
        .map(|&f| sorted.order[f].iter().map(|&r| grad[r as usize]).collect())
        .collect();
    let mut nodes = vec![leaf(g0, h0)];
    let mut open = vec![OpenNode { arena: 0, grad: g0, hess: h0 }];
    // Rows leave the open set at a leaf; remember which one.
    let mut leaf_of = vec![CLOSED; node_of.len()];

    for _depth in 0..cfg.max_depth {
        if open.is_empty() {
            break;
        }
        let totals: Vec<(f64, f64)> = open.iter().map(|o| (o.grad, o.hess)).collect();
        let node_ro: &[u32] = node_of;
        let per_feature: Vec<Vec<Option<(f64, f64)>>> = features
            .par_iter()
            .zip(&sorted_grad)
            .map(|(&f, gs)| {
                let mut scans = vec![Scan::new(); open.len()];
                let mut best: Vec<Option<(f64, f64)>> = vec![None; open.len()];
                for ((&r, &v), &g) in sorted.order[f].iter().zip(&sorted.values[f]).zip(gs) {
                    let nd = node_ro[r as usize];
                    if nd == CLOSED {
                        continue;
                    }
                    let nd = nd as usize;
                    if let Some((gain, thr)) = scans[nd].push(v, g, 1.0, totals[nd], params) {
                        if gain > 0.0 && best[nd].is_none_or(|(b, _)| gain > b) {
                            best[nd] = Some((gain, thr));
                        }
                    }
                }
                best
            })
            .collect();

        let mut chosen: Vec<Option<Best>> = vec![None; open.len()];
        for (k, &f) in features.iter().enumerate() {
            for (nd, cand) in per_feature[k].iter().enumerate() {
                if let Some((gain, threshold)) = *cand {
                    if chosen[nd].is_none_or(|b| gain > b.gain) {
                        chosen[nd] = Some(Best { gain, feature: f, threshold });
                    }
                }
            }
        }

        // Children get consecutive level-local ids in parent order.
        let mut child_ids = vec![(CLOSED, CLOSED); open.len()];
        let mut next = Vec::new();
        for (nd, best) in chosen.iter().enumerate() {
            if let Some(b) = best {
                let left = nodes.len();
                nodes.push(TreeNode::Leaf { weight: 0.0 });
                nodes.push(TreeNode::Leaf { weight: 0.0 });
                nodes[open[nd].arena] = TreeNode::Split { feature: b.feature, threshold: b.threshold, left, right: left + 1 };
                child_ids[nd] = (next.len() as u32, next.len() as u32 + 1);
                next.push(OpenNode { arena: left, grad: 0.0, hess: 0.0 });
                next.push(OpenNode { arena: left + 1, grad: 0.0, hess: 0.0 });
            }
        }
        for (r, nd) in node_of.iter_mut().enumerate() {
            if *nd == CLOSED {
                continue;
            }
            *nd = match chosen[*nd as usize] {
                None => {
                    leaf_of[r] = open[*nd as usize].arena as u32;
                    CLOSED
                }
                Some(b) => {
                    let (l, rt) = child_ids[*nd as usize];
                    let id = if sorted.columns[b.feature][r] < b.threshold { l } else { rt };
                    let child = &mut next[id as usize];
                    child.grad += grad[r];
                    child.hess += 1.0;
                    id
                }
            };
        }
        for o in &next {
            nodes[o.arena] = leaf(o.grad, o.hess);
        }
        open = next;
    }
    for (r, nd) in node_of.iter_mut().enumerate() {
        if *nd != CLOSED {
            leaf_of[r] = open[*nd as usize].arena as u32;
        }
    }
    node_of.copy_from_slice(&leaf_of);
    let weights = nodes
        .iter()
        .map(|n| match n {
            TreeNode::Leaf { weight } => *weight,
            TreeNode::Split { .. } => f64::NAN,
        })
        .collect();
    (Tree::from_nodes(nodes).expect("grown trees are well formed").into_preorder(), weights)
}

/// Fits an ensemble on `(x, y)`. When `eval` is given, its RMSE after every
/// round is recorded as well.
pub fn fit(x: &Matrix, y: &[f64], cfg: &GbtConfig, eval: Option<(&Matrix, &[f64])>) -> Result<(GbtEnsemble, FitTrace)> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(Error::Dimension(format!("{} rows but {} targets", x.rows(), y.len())));
    }
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Dimension("empty training matrix".into()));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite training data".into()));
    }
    if let Some((ex, ey)) = eval {
        if ex.cols() != x.cols() || ex.rows() != ey.len() {
            return Err(Error::Dimension("evaluation set shape mismatch".into()));
        }
    }
    let n = x.rows();
    let base_score = cfg.base_score.unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let sorted = Presorted::new(x);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pred = vec![base_score; n];
    let mut eval_pred = eval.map(|(ex, _)| vec![base_score; ex.rows()]);
    let mut node_of = vec![CLOSED; n];
    let mut grad = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_estimators);
    let mut trace = FitTrace::default();
    let lr = cfg.learning_rate;

    for _round in 0..cfg.n_estimators {
        let rows = sample_sorted(&mut rng, n, cfg.subsample);
        let features = sample_sorted(&mut rng, x.cols(), cfg.colsample_bytree);
        node_of.fill(CLOSED);
        for &r in &rows {
            node_of[r] = 0;
        }
        for ((g, p), t) in grad.iter_mut().zip(&pred).zip(y) {
            *g = p - t;
        }
        let (tree, weights) = grow_tree(&sorted, &grad, &mut node_of, &features, cfg);
        for (r, (p, row)) in pred.iter_mut().zip(x.iter_rows()).enumerate() {
            let w = match node_of[r] {
                CLOSED => tree.predict_row(row),
                leaf => weights[leaf as usize],
            };
            *p += lr * w;
        }
        trace.train_rmse.push(rmse(&pred, y));
        if let (Some(ep), Some((ex, ey))) = (eval_pred.as_mut(), eval) {
            for (p, row) in ep.iter_mut().zip(ex.iter_rows()) {
                *p += lr * tree.predict_row(row);
            }
            trace.eval_rmse.push(rmse(ep, ey));
        }
        trees.push(tree);
    }
    let model = GbtEnsemble { config: cfg.clone(), n_features: x.cols(), base_score, trees };
    Ok((model, trace))
}
