use attnae::gbt::TreeNode;
use attnae::numeric::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force booster: at every node, tries every midpoint between distinct
/// values of every feature, partitions the node's rows explicitly and sums
/// each side from scratch. Emits trees in preorder as
/// `Split(f, t)` / `Leaf(w)` tokens.
pub mod oracle {
    #[derive(Debug, Clone, PartialEq)]
    pub enum Tok {
        Split(usize, f64),
        Leaf(f64),
    }

    pub struct Params {
        pub depth: usize,
        pub lambda: f64,
        pub alpha: f64,
        pub mcw: f64,
        pub lr: f64,
        pub rounds: usize,
    }

    fn shrink(g: f64, a: f64) -> f64 {
        if g.abs() <= a {
            0.0
        } else {
            g - a * g.signum()
        }
    }

    fn score(g: f64, h: f64, p: &Params) -> f64 {
        shrink(g, p.alpha).powi(2) / (h + p.lambda)
    }

    fn sums(rows: &[usize], g: &[f64]) -> (f64, f64) {
        let mut s = 0.0;
        for &r in rows {
            s += g[r];
        }
        (s, rows.len() as f64)
    }

    fn build(x: &[Vec<f64>], g: &[f64], rows: &[usize], depth: usize, p: &Params, out: &mut Vec<Tok>) {
        let (gs, hs) = sums(rows, g);
        let mut best: Option<(f64, usize, f64)> = None;
        if depth < p.depth {
            for f in 0..x[0].len() {
                let mut vals: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for w in vals.windows(2) {
                    let mut t = w[0] + (w[1] - w[0]) / 2.0;
                    if t <= w[0] {
                        t = w[1];
                    }
                    let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] < t).collect();
                    let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] >= t).collect();
                    let (gl, hl) = sums(&left, g);
                    let (_, hr) = sums(&right, g);
                    if hl < p.mcw || hr < p.mcw {
                        continue;
                    }
                    // The right sum is taken as the complement, like the
                    // parent-minus-left form of the gain.
                    let gain = 0.5 * (score(gl, hl, p) + score(gs - gl, hs - hl, p) - score(gs, hs, p));
                    if gain > 0.0 && best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, f, t));
                    }
                }
            }
        }
        match best {
            None => out.push(Tok::Leaf(-shrink(gs, p.alpha) / (hs + p.lambda))),
            Some((_, f, t)) => {
                out.push(Tok::Split(f, t));
                let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] < t).collect();
                let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] >= t).collect();
                build(x, g, &left, depth + 1, p, out);
                build(x, g, &right, depth + 1, p, out);
            }
        }
    }

    fn eval(tree: &[Tok], row: &[f64]) -> f64 {
        fn go(tree: &[Tok], i: &mut usize, row: &[f64], live: bool) -> f64 {
            let tok = tree[*i].clone();
            *i += 1;
            match tok {
                Tok::Leaf(w) => {
                    if live {
                        w
                    } else {
                        0.0
                    }
                }
                Tok::Split(f, t) => {
                    let a = go(tree, i, row, live && row[f] < t);
                    let b = go(tree, i, row, live && row[f] >= t);
                    a + b
                }
            }
        }
        go(tree, &mut 0, row, true)
    }

    pub fn boost(x: &[Vec<f64>], y: &[f64], p: &Params) -> (f64, Vec<Vec<Tok>>) {
        let base = y.iter().sum::<f64>() / y.len() as f64;
        let mut pred = vec![base; y.len()];
        let rows: Vec<usize> = (0..y.len()).collect();
        let mut trees = Vec::new();
        for _ in 0..p.rounds {
            let g: Vec<f64> = pred.iter().zip(y).map(|(a, b)| a - b).collect();
            let mut tree = Vec::new();
            build(x, &g, &rows, 0, p, &mut tree);
            for (r, v) in pred.iter_mut().enumerate() {
                *v += p.lr * eval(&tree, &x[r]);
            }
            trees.push(tree);
        }
        (base, trees)
    }
}

pub fn preorder(nodes: &[TreeNode], i: usize, out: &mut Vec<oracle::Tok>) {
    match nodes[i] {
        TreeNode::Leaf { weight } => out.push(oracle::Tok::Leaf(weight)),
        TreeNode::Split { feature, threshold, left, right } => {
            out.push(oracle::Tok::Split(feature, threshold));
            preorder(nodes, left, out);
            preorder(nodes, right, out);
        }
    }
}

pub fn random_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = 1usize << rng.random_range(3..=6);
    let p = rng.random_range(1..=4);
    let discrete = rng.random_bool(0.5);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| if discrete { rng.random_range(0..4) as f64 } else { rng.random_range(-2.0..2.0) })
                .collect()
        })
        .collect();
    let y = (0..n).map(|_| rng.random_range(1..=5) as f64).collect();
    (x, y)
}

pub fn to_matrix(x: &[Vec<f64>]) -> Matrix {
    let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
    Matrix::from_rows(&rows)
}

/// Two-stage grid minimizer of `G·w + ½(H+λ)w² + α|w|`.
pub fn grid_leaf(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let obj = |w: f64| g * w + 0.5 * (h + lambda) * w * w + alpha * w.abs();
    let argmin = |lo: f64, step: f64, k: i64| {
        (0..=k).map(|i| lo + i as f64 * step).fold((f64::INFINITY, lo), |b, w| if obj(w) < b.0 { (obj(w), w) } else { b }).1
    };
    let span = g.abs() / (h + lambda) + 1.0;
    let coarse = argmin(-span, 1e-3, (2.0 * span / 1e-3) as i64);
    argmin(coarse - 2e-3, 1e-8, 400_000)
}

