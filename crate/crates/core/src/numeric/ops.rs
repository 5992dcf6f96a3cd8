use super::Matrix;
use crate::error::Result;

/// Floor on the row norm in [`l2_normalize_rows`].
pub const L2_NORM_EPS: f64 = 1e-12;

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn leaky_relu(x: &Matrix, slope: f64) -> Matrix {
    x.map(|v| if v > 0.0 { v } else { slope * v })
}

/// `pre` is the activation input. The subgradient at 0 is `slope`.
pub fn leaky_relu_backward(pre: &Matrix, grad_out: &Matrix, slope: f64) -> Result<Matrix> {
    pre.zip_map(grad_out, |v, g| if v > 0.0 { g } else { slope * g })
}

pub fn softmax_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    let cols = x.cols();
    for i in 0..x.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
        debug_assert_eq!(row.len(), cols);
    }
    out
}

/// `out` is the softmax output.
pub fn softmax_rows_backward(out: &Matrix, grad_out: &Matrix) -> Result<Matrix> {
    let mut grad = out.zip_map(grad_out, |_, g| g)?;
    for i in 0..out.rows() {
        let y = out.row(i);
        let dot: f64 = y.iter().zip(grad.row(i)).map(|(a, b)| a * b).sum();
        for (g, &yj) in grad.row_mut(i).iter_mut().zip(y) {
            *g = yj * (*g - dot);
        }
    }
    Ok(grad)
}

/// Per-row normalized values and reciprocal standard deviations.
#[derive(Clone, Debug)]
pub struct LayerNormCache {
    pub normalized: Matrix,
    pub inv_std: Vec<f64>,
}

/// Zero mean, unit population variance per row; no gain or bias.
pub fn layer_norm_rows(x: &Matrix, eps: f64) -> LayerNormCache {
    let cols = x.cols() as f64;
    let mut normalized = x.clone();
    let mut inv_std = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = normalized.row_mut(i);
        let mean = row.iter().sum::<f64>() / cols;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cols;
        let s = 1.0 / (var + eps).sqrt();
        for v in row.iter_mut() {
            *v = (*v - mean) * s;
        }
        inv_std.push(s);
    }
    LayerNormCache { normalized, inv_std }
}

pub fn layer_norm_rows_backward(cache: &LayerNormCache, grad_out: &Matrix) -> Result<Matrix> {
    let xhat = &cache.normalized;
    let mut grad = xhat.zip_map(grad_out, |_, g| g)?;
    let n = xhat.cols() as f64;
    for i in 0..xhat.rows() {
        let xr = xhat.row(i);
        let g = grad.row_mut(i);
        let sum_g: f64 = g.iter().sum();
        let sum_gx: f64 = g.iter().zip(xr).map(|(a, b)| a * b).sum();
        let s = cache.inv_std[i];
        for (gj, &xj) in g.iter_mut().zip(xr) {
            *gj = s / n * (n * *gj - sum_g - xj * sum_gx);
        }
    }
    Ok(grad)
}

fn row_norm(row: &[f64]) -> f64 {
    row.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Divides each row by `max(‖row‖₂, L2_NORM_EPS)`.
pub fn l2_normalize_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for i in 0..x.rows() {
        let row = out.row_mut(i);
        let d = row_norm(row).max(L2_NORM_EPS);
        for v in row.iter_mut() {
            *v /= d;
        }
    }
    out
}

/// `x` is the input, `out` the normalized rows.
pub fn l2_normalize_rows_backward(x: &Matrix, out: &Matrix, grad_out: &Matrix) -> Result<Matrix> {
    let mut grad = out.zip_map(grad_out, |_, g| g)?;
    for i in 0..x.rows() {
        let norm = row_norm(x.row(i));
        let g = grad.row_mut(i);
        if norm > L2_NORM_EPS {
            let y = out.row(i);
            let dot: f64 = y.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
            for (gj, &yj) in g.iter_mut().zip(y) {
                *gj = (*gj - yj * dot) / norm;
            }
        } else {
            for gj in g.iter_mut() {
                *gj /= L2_NORM_EPS;
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::grad_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    /// Scalar probe `Σ w ⊙ op(x)` with fixed random weights `w`.
    fn probe(op: impl Fn(&Matrix) -> Matrix, w: &Matrix, x: &Matrix) -> f64 {
        op(x).as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn leaky_relu_values() {
        let x = Matrix::row_vector(&[2.0, -3.0, -1.0]);
        let y = leaky_relu(&x, 0.01);
        assert_eq!(y.as_slice()[0], 2.0);
        assert!((y.as_slice()[1] + 0.03).abs() < 1e-15);
        let g = leaky_relu_backward(&x, &Matrix::filled(1, 3, 1.0), 0.01).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 0.01, 0.01]);
        let g0 = leaky_relu_backward(&Matrix::zeros(1, 1), &Matrix::filled(1, 1, 1.0), 0.01).unwrap();
        assert_eq!(g0.as_slice(), &[0.01]);
    }

    #[test]
    fn softmax_values() {
        assert_eq!(softmax_rows(&Matrix::zeros(1, 4)).as_slice(), &[0.25; 4]);
        assert_eq!(softmax_rows(&Matrix::row_vector(&[1000.0, 1000.0])).as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn layer_norm_values() {
        let c = layer_norm_rows(&Matrix::row_vector(&[5.0, 5.0, 5.0]), 1e-5);
        assert_eq!(c.normalized.as_slice(), &[0.0, 0.0, 0.0]);
        let c = layer_norm_rows(&Matrix::row_vector(&[1.0, 3.0]), 1e-12);
        let y = c.normalized.as_slice();
        assert!((y[0] + 1.0).abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn l2_values() {
        let y = l2_normalize_rows(&Matrix::from_rows(&[&[3.0, 4.0], &[0.0, 0.0]]));
        assert_eq!(y.row(0), &[0.6, 0.8]);
        assert_eq!(y.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn row_invariants_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = random(rng.random_range(1..9), rng.random_range(2..9), &mut rng).scale(30.0);
            for row in softmax_rows(&x).iter_rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
            for row in layer_norm_rows(&x, 1e-5).normalized.iter_rows() {
                assert!((row.iter().sum::<f64>() / row.len() as f64).abs() <= 1e-12);
            }
            for row in l2_normalize_rows(&x).iter_rows() {
                let n = row_norm(row);
                assert!(n == 0.0 || (n - 1.0).abs() <= 1e-9);
            }
        }
    }

    /// Every backward pass against central differences, 20 seeds, h = 1e-5.
    #[test]
    fn backward_passes_match_finite_differences() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            // With two columns layer norm maps every row to ±1 and its true
            // gradient is below finite-difference noise.
            let (r, c) = (rng.random_range(1..9), rng.random_range(3..9));
            let x = random(r, c, &mut rng);
            let w = random(r, c, &mut rng);

            let cases: Vec<(&str, Box<dyn Fn(&Matrix) -> Matrix>, Box<dyn Fn(&Matrix) -> Matrix>)> = vec![
                (
                    "leaky_relu",
                    Box::new(|x| leaky_relu(x, 0.01)),
                    Box::new(|x| leaky_relu_backward(x, &w, 0.01).unwrap()),
                ),
                (
                    "softmax",
                    Box::new(softmax_rows),
                    Box::new(|x| softmax_rows_backward(&softmax_rows(x), &w).unwrap()),
                ),
                (
                    "layer_norm",
                    Box::new(|x| layer_norm_rows(x, 1e-5).normalized),
                    Box::new(|x| layer_norm_rows_backward(&layer_norm_rows(x, 1e-5), &w).unwrap()),
                ),
                (
                    "l2_normalize",
                    Box::new(l2_normalize_rows),
                    Box::new(|x| l2_normalize_rows_backward(x, &l2_normalize_rows(x), &w).unwrap()),
                ),
            ];
            for (name, fwd, bwd) in &cases {
                let report = grad_check(
                    |p| (probe(fwd, &w, &p[0]), vec![bwd(&p[0])]),
                    std::slice::from_ref(&x),
                    &[1e-5],
                    1e-4,
                );
                assert!(report.passed, "{name} seed {seed}: {report:?}");
            }
        }
    }
}
