use crate::numeric::Matrix;

/// `sign(g)·max(|g| − a, 0)`.
pub fn soft_threshold(g: f64, a: f64) -> f64 {
    if g > a {
        g - a
    } else if g < -a {
        g + a
    } else {
        0.0
    }
}

/// Minimizer of `G·w + ½(H + λ)w² + a|w|`.
pub fn leaf_weight(g: f64, h: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    // `+ 0.0` turns a negative zero into zero.
    -soft_threshold(g, reg_alpha) / (h + reg_lambda) + 0.0
}

/// Negated optimal objective of one leaf, up to the ½ factor.
pub fn split_score(g: f64, h: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    let t = soft_threshold(g, reg_alpha);
    t * t / (h + reg_lambda)
}

/// Loss reduction from splitting a node with sums (G, H) into a left child
/// (G_L, H_L) and the remainder.
pub fn gain(g: f64, h: f64, g_left: f64, h_left: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    0.5 * (split_score(g_left, h_left, reg_lambda, reg_alpha)
        + split_score(g - g_left, h - h_left, reg_lambda, reg_alpha)
        - split_score(g, h, reg_lambda, reg_alpha))
}

/// Rows with `x[feature] < threshold` go left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Threshold strictly above `lo` and at most `hi`, for `lo < hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SplitParams {
    pub reg_lambda: f64,
    pub reg_alpha: f64,
    pub min_child_weight: f64,
}

/// Left-to-right scan over one feature of one node in ascending value order.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scan {
    g_left: f64,
    h_left: f64,
    prev: f64,
    started: bool,
}

impl Scan {
    pub const fn new() -> Self {
        Scan { g_left: 0.0, h_left: 0.0, prev: 0.0, started: false }
    }

    /// Feeds the next row. Returns the candidate that puts every row seen so
    /// far on the left, if `value` starts a new distinct value and both
    /// children satisfy the weight constraint.
    #[inline]
    pub fn push(&mut self, value: f64, g: f64, h: f64, totals: (f64, f64), p: SplitParams) -> Option<(f64, f64)> {
        let mut out = None;
        if self.started && value != self.prev {
            let (g_all, h_all) = totals;
            if self.h_left >= p.min_child_weight && h_all - self.h_left >= p.min_child_weight {
                let gn = gain(g_all, h_all, self.g_left, self.h_left, p.reg_lambda, p.reg_alpha);
                out = Some((gn, midpoint(self.prev, value)));
            }
        }
        self.g_left += g;
        self.h_left += h;
        self.prev = value;
        self.started = true;
        out
    }
}

/// Exact greedy search over `features` for the node holding `rows`. Only
/// strictly positive gains qualify; ties go to the lowest feature index, then
/// the lowest threshold.
pub fn best_split(
    x: &Matrix,
    rows: &[usize],
    features: &[usize],
    grad: &[f64],
    hess: &[f64],
    reg_lambda: f64,
    reg_alpha: f64,
    min_child_weight: f64,
) -> Option<SplitCandidate> {
    let p = SplitParams { reg_lambda, reg_alpha, min_child_weight };
    let totals = rows.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r], h + hess[r]));
    let mut features = features.to_vec();
    features.sort_unstable();
    let mut best: Option<SplitCandidate> = None;
    let mut sorted = rows.to_vec();
    for &f in &features {
        sorted.copy_from_slice(rows);
        sorted.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]));
        let mut scan = Scan::new();
        for &r in &sorted {
            if let Some((gn, threshold)) = scan.push(x[(r, f)], grad[r], hess[r], totals, p) {
                if gn > 0.0 && best.is_none_or(|b| gn > b.gain) {
                    best = Some(SplitCandidate { feature: f, threshold, gain: gn });
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Grid minimizer of the regularized one-leaf objective.
    fn grid_argmin(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
        let objective = |w: f64| g * w + 0.5 * (h + lambda) * w * w + alpha * w.abs();
        let mut best = (f64::INFINITY, 0.0);
        for k in -400_000..=400_000 {
            let w = k as f64 * 1e-5;
            let v = objective(w);
            if v < best.0 {
                best = (v, w);
            }
        }
        best.1
    }

    #[test]
    fn leaf_weight_cases() {
        assert!((leaf_weight(2.0, 4.0, 1.0, 0.0) + 0.4).abs() < 1e-15);
        assert_eq!(grid_argmin(2.0, 4.0, 1.0, 3.0), 0.0);
        assert_eq!(leaf_weight(2.0, 4.0, 1.0, 3.0), 0.0);
        assert!((grid_argmin(-5.0, 4.0, 1.0, 3.0) - 0.4).abs() < 1e-6);
        assert!((leaf_weight(-5.0, 4.0, 1.0, 3.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn four_row_split_at_two_and_a_half() {
        let x = Matrix::from_vec(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = [1.0, 1.0, 5.0, 5.0];
        let base = 3.0;
        let grad: Vec<f64> = y.iter().map(|v| base - v).collect();
        let s = best_split(&x, &[0, 1, 2, 3], &[0], &grad, &[1.0; 4], 1.0, 0.0, 1.0).unwrap();
        assert_eq!((s.feature, s.threshold), (0, 2.5));
    }

    #[test]
    fn no_split_cases() {
        let x = Matrix::from_vec(3, 1, vec![7.0, 7.0, 7.0]).unwrap();
        assert!(best_split(&x, &[0, 1, 2], &[0], &[1.0, -2.0, 1.0], &[1.0; 3], 1.0, 0.0, 1.0).is_none());
        let x = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(best_split(&x, &[0, 1, 2], &[0], &[0.0; 3], &[1.0; 3], 1.0, 0.0, 1.0).is_none());
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        let x = Matrix::from_rows(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let s = best_split(&x, &[0, 1], &[1, 0], &[1.0, -1.0], &[1.0, 1.0], 0.0, 0.0, 1.0).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn midpoint_between_adjacent_floats() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        assert_eq!(midpoint(lo, hi), hi);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }
}
