use super::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// (parameter index, flat coordinate) of the largest error.
    pub worst: Option<(usize, usize)>,
    pub coordinates: usize,
    pub passed: bool,
}

/// Compares analytic gradients against finite differences, one coordinate
/// at a time. For every step `h` in `steps` three estimates are formed: the
/// fourth-order central difference
/// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h` and the second-order
/// one-sided differences `±(3f(x) − 4f(x∓h) + f(x∓2h)) / 2h`. A coordinate's
/// error is the smallest over all of them: large steps lose accuracy where
/// the function has a kink within reach (a one-sided stencil away from the
/// kink still holds), small ones where the gradient is near the roundoff
/// floor, while a wrong gradient disagrees with every estimate. `f` returns
/// the value and the analytic gradient for every parameter; only the value is
/// used at perturbed points.
///
/// The per-coordinate error is `|g − ĝ| / max(|g|, |ĝ|, 1e-8)`.
pub fn grad_check<F>(mut f: F, params: &[Matrix], steps: &[f64], tol: f64) -> GradCheckReport
where
    F: FnMut(&[Matrix]) -> (f64, Vec<Matrix>),
{
    let (f0, analytic) = f(params);
    assert_eq!(analytic.len(), params.len(), "one gradient per parameter");
    assert!(!steps.is_empty(), "at least one step");
    let mut work = params.to_vec();
    let mut max_rel_error = 0.0;
    let mut worst = None;
    let mut coordinates = 0;
    for p in 0..params.len() {
        assert_eq!(analytic[p].shape(), params[p].shape(), "gradient shape for parameter {p}");
        for c in 0..params[p].len() {
            let orig = params[p].as_slice()[c];
            let g = analytic[p].as_slice()[c];
            let mut rel = f64::INFINITY;
            for &h in steps {
                let mut at = |offset: f64| {
                    work[p].as_mut_slice()[c] = orig + offset;
                    f(&work).0
                };
                let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
                let estimates = [
                    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h),
                    (-3.0 * f0 + 4.0 * p1 - p2) / (2.0 * h),
                    (3.0 * f0 - 4.0 * m1 + m2) / (2.0 * h),
                ];
                for fd in estimates {
                    let e = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-8);
                    if e.is_nan() || e < rel {
                        rel = e;
                    }
                }
            }
            work[p].as_mut_slice()[c] = orig;
            coordinates += 1;
            if rel > max_rel_error || rel.is_nan() {
                max_rel_error = rel;
                worst = Some((p, c));
            }
        }
    }
    GradCheckReport { max_rel_error, worst, coordinates, passed: max_rel_error < tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let x = Matrix::row_vector(&[3.0]);
        let r = grad_check(
            |p| {
                let v = p[0].as_slice()[0];
                (v * v, vec![Matrix::row_vector(&[2.0 * v])])
            },
            &[x],
            &[1e-5],
            1e-4,
        );
        assert!(r.max_rel_error < 1e-8, "{r:?}");
        assert!(r.passed);
    }

    #[test]
    fn linear_function_is_exact() {
        let x = Matrix::row_vector(&[0.5, -1.25]);
        let r = grad_check(
            |p| {
                let v = p[0].as_slice();
                (2.0 * v[0] - 4.0 * v[1], vec![Matrix::row_vector(&[2.0, -4.0])])
            },
            &[x],
            &[1.0 / 1024.0],
            1e-12,
        );
        assert!(r.max_rel_error < 1e-12, "{r:?}");
    }

    #[test]
    fn wrong_gradient_fails() {
        let r = grad_check(
            |p| {
                let v = p[0].as_slice()[0];
                (v * v, vec![Matrix::row_vector(&[v])])
            },
            &[Matrix::row_vector(&[1.0])],
            &[1e-5],
            1e-4,
        );
        assert!(!r.passed);
        assert_eq!(r.worst, Some((0, 0)));
    }
}
