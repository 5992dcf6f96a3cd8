use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// A learnable tensor and its gradient buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor {
    pub name: String,
    pub value: Matrix,
    #[serde(skip)]
    pub grad: Option<Matrix>,
}

impl ParamTensor {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        ParamTensor { name: name.into(), value, grad: None }
    }

    pub fn zero_grad(&mut self) {
        self.grad = Some(Matrix::zeros(self.value.rows(), self.value.cols()));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Coupled L2 penalty added to the gradient before the moment updates.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &[ParamTensor]) -> Self {
        let zeros = || params.iter().map(|p| Matrix::zeros(p.value.rows(), p.value.cols())).collect();
        AdamState { config, step: 0, first: zeros(), second: zeros() }
    }
}

/// One bias-corrected adaptive-moment update. Fails, leaving every
/// parameter untouched, when any gradient is missing or non-finite.
pub fn adam_step(params: &mut [ParamTensor], state: &mut AdamState) -> Result<()> {
    if params.len() != state.first.len() {
        return Err(Error::Training(format!(
            "optimizer tracks {} tensors, got {}",
            state.first.len(),
            params.len()
        )));
    }
    for (p, m) in params.iter().zip(&state.first) {
        let g = p
            .grad
            .as_ref()
            .ok_or_else(|| Error::Training(format!("missing gradient for {}", p.name)))?;
        if g.shape() != p.value.shape() || m.shape() != p.value.shape() {
            return Err(Error::Dimension(format!("gradient shape for {}", p.name)));
        }
        if !g.is_finite() {
            return Err(Error::Training(format!("non-finite gradient in {}", p.name)));
        }
    }

    let AdamConfig { learning_rate, beta1, beta2, eps, weight_decay } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for ((p, m), v) in params.iter_mut().zip(&mut state.first).zip(&mut state.second) {
        let g = p.grad.as_ref().expect("checked above");
        let values = p.value.as_mut_slice();
        for (((x, &gi), mi), vi) in values
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice())
            .zip(v.as_mut_slice())
        {
            let gi = gi + weight_decay * *x;
            *mi = beta1 * *mi + (1.0 - beta1) * gi;
            *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *x -= learning_rate * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Vec<ParamTensor> {
        vec![ParamTensor::new("x", Matrix::row_vector(&[v]))]
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![ParamTensor::new("w", Matrix::from_rows(&[&[1.0, -2.0], &[0.5, 3.0]]))];
        let before = p[0].value.clone();
        let mut st = AdamState::new(AdamConfig::default(), &p);
        for _ in 0..10 {
            p[0].zero_grad();
            adam_step(&mut p, &mut st).unwrap();
        }
        assert_eq!(p[0].value, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = 1, v̂ = 1 after bias correction, so Δ = −lr / (1 + eps).
        let mut p = scalar(0.0);
        let cfg = AdamConfig { learning_rate: 0.1, ..Default::default() };
        let mut st = AdamState::new(cfg, &p);
        p[0].grad = Some(Matrix::row_vector(&[1.0]));
        adam_step(&mut p, &mut st).unwrap();
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((p[0].value.as_slice()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut p = scalar(1.0);
        let mut st = AdamState::new(AdamConfig::default(), &p);
        p[0].grad = Some(Matrix::row_vector(&[f64::NAN]));
        let err = adam_step(&mut p, &mut st).unwrap_err();
        assert!(err.to_string().contains('x'));
        assert_eq!(p[0].value.as_slice(), &[1.0]);
        assert_eq!(st.step, 0);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = scalar(0.3);
            let mut st = AdamState::new(AdamConfig::default(), &p);
            for k in 0..50 {
                p[0].grad = Some(Matrix::row_vector(&[(k as f64 * 0.37).sin()]));
                adam_step(&mut p, &mut st).unwrap();
            }
            p[0].value.as_slice()[0].to_bits()
        };
        assert_eq!(run(), run());
    }
}
