//! Dense row-major `f64` matrices and the handful of differentiable row-wise
//! operations the autoencoder is assembled from.
//!
//! Every kernel sums in a fixed order, so results are bit-identical across
//! runs and thread counts.

mod adam;
mod gradcheck;
mod matrix;
mod ops;

pub use adam::{adam_step, AdamConfig, AdamState, ParamTensor};
pub use gradcheck::{grad_check, GradCheckReport};
pub use matrix::{matmul, matmul_nt, matmul_tn, Matrix};
pub use ops::{
    l2_normalize_rows, l2_normalize_rows_backward, layer_norm_rows, layer_norm_rows_backward,
    leaky_relu, leaky_relu_backward, logistic, softmax_rows, softmax_rows_backward, LayerNormCache,
    L2_NORM_EPS,
};
