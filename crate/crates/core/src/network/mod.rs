//! Conditional (CLNN) and masked conditional (MCLNN) layers, the dense head
//! that sits on top of them, and model assembly.

mod conditional;
mod dense;
mod io;
mod model;
mod plan;

pub use conditional::{
    clnn_backward, clnn_forward, mclnn_backward, mclnn_forward, ClnnGrads, ClnnLayer, MclnnLayer,
    TemporalLayer,
};
pub use dense::{dense_forward, softmax, DenseLayer};
pub use io::{load_model, read_model, save_model, write_model};
pub use model::{Architecture, ForwardTrace, Gradients, Model};
pub use plan::{plan_windows, WindowPlan};

use crate::masking::MaskError;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("order, layer count and surviving frames must all be >= 1 (n={n}, m={m}, k={k})")]
    BadOrder { n: usize, m: usize, k: usize },
    #[error("segment has {frames} frames but the window needs at least {needed}")]
    SegmentTooShort { frames: usize, needed: usize },
    #[error("frame width {got} does not match layer input length {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("mask is {got_rows}x{got_cols} but the layer is {rows}x{cols}")]
    MaskShapeMismatch {
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("segment has {got} frames, model expects {expected}")]
    SegmentLengthMismatch { expected: usize, got: usize },
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    VersionMismatch(u32),
    #[error("model file is truncated")]
    TruncatedFile,
    #[error("bad model header: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Element-wise transfer function of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    Sigmoid,
    Relu,
    Tanh,
    Identity,
}

impl Transfer {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transfer::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Transfer::Relu => x.max(0.0),
            Transfer::Tanh => x.tanh(),
            Transfer::Identity => x,
        }
    }

    /// Derivative, given both the pre-activation and the activation.
    #[inline]
    pub fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Transfer::Sigmoid => out * (1.0 - out),
            Transfer::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Transfer::Tanh => 1.0 - out * out,
            Transfer::Identity => 1.0,
        }
    }
}

impl fmt::Display for Transfer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transfer::Sigmoid => "sigmoid",
            Transfer::Relu => "relu",
            Transfer::Tanh => "tanh",
            Transfer::Identity => "identity",
        })
    }
}

impl FromStr for Transfer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sigmoid" => Ok(Transfer::Sigmoid),
            "relu" => Ok(Transfer::Relu),
            "tanh" => Ok(Transfer::Tanh),
            "identity" => Ok(Transfer::Identity),
            other => Err(format!("unknown transfer function '{other}'")),
        }
    }
}

/// Reduction over the frame axis after the last temporal layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    Mean,
    Max,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Mean => "mean",
            Pooling::Max => "max",
        })
    }
}

impl FromStr for Pooling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Pooling::Mean),
            "max" => Ok(Pooling::Max),
            other => Err(format!("unknown pooling mode '{other}'")),
        }
    }
}

/// Pools `frames` (k x e) into a single length-e vector.
pub fn pool_frames(frames: &crate::numerics::Mat, mode: Pooling) -> Result<Vec<f64>, NetworkError> {
    let (k, e) = frames.shape();
    if k == 0 || e == 0 {
        return Err(NetworkError::EmptyInput);
    }
    let mut out = frames.row(0).to_vec();
    for t in 1..k {
        for (o, &v) in out.iter_mut().zip(frames.row(t)) {
            match mode {
                Pooling::Mean => *o += v,
                Pooling::Max => *o = o.max(v),
            }
        }
    }
    if mode == Pooling::Mean {
        let inv = k as f64;
        out.iter_mut().for_each(|o| *o /= inv);
    }
    Ok(out)
}

/// Gradient of `pool_frames` with respect to its input frames.
pub(crate) fn pool_backward(frames: &crate::numerics::Mat, mode: Pooling, upstream: &[f64]) -> crate::numerics::Mat {
    let (k, e) = frames.shape();
    let mut grad = crate::numerics::Mat::zeros(k, e);
    match mode {
        Pooling::Mean => {
            for t in 0..k {
                for (g, &u) in grad.row_mut(t).iter_mut().zip(upstream) {
                    *g = u / k as f64;
                }
            }
        }
        Pooling::Max => {
            for j in 0..e {
                // First maximal frame takes the gradient.
                let mut best = 0;
                for t in 1..k {
                    if frames.get(t, j) > frames.get(best, j) {
                        best = t;
                    }
                }
                grad.set(best, j, upstream[j]);
            }
        }
    }
    grad
}
