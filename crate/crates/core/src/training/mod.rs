//! Loss, optimizer, dropout, fold training, cross-validation, clip voting,
//! metrics and the frequency-shift robustness benchmark.

mod adam;
mod dropout;
mod fold;
mod loss;
mod metrics;
mod shift;
mod xval;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dropout::dropout_mask;
pub use fold::{evaluate_loss, train_fold, EpochRecord, Sample, TrainConfig, TrainedFold};
pub use loss::{cross_entropy, PROB_FLOOR};
pub use metrics::{confusion_matrix, mean_std, vote_clip, vote_clip_with, Voting};
pub use shift::{shift_frames, shift_robustness_benchmark, shift_experiment, ShiftReport};
pub use xval::{
    cross_validate, prepare_clip, predict_clip, run_fold, stratified_folds, ClipPrediction, ClipSegments, FoldResult,
    XvalConfig, XvalReport,
};

use crate::features::FeatureError;
use crate::network::NetworkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dropout probability {0} must lie in [0, 1)")]
    BadProbability(f64),
    #[error("no training data")]
    NoTrainingData,
    #[error("empty input")]
    EmptyInput,
    #[error("class {class} has {count} clips, fewer than {folds} folds")]
    ClassTooSmall { class: usize, count: usize, folds: usize },
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("shift of {shift} bins is not smaller than the feature length {len}")]
    BadShift { shift: i64, len: usize },
    #[error("segment longer than clip: clip '{clip}' has {frames} frames, segment needs {needed}")]
    SegmentLongerThanClip { clip: String, frames: usize, needed: usize },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
