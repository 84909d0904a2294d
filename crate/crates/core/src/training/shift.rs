use super::metrics::Voting;
use super::xval::{predict_clip, prepare_clip, run_fold, ClipSegments, XvalConfig};
use super::TrainError;
use crate::features::FeatureClip;
use crate::network::Model;
use crate::numerics::Mat;

/// Moves every frame's features `s` bins up (towards higher indices) or down
/// for negative `s`. Vacated bins get 0.0, the standardized mean.
pub fn shift_frames(frames: &Mat, s: i64) -> Result<Mat, TrainError> {
    let l = frames.cols();
    if s.unsigned_abs() as usize >= l {
        return Err(TrainError::BadShift { shift: s, len: l });
    }
    let mut out = Mat::zeros(frames.rows(), l);
    for t in 0..frames.rows() {
        let src = frames.row(t);
        let dst = out.row_mut(t);
        for (j, v) in dst.iter_mut().enumerate() {
            let from = j as i64 - s;
            if (0..l as i64).contains(&from) {
                *v = src[from as usize];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    pub shift: i64,
    pub masked_clean: f64,
    pub masked_shifted: f64,
    pub unmasked_clean: f64,
    pub unmasked_shifted: f64,
}

impl ShiftReport {
    /// Accuracy lost by the masked model, clean minus shifted.
    pub fn masked_degradation(&self) -> f64 {
        self.masked_clean - self.masked_shifted
    }

    pub fn unmasked_degradation(&self) -> f64 {
        self.unmasked_clean - self.unmasked_shifted
    }
}

fn clip_accuracy(model: &Model, clips: &[ClipSegments], voting: Voting) -> Result<f64, TrainError> {
    let mut correct = 0;
    for clip in clips {
        if predict_clip(model, &clip.segments, voting)?.0 == clip.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / clips.len() as f64)
}

/// Clip accuracy of both models on standardized test clips, as given and
/// with every segment shifted by `s` bins.
pub fn shift_robustness_benchmark(
    masked: &Model,
    unmasked: &Model,
    test: &[ClipSegments],
    s: i64,
    voting: Voting,
) -> Result<ShiftReport, TrainError> {
    if test.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    if masked.feature_len() != unmasked.feature_len() {
        return Err(TrainError::ShapeMismatch(format!(
            "models take {} and {} features",
            masked.feature_len(),
            unmasked.feature_len()
        )));
    }
    let l = masked.feature_len();
    if s.unsigned_abs() as usize >= l {
        return Err(TrainError::BadShift { shift: s, len: l });
    }
    let shifted = test
        .iter()
        .map(|c| {
            Ok(ClipSegments {
                segments: c
                    .segments
                    .iter()
                    .map(|m| shift_frames(m, s))
                    .collect::<Result<_, TrainError>>()?,
                ..c.clone()
            })
        })
        .collect::<Result<Vec<_>, TrainError>>()?;
    Ok(ShiftReport {
        shift: s,
        masked_clean: clip_accuracy(masked, test, voting)?,
        masked_shifted: clip_accuracy(masked, &shifted, voting)?,
        unmasked_clean: clip_accuracy(unmasked, test, voting)?,
        unmasked_shifted: clip_accuracy(unmasked, &shifted, voting)?,
    })
}

/// Trains the configured masked model and its unmasked twin on the same
/// split and seeds, then benchmarks both on fold `test_fold`.
pub fn shift_experiment(
    clips: &[FeatureClip],
    cfg: &XvalConfig,
    test_fold: usize,
    s: i64,
) -> Result<ShiftReport, TrainError> {
    if cfg.arch.mask.is_none() {
        return Err(TrainError::BadConfig("shift experiment needs a masked architecture".into()));
    }
    let twin_cfg = XvalConfig {
        arch: cfg.arch.unmasked(),
        ..cfg.clone()
    };
    let (masked, unmasked) = rayon::join(
        || run_fold(clips, cfg, test_fold),
        || run_fold(clips, &twin_cfg, test_fold),
    );
    let (masked, unmasked) = (masked?.trained.model, unmasked?.trained.model);
    let std = masked
        .standardizer
        .clone()
        .ok_or_else(|| TrainError::BadConfig("trained model has no standardizer".into()))?;
    let q = masked.segment_len();
    let test = clips
        .iter()
        .filter(|c| c.fold == test_fold)
        .map(|c| prepare_clip(c, &std, q, cfg.segment_hop))
        .collect::<Result<Vec<_>, _>>()?;
    shift_robustness_benchmark(&masked, &unmasked, &test, s, cfg.voting)
}
