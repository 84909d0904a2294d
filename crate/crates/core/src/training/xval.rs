use super::fold::{train_fold, Sample, TrainConfig, TrainedFold};
use super::metrics::{confusion_matrix, mean_std, vote_clip_with, Voting};
use super::TrainError;
use crate::features::{apply_standardizer, fit_standardizer, segment_clip, FeatureClip, Standardizer};
use crate::network::{Architecture, Model};
use crate::numerics::{derive_seed, Mat, Prng};
use rayon::prelude::*;

/// Seeded per-class shuffle, then one global round-robin across classes so
/// both the per-class and the overall fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], n_folds: usize, seed: u64) -> Result<Vec<usize>, TrainError> {
    if n_folds == 0 {
        return Err(TrainError::BadConfig("fold count must be at least 1".into()));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < n_folds {
            return Err(TrainError::ClassTooSmall {
                class,
                count: members.len(),
                folds: n_folds,
            });
        }
        Prng::new(derive_seed(seed, class as u64)).shuffle(&mut members);
        for idx in members {
            assignment[idx] = next % n_folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// A clip's standardized segments.
#[derive(Debug, Clone)]
pub struct ClipSegments {
    pub clip_id: String,
    pub label: usize,
    pub fold: usize,
    pub segments: Vec<Mat>,
}

/// Standardizes a clip and cuts it into `len`-frame segments every `hop` frames.
pub fn prepare_clip(
    clip: &FeatureClip,
    std: &Standardizer,
    len: usize,
    hop: usize,
) -> Result<ClipSegments, TrainError> {
    if clip.frame_count < len {
        return Err(TrainError::SegmentLongerThanClip {
            clip: clip.clip_id.clone(),
            frames: clip.frame_count,
            needed: len,
        });
    }
    let frames = apply_standardizer(std, &clip.to_mat())?;
    Ok(ClipSegments {
        clip_id: clip.clip_id.clone(),
        label: clip.label,
        fold: clip.fold,
        segments: segment_clip(&frames, len, hop).segments,
    })
}

/// Clip decision and the averaged class probabilities.
pub fn predict_clip(model: &Model, segments: &[Mat], voting: Voting) -> Result<(usize, Vec<f64>), TrainError> {
    let probs = segments
        .iter()
        .map(|s| model.forward(s))
        .collect::<Result<Vec<_>, _>>()?;
    let class = vote_clip_with(&probs, voting)?;
    let mut mean = vec![0.0; model.class_count()];
    for p in &probs {
        mean.iter_mut().zip(p).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= probs.len() as f64);
    Ok((class, mean))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipPrediction {
    pub clip_id: String,
    pub label: usize,
    pub predicted: usize,
    pub prob_true: f64,
}

#[derive(Debug, Clone)]
pub struct XvalConfig {
    pub arch: Architecture,
    pub segment_hop: usize,
    /// Training settings; the seed is replaced by a per-fold derivation of `seed`.
    pub train: TrainConfig,
    pub folds: usize,
    pub voting: Voting,
    pub seed: u64,
    /// Worker threads for folds; 0 lets rayon decide. Never changes results.
    pub threads: usize,
}

impl XvalConfig {
    /// Validation fold paired with `test`; none when fewer than 3 folds.
    pub fn val_fold(&self, test: usize) -> Option<usize> {
        (self.folds >= 3).then(|| (test + 1) % self.folds)
    }

    pub fn init_seed(&self, fold: usize) -> u64 {
        derive_seed(self.seed, 0x1_0000 + fold as u64)
    }

    pub fn train_seed(&self, fold: usize) -> u64 {
        derive_seed(self.seed, fold as u64)
    }
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub val_fold: Option<usize>,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<ClipPrediction>,
    /// Trained model, carrying the fold's standardizer.
    pub trained: TrainedFold,
}

#[derive(Debug, Clone)]
pub struct XvalReport {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

fn samples(clips: &[ClipSegments]) -> Vec<Sample> {
    clips
        .iter()
        .flat_map(|c| {
            c.segments.iter().map(move |s| Sample {
                segment: s.clone(),
                label: c.label,
            })
        })
        .collect()
}

/// Trains and evaluates one fold. Test-fold clips never reach the
/// standardizer fit or the optimizer.
pub fn run_fold(clips: &[FeatureClip], cfg: &XvalConfig, test: usize) -> Result<FoldResult, TrainError> {
    let val_fold = cfg.val_fold(test);
    let q = crate::network::plan_windows(cfg.arch.order, cfg.arch.layers, cfg.arch.surviving)?.segment;
    let is_train = |c: &&FeatureClip| c.fold != test && Some(c.fold) != val_fold;
    let std = fit_standardizer(clips.iter().filter(is_train))?;

    let prep = |pred: &dyn Fn(&FeatureClip) -> bool| -> Result<Vec<ClipSegments>, TrainError> {
        clips
            .iter()
            .filter(|c| pred(c))
            .map(|c| prepare_clip(c, &std, q, cfg.segment_hop))
            .collect()
    };
    let train = prep(&|c| is_train(&c))?;
    let val = prep(&|c| Some(c.fold) == val_fold)?;
    let test_clips = prep(&|c| c.fold == test)?;
    if test_clips.is_empty() {
        return Err(TrainError::BadConfig(format!("fold {test} has no clips")));
    }

    let model = Model::new(cfg.arch.clone(), cfg.init_seed(test))?;
    let train_cfg = TrainConfig {
        seed: cfg.train_seed(test),
        ..cfg.train.clone()
    };
    let mut trained = train_fold(model, &samples(&train), &samples(&val), &train_cfg)?;
    trained.model.standardizer = Some(std);

    let mut predictions = Vec::with_capacity(test_clips.len());
    for clip in &test_clips {
        let (predicted, mean) = predict_clip(&trained.model, &clip.segments, cfg.voting)?;
        predictions.push(ClipPrediction {
            clip_id: clip.clip_id.clone(),
            label: clip.label,
            predicted,
            prob_true: mean[clip.label],
        });
    }
    let preds: Vec<usize> = predictions.iter().map(|p| p.predicted).collect();
    let labels: Vec<usize> = predictions.iter().map(|p| p.label).collect();
    let confusion = confusion_matrix(&preds, &labels, cfg.arch.class_count)?;
    let correct = preds.iter().zip(&labels).filter(|(p, l)| p == l).count();
    Ok(FoldResult {
        fold: test,
        val_fold,
        accuracy: correct as f64 / preds.len() as f64,
        confusion,
        predictions,
        trained,
    })
}

/// K-fold cross-validation over clips whose `fold` field is already set.
/// Folds may run concurrently; results are merged in fold order.
pub fn cross_validate(clips: &[FeatureClip], cfg: &XvalConfig) -> Result<XvalReport, TrainError> {
    if clips.is_empty() {
        return Err(TrainError::NoTrainingData);
    }
    if let Some(c) = clips.iter().find(|c| c.fold >= cfg.folds) {
        return Err(TrainError::BadConfig(format!(
            "clip '{}' is in fold {} but only {} folds are configured",
            c.clip_id, c.fold, cfg.folds
        )));
    }
    if let Some(c) = clips.iter().find(|c| c.label >= cfg.arch.class_count) {
        return Err(TrainError::BadLabel {
            label: c.label,
            classes: cfg.arch.class_count,
        });
    }
    let q = crate::network::plan_windows(cfg.arch.order, cfg.arch.layers, cfg.arch.surviving)?.segment;
    if let Some(c) = clips.iter().find(|c| c.frame_count < q) {
        return Err(TrainError::SegmentLongerThanClip {
            clip: c.clip_id.clone(),
            frames: c.frame_count,
            needed: q,
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| TrainError::BadConfig(e.to_string()))?;
    let folds = pool.install(|| {
        (0..cfg.folds)
            .into_par_iter()
            .map(|i| run_fold(clips, cfg, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accs);
    Ok(XvalReport {
        folds,
        mean_accuracy,
        std_accuracy,
    })
}
