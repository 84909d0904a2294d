use super::adam::{adam_step, AdamConfig, AdamState};
use super::dropout::dropout_mask;
use super::loss::cross_entropy;
use super::TrainError;
use crate::network::{Gradients, Model};
use crate::numerics::{derive_seed, Mat, Prng};

/// One standardized segment and its class.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub segment: Mat,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Training stops once this many epochs pass without a new best
    /// validation loss (0 stops after the first epoch).
    pub patience: usize,
    pub dropout: f64,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            max_epochs: 200,
            patience: 20,
            dropout: 0.5,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedFold {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

impl TrainedFold {
    pub fn epochs_trained(&self) -> usize {
        self.history.len()
    }
}

/// Mean cross-entropy over `samples` without dropout.
pub fn evaluate_loss(model: &Model, samples: &[Sample]) -> Result<f64, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    let mut total = 0.0;
    for s in samples {
        total += cross_entropy(&model.forward(&s.segment)?, s.label)?;
    }
    Ok(total / samples.len() as f64)
}

/// Mini-batch ADAM with per-epoch seeded shuffling and early stopping on the
/// validation loss. With no validation samples the training loss is
/// monitored instead.
pub fn train_fold(
    mut model: Model,
    train: &[Sample],
    val: &[Sample],
    cfg: &TrainConfig,
) -> Result<TrainedFold, TrainError> {
    if train.is_empty() {
        return Err(TrainError::NoTrainingData);
    }
    if cfg.batch_size == 0 {
        return Err(TrainError::BadConfig("batch size must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(TrainError::BadProbability(cfg.dropout));
    }
    let classes = model.class_count();
    if let Some(s) = train.iter().chain(val).find(|s| s.label >= classes) {
        return Err(TrainError::BadLabel {
            label: s.label,
            classes,
        });
    }

    let mut state = AdamState::new(model.param_blocks().iter().map(|b| b.len()), cfg.adam);
    let sites = model.dropout_sites();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let mut best = model.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut grads = Gradients::zeros_like(&model);

    for epoch in 0..cfg.max_epochs {
        let mut rng = Prng::new(derive_seed(cfg.seed, epoch as u64));
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.blocks.iter_mut().flatten().for_each(|g| *g = 0.0);
            for &idx in batch {
                let sample = &train[idx];
                let masks = sites
                    .iter()
                    .map(|&n| dropout_mask(n, cfg.dropout, true, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?;
                let trace = model.forward_trace(&sample.segment, &masks)?;
                total += cross_entropy(&trace.probs, sample.label)?;
                let mut dlogits = trace.probs.clone();
                dlogits[sample.label] -= 1.0;
                model.accumulate_gradients(&sample.segment, &trace, &dlogits, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut model.param_blocks_mut(), &grads.blocks, &mut state)?;
        }
        let train_loss = total / train.len() as f64;
        let val_loss = if val.is_empty() {
            train_loss
        } else {
            evaluate_loss(&model, val)?
        };
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            val_loss,
        });
        if val_loss < best_loss {
            best_loss = val_loss;
            best = model.clone();
            best_epoch = epoch + 1;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= cfg.patience {
            break;
        }
    }
    Ok(TrainedFold {
        model: best,
        history,
        best_epoch,
        best_val_loss: best_loss,
    })
}
