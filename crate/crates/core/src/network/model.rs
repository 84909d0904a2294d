use super::conditional::{ClnnLayer, MclnnLayer, TemporalLayer};
use super::dense::{softmax, DenseLayer};
use super::plan::{plan_windows, WindowPlan};
use super::{pool_backward, pool_frames, NetworkError, Pooling, Transfer};
use crate::features::Standardizer;
use crate::masking::{generate_mask, MaskSpec};
use crate::numerics::{Mat, Prng};

/// Shape and hyperparameters of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    /// Input feature-vector length `l`.
    pub feature_len: usize,
    pub order: usize,
    pub layers: usize,
    pub surviving: usize,
    /// Hidden width `e` of every temporal layer.
    pub width: usize,
    /// `(bandwidth, overlap)`; `None` builds unmasked CLNN layers.
    pub mask: Option<(usize, i64)>,
    pub transfer: Transfer,
    pub pooling: Pooling,
    pub dense: Vec<usize>,
    pub dense_transfer: Transfer,
    pub class_count: usize,
}

impl Architecture {
    /// Same architecture with the band mask removed.
    pub fn unmasked(&self) -> Self {
        Self {
            mask: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub arch: Architecture,
    pub plan: WindowPlan,
    pub temporal: Vec<TemporalLayer>,
    /// Hidden dense layers followed by the (identity) output layer.
    pub dense: Vec<DenseLayer>,
    pub init_seed: u64,
    /// z-score parameters the model was trained with, if known.
    pub standardizer: Option<Standardizer>,
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    temporal: Vec<(Mat, Mat)>,
    dropout: Vec<Vec<f64>>,
    dense_inputs: Vec<Vec<f64>>,
    dense: Vec<(Vec<f64>, Vec<f64>)>,
    pub probs: Vec<f64>,
}

/// Parameter gradients in the same block order as [`Model::param_blocks`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub blocks: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Self {
            blocks: model.param_blocks().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.blocks.iter_mut().flatten().for_each(|v| *v *= factor);
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.concat()
    }
}

impl Model {
    /// Builds a freshly initialized model. Weight draws are taken in
    /// parameter-block order from a generator seeded with `init_seed`, so
    /// the masked and unmasked variants of an architecture start from
    /// identical weights.
    pub fn new(arch: Architecture, init_seed: u64) -> Result<Self, NetworkError> {
        let plan = plan_windows(arch.order, arch.layers, arch.surviving)?;
        if arch.feature_len == 0 || arch.width == 0 || arch.class_count == 0 {
            return Err(NetworkError::ShapeMismatch(
                "feature length, width and class count must be positive".into(),
            ));
        }
        if arch.dense.contains(&0) {
            return Err(NetworkError::ShapeMismatch("dense widths must be positive".into()));
        }
        let mut rng = Prng::new(init_seed);
        let mut temporal = Vec::with_capacity(arch.layers);
        let mut input = arch.feature_len;
        for _ in 0..arch.layers {
            let base = ClnnLayer::random(input, arch.width, arch.order, arch.transfer, &mut rng);
            temporal.push(match arch.mask {
                None => TemporalLayer::Clnn(base),
                Some((bw, ov)) => {
                    let mask = generate_mask(MaskSpec::new(input, arch.width, bw, ov))?;
                    TemporalLayer::Mclnn(MclnnLayer::new(base, mask)?)
                }
            });
            input = arch.width;
        }
        let mut dense = Vec::with_capacity(arch.dense.len() + 1);
        for &w in &arch.dense {
            dense.push(DenseLayer::random(input, w, arch.dense_transfer, &mut rng));
            input = w;
        }
        dense.push(DenseLayer::random(input, arch.class_count, Transfer::Identity, &mut rng));
        Ok(Self {
            arch,
            plan,
            temporal,
            dense,
            init_seed,
            standardizer: None,
        })
    }

    pub fn class_count(&self) -> usize {
        self.dense.last().map_or(0, DenseLayer::outputs)
    }

    pub fn feature_len(&self) -> usize {
        self.temporal[0].base().input_len
    }

    pub fn segment_len(&self) -> usize {
        self.plan.segment
    }

    /// Lengths of the vectors that take dropout: the pooled vector and
    /// every hidden dense output.
    pub fn dropout_sites(&self) -> Vec<usize> {
        let mut sites = vec![self.temporal.last().map_or(0, |l| l.base().width)];
        sites.extend(self.dense[..self.dense.len() - 1].iter().map(DenseLayer::outputs));
        sites
    }

    pub fn param_blocks(&self) -> Vec<&[f64]> {
        let mut blocks: Vec<&[f64]> = Vec::new();
        for layer in &self.temporal {
            let base = layer.base();
            blocks.extend(base.weights.iter().map(Mat::as_slice));
            blocks.push(&base.bias);
        }
        for d in &self.dense {
            blocks.push(d.weights.as_slice());
            blocks.push(&d.bias);
        }
        blocks
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut blocks: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.temporal {
            let base = layer.base_mut();
            blocks.extend(base.weights.iter_mut().map(Mat::as_mut_slice));
            blocks.push(&mut base.bias);
        }
        for d in &mut self.dense {
            blocks.push(d.weights.as_mut_slice());
            blocks.push(&mut d.bias);
        }
        blocks
    }

    pub fn param_count(&self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        self.param_blocks().concat()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.param_count() {
            return Err(NetworkError::ShapeMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for block in self.param_blocks_mut() {
            block.copy_from_slice(&flat[offset..offset + block.len()]);
            offset += block.len();
        }
        Ok(())
    }

    fn check_segment(&self, segment: &Mat) -> Result<(), NetworkError> {
        if segment.rows() != self.plan.segment {
            return Err(NetworkError::SegmentLengthMismatch {
                expected: self.plan.segment,
                got: segment.rows(),
            });
        }
        if segment.cols() != self.feature_len() {
            return Err(NetworkError::WidthMismatch {
                expected: self.feature_len(),
                got: segment.cols(),
            });
        }
        Ok(())
    }

    /// Class probabilities for one segment of exactly `q` frames.
    pub fn forward(&self, segment: &Mat) -> Result<Vec<f64>, NetworkError> {
        Ok(self.forward_trace(segment, &[])?.probs)
    }

    /// Forward pass keeping intermediates. `dropout` is either empty or one
    /// multiplicative mask per entry of [`Model::dropout_sites`].
    pub fn forward_trace(&self, segment: &Mat, dropout: &[Vec<f64>]) -> Result<ForwardTrace, NetworkError> {
        self.check_segment(segment)?;
        let sites = self.dropout_sites();
        if !dropout.is_empty()
            && (dropout.len() != sites.len() || dropout.iter().zip(&sites).any(|(m, &s)| m.len() != s))
        {
            return Err(NetworkError::ShapeMismatch("dropout masks do not match the model".into()));
        }
        let apply = |v: Vec<f64>, site: usize| -> Vec<f64> {
            match dropout.get(site) {
                Some(mask) => v.iter().zip(mask).map(|(a, m)| a * m).collect(),
                None => v,
            }
        };

        let mut temporal = Vec::with_capacity(self.temporal.len());
        for layer in &self.temporal {
            let input = temporal.last().map_or(segment, |(_, out): &(Mat, Mat)| out);
            temporal.push(layer.forward_parts(input)?);
        }
        let last = &temporal.last().expect("at least one temporal layer").1;
        let pooled = pool_frames(last, self.arch.pooling)?;

        let mut dense_inputs = Vec::with_capacity(self.dense.len());
        let mut dense = Vec::with_capacity(self.dense.len());
        let mut x = apply(pooled, 0);
        for (idx, layer) in self.dense.iter().enumerate() {
            let (pre, out) = layer.forward_parts(&x)?;
            dense_inputs.push(x);
            x = if idx + 1 < self.dense.len() {
                apply(out.clone(), idx + 1)
            } else {
                out.clone()
            };
            dense.push((pre, out));
        }
        let probs = softmax(&x);
        Ok(ForwardTrace {
            temporal,
            dropout: dropout.to_vec(),
            dense_inputs,
            dense,
            probs,
        })
    }

    /// Parameter gradients given the gradient of the loss with respect to
    /// the output logits (for softmax + cross-entropy, `probs - onehot`).
    pub fn backward(&self, segment: &Mat, trace: &ForwardTrace, dlogits: &[f64]) -> Result<Gradients, NetworkError> {
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_gradients(segment, trace, dlogits, &mut grads)?;
        Ok(grads)
    }

    /// As [`Model::backward`], adding into an existing gradient buffer.
    pub fn accumulate_gradients(
        &self,
        segment: &Mat,
        trace: &ForwardTrace,
        dlogits: &[f64],
        grads: &mut Gradients,
    ) -> Result<(), NetworkError> {
        if dlogits.len() != self.class_count() {
            return Err(NetworkError::ShapeMismatch(format!(
                "{} logit gradients for {} classes",
                dlogits.len(),
                self.class_count()
            )));
        }
        let temporal_blocks: usize = self.temporal.iter().map(|l| l.base().window() + 1).sum();
        if grads.blocks.len() != temporal_blocks + 2 * self.dense.len() {
            return Err(NetworkError::ShapeMismatch("gradient buffer does not match the model".into()));
        }
        let (tblocks, dblocks) = grads.blocks.split_at_mut(temporal_blocks);

        let mut g = dlogits.to_vec();
        for (idx, layer) in self.dense.iter().enumerate().rev() {
            let (pre, out) = &trace.dense[idx];
            let (gw, rest) = dblocks[2 * idx..].split_at_mut(1);
            let gx = layer.backward_parts(&trace.dense_inputs[idx], pre, out, &g, &mut gw[0], &mut rest[0]);
            g = match trace.dropout.get(idx) {
                Some(mask) => gx.iter().zip(mask).map(|(a, m)| a * m).collect(),
                None => gx,
            };
        }

        let last = &trace.temporal.last().expect("at least one temporal layer").1;
        let mut upstream = pool_backward(last, self.arch.pooling, &g);
        let mut offset = temporal_blocks;
        for (idx, layer) in self.temporal.iter().enumerate().rev() {
            let d = layer.base().window();
            offset -= d + 1;
            let (gw, rest) = tblocks[offset..offset + d + 1].split_at_mut(d);
            let input = if idx == 0 { segment } else { &trace.temporal[idx - 1].1 };
            let (pre, out) = &trace.temporal[idx];
            let gx = layer.backward_parts(input, pre, out, &upstream, gw, &mut rest[0], idx > 0)?;
            if let Some(gx) = gx {
                upstream = gx;
            }
        }
        Ok(())
    }
}
