use super::{NetworkError, Transfer};
use crate::numerics::{Mat, Prng};

/// Fully connected layer; `weights` is `inputs x outputs`, applied as `x . W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Mat,
    pub bias: Vec<f64>,
    pub transfer: Transfer,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize, transfer: Transfer) -> Self {
        Self {
            weights: Mat::zeros(inputs, outputs),
            bias: vec![0.0; outputs],
            transfer,
        }
    }

    /// Uniform weights in `+-sqrt(6 / (in + out))`, zero bias.
    pub fn random(inputs: usize, outputs: usize, transfer: Transfer, rng: &mut Prng) -> Self {
        let mut layer = Self::zeros(inputs, outputs, transfer);
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        for v in layer.weights.as_mut_slice() {
            *v = rng.uniform(-limit, limit);
        }
        layer
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub(crate) fn forward_parts(&self, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NetworkError> {
        if input.len() != self.inputs() {
            return Err(NetworkError::ShapeMismatch(format!(
                "dense layer expects {} inputs, got {}",
                self.inputs(),
                input.len()
            )));
        }
        let mut pre = self.bias.clone();
        for (i, &x) in input.iter().enumerate() {
            for (p, &w) in pre.iter_mut().zip(self.weights.row(i)) {
                *p += x * w;
            }
        }
        let out = pre.iter().map(|&p| self.transfer.apply(p)).collect();
        Ok((pre, out))
    }

    /// Accumulates parameter gradients into `gw` (`inputs * outputs`) and
    /// `gb`; returns the gradient with respect to the input.
    pub(crate) fn backward_parts(
        &self,
        input: &[f64],
        pre: &[f64],
        out: &[f64],
        upstream: &[f64],
        gw: &mut [f64],
        gb: &mut [f64],
    ) -> Vec<f64> {
        let delta: Vec<f64> = upstream
            .iter()
            .zip(pre.iter().zip(out))
            .map(|(&g, (&p, &o))| g * self.transfer.derivative(p, o))
            .collect();
        for (b, &d) in gb.iter_mut().zip(&delta) {
            *b += d;
        }
        let outs = self.outputs();
        let mut gx = vec![0.0; self.inputs()];
        for (i, &x) in input.iter().enumerate() {
            let mut s = 0.0;
            for ((g, &d), &w) in gw[i * outs..(i + 1) * outs]
                .iter_mut()
                .zip(&delta)
                .zip(self.weights.row(i))
            {
                *g += x * d;
                s += d * w;
            }
            gx[i] = s;
        }
        gx
    }
}

pub fn dense_forward(layer: &DenseLayer, input: &[f64]) -> Result<Vec<f64>, NetworkError> {
    Ok(layer.forward_parts(input)?.1)
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|v| v / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_softmax() {
        assert!(softmax(&[0.0; 8]).iter().all(|&p| p == 0.125));
    }

    #[test]
    fn softmax_large_logits() {
        let p = softmax(&[1000.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn identity_dense() {
        let layer = DenseLayer {
            weights: Mat::identity(3),
            bias: vec![0.0; 3],
            transfer: Transfer::Identity,
        };
        let x = [0.25, -1.5, 3.0];
        assert_eq!(dense_forward(&layer, &x).unwrap(), x.to_vec());
        assert!(dense_forward(&layer, &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(logits in prop::collection::vec(-1000.0f64..1000.0, 1..16)) {
            let p = softmax(&logits);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
