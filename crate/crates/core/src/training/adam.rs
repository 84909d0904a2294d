use super::TrainError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators, one buffer per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(block_sizes: impl IntoIterator<Item = usize>, config: AdamConfig) -> Self {
        let sizes: Vec<usize> = block_sizes.into_iter().collect();
        Self {
            config,
            step: 0,
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// One bias-corrected ADAM update applied in place.
pub fn adam_step(params: &mut [&mut [f64]], grads: &[Vec<f64>], state: &mut AdamState) -> Result<(), TrainError> {
    let shapes_match = params.len() == grads.len()
        && params.len() == state.first.len()
        && params
            .iter()
            .zip(grads)
            .zip(&state.first)
            .all(|((p, g), m)| p.len() == g.len() && p.len() == m.len());
    if !shapes_match {
        return Err(TrainError::ShapeMismatch(
            "parameters, gradients and optimizer state differ in shape".into(),
        ));
    }
    state.step += 1;
    let AdamConfig {
        alpha,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= alpha * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar ADAM written out term by term.
    fn scalar_reference(mut p: f64, grads: &[f64]) -> f64 {
        let (a, b1, b2, eps) = (0.001f64, 0.9f64, 0.999f64, 1e-8f64);
        let (mut m, mut v) = (0.0f64, 0.0f64);
        for (k, &g) in grads.iter().enumerate() {
            let t = (k + 1) as f64;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powf(t));
            let vh = v / (1.0 - b2.powf(t));
            p -= a * mh / (vh.sqrt() + eps);
        }
        p
    }

    fn run(p0: f64, grads: &[f64]) -> f64 {
        let mut p = vec![p0];
        let mut state = AdamState::new([1], AdamConfig::default());
        for &g in grads {
            adam_step(&mut [p.as_mut_slice()], &[vec![g]], &mut state).unwrap();
        }
        p[0]
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        assert_eq!(run(0.75, &[0.0, 0.0, 0.0]), 0.75);
    }

    #[test]
    fn first_step_moves_by_alpha() {
        // After one step m_hat = g and v_hat = g^2, so the move is
        // alpha * g / (|g| + eps).
        for g in [0.3, -2.0, 1e-3] {
            let got = run(1.0, &[g]) - 1.0;
            let expect = -0.001 * g / (g.abs() + 1e-8);
            assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
            assert!((got + 0.001 * g.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn matches_scalar_reference() {
        let grads = [0.5, 0.5, 0.5];
        assert!((run(2.0, &grads) - scalar_reference(2.0, &grads)).abs() < 1e-15);
        let grads = [0.1, -0.4, 2.0, 0.0, -1.0];
        assert!((run(-1.0, &grads) - scalar_reference(-1.0, &grads)).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = vec![0.0; 2];
        let mut state = AdamState::new([2], AdamConfig::default());
        let r = adam_step(&mut [p.as_mut_slice()], &[vec![0.0]], &mut state);
        assert!(matches!(r, Err(TrainError::ShapeMismatch(_))));
    }
}
