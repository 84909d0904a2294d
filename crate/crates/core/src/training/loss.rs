use super::TrainError;

/// Probability clamp that keeps the loss finite.
pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln(max(p[label], 1e-12))`.
pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64, TrainError> {
    let p = probs.get(label).ok_or(TrainError::BadLabel {
        label,
        classes: probs.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(cross_entropy(&[0.0, 1.0], 1).unwrap(), 0.0);
        let uniform = [0.125; 8];
        assert!((cross_entropy(&uniform, 3).unwrap() - 8f64.ln()).abs() < 1e-12);
        assert!((cross_entropy(&uniform, 3).unwrap() - 2.07944).abs() < 1e-5);
        let clamped = cross_entropy(&[1.0, 0.0], 1).unwrap();
        assert!((clamped - 1e12f64.ln()).abs() < 1e-12);
        assert!(matches!(cross_entropy(&[1.0], 1), Err(TrainError::BadLabel { .. })));
    }

    proptest! {
        #[test]
        fn always_finite(p in prop::collection::vec(0.0f64..=1.0, 1..10), idx in 0usize..10) {
            let label = idx % p.len();
            prop_assert!(cross_entropy(&p, label).unwrap().is_finite());
        }
    }
}
