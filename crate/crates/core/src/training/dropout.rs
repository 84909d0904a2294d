use super::TrainError;
use crate::numerics::Prng;

/// Inverted-dropout mask: each entry is 0 with probability `p`, otherwise
/// `1 / (1 - p)`. Outside training (`training == false`) every entry is 1.
pub fn dropout_mask(size: usize, p: f64, training: bool, rng: &mut Prng) -> Result<Vec<f64>, TrainError> {
    if !(0.0..1.0).contains(&p) {
        return Err(TrainError::BadProbability(p));
    }
    if !training || p == 0.0 {
        return Ok(vec![1.0; size]);
    }
    let keep = 1.0 / (1.0 - p);
    Ok((0..size)
        .map(|_| if rng.next_f64() < p { 0.0 } else { keep })
        .collect())
}
