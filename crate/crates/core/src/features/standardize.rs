use super::{FeatureClip, FeatureError};
use crate::numerics::Mat;

pub const STD_EPSILON: f64 = 1e-8;

/// Per-dimension z-score parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, frames: &Mat) -> Result<Mat, FeatureError> {
        apply_standardizer(self, frames)
    }
}

/// Mean and standard deviation of every dimension over all frames of the
/// given (training) clips.
pub fn fit_standardizer<'a, I>(clips: I) -> Result<Standardizer, FeatureError>
where
    I: IntoIterator<Item = &'a FeatureClip>,
{
    let mut dim = None;
    let mut count = 0usize;
    let mut sum = Vec::new();
    let clips: Vec<&FeatureClip> = clips.into_iter().collect();
    for clip in &clips {
        let d = *dim.get_or_insert(clip.feature_dim);
        if clip.feature_dim != d {
            return Err(FeatureError::ShapeMismatch(format!(
                "clip {} has {} features, expected {d}",
                clip.clip_id, clip.feature_dim
            )));
        }
        if sum.is_empty() {
            sum = vec![0.0; d];
        }
        for frame in clip.frames.chunks_exact(d) {
            for (s, &v) in sum.iter_mut().zip(frame) {
                *s += f64::from(v);
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(FeatureError::NoTrainingData);
    }
    let n = count as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let d = mean.len();
    let mut sq = vec![0.0; d];
    for clip in &clips {
        for frame in clip.frames.chunks_exact(d) {
            for ((s, &v), &m) in sq.iter_mut().zip(frame).zip(&mean) {
                let c = f64::from(v) - m;
                *s += c * c;
            }
        }
    }
    let std = sq.iter().map(|s| (s / n).sqrt()).collect();
    Ok(Standardizer { mean, std })
}

/// `(x - mean) / (std + 1e-8)` per dimension.
pub fn apply_standardizer(std: &Standardizer, frames: &Mat) -> Result<Mat, FeatureError> {
    if frames.cols() != std.dim() {
        return Err(FeatureError::ShapeMismatch(format!(
            "frames have {} features, standardizer has {}",
            frames.cols(),
            std.dim()
        )));
    }
    let mut out = frames.clone();
    for t in 0..out.rows() {
        for ((v, &m), &s) in out.row_mut(t).iter_mut().zip(&std.mean).zip(&std.std) {
            *v = (*v - m) / (s + STD_EPSILON);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Prng;

    fn clip(dim: usize, frames: Vec<f32>) -> FeatureClip {
        FeatureClip {
            feature_dim: dim,
            frame_count: frames.len() / dim,
            frames,
            label: 0,
            clip_id: "c".into(),
            fold: 0,
        }
    }

    #[test]
    fn two_frame_toy_set() {
        let c = clip(1, vec![0.0, 2.0]);
        let s = fit_standardizer([&c]).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert_eq!(s.std, vec![1.0]);
        let z = apply_standardizer(&s, &c.to_mat()).unwrap();
        assert!((z.get(0, 0) + 1.0).abs() < 1e-7);
        assert!((z.get(1, 0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn constant_dimension_maps_to_zero() {
        let c = clip(2, vec![3.0, 1.0, 3.0, 2.0, 3.0, 5.0]);
        let s = fit_standardizer([&c]).unwrap();
        let z = apply_standardizer(&s, &c.to_mat()).unwrap();
        for t in 0..3 {
            assert_eq!(z.get(t, 0), 0.0);
        }
    }

    #[test]
    fn self_application_is_standard() {
        let mut rng = Prng::new(21);
        let frames: Vec<f32> = (0..400 * 3).map(|_| (rng.gaussian() * 4.0 + 7.0) as f32).collect();
        let a = clip(3, frames[..600].to_vec());
        let b = clip(3, frames[600..].to_vec());
        let s = fit_standardizer([&a, &b]).unwrap();
        let mut all = a.to_mat().into_vec();
        all.extend(b.to_mat().into_vec());
        let z = apply_standardizer(&s, &Mat::from_vec(400, 3, all).unwrap()).unwrap();
        for d in 0..3 {
            let col: Vec<f64> = (0..400).map(|t| z.get(t, d)).collect();
            let mean = col.iter().sum::<f64>() / 400.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 400.0;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn no_training_data() {
        let empty: [&FeatureClip; 0] = [];
        assert!(matches!(fit_standardizer(empty), Err(FeatureError::NoTrainingData)));
    }
}
