use super::{FeatureError, PcmClip};
use crate::numerics::{fft_radix2, Complex, Mat};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub fft_size: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            fft_size: 2048,
            hop: 1024,
        }
    }
}

/// Periodic Hann window.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Power spectrogram, one row per frame, `fft_size / 2 + 1` bins per row.
/// Frames start every `hop` samples with no padding, so a clip of `N`
/// samples yields `(N - fft_size) / hop + 1` frames.
pub fn stft_power(clip: &PcmClip, cfg: &StftConfig) -> Result<Mat, FeatureError> {
    if !cfg.fft_size.is_power_of_two() || cfg.hop == 0 {
        return Err(FeatureError::BadConfig(format!(
            "fft_size {} must be a power of two and hop {} positive",
            cfg.fft_size, cfg.hop
        )));
    }
    let n = clip.samples.len();
    if n < cfg.fft_size {
        return Err(FeatureError::ClipTooShort {
            samples: n,
            fft_size: cfg.fft_size,
        });
    }
    let frames = (n - cfg.fft_size) / cfg.hop + 1;
    let bins = cfg.fft_size / 2 + 1;
    let window = hann_window(cfg.fft_size);
    let mut out = Mat::zeros(frames, bins);
    let mut buf = vec![Complex::ZERO; cfg.fft_size];
    for f in 0..frames {
        let start = f * cfg.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(clip.samples[start + i] * window[i], 0.0);
        }
        let spec = fft_radix2(&buf).expect("power-of-two length");
        for (o, c) in out.row_mut(f).iter_mut().zip(&spec[..bins]) {
            *o = c.norm_sqr();
        }
    }
    Ok(out)
}
