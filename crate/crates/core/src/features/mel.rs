use super::FeatureError;
use crate::numerics::{matmul, Mat};

/// HTK mel scale.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters with peak 1, one row per filter, one column per FFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct MelBank {
    pub filters: Mat,
    /// `n_mels + 2` edge frequencies in Hz; filter `i` rises from edge `i`
    /// to a peak at edge `i + 1` and falls to zero at edge `i + 2`.
    pub edges_hz: Vec<f64>,
}

impl MelBank {
    pub fn new(n_mels: usize, fft_size: usize, rate: u32, fmin: f64, fmax: f64) -> Self {
        let (mlo, mhi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges_hz: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let bins = fft_size / 2 + 1;
        let mut filters = Mat::zeros(n_mels, bins);
        for m in 0..n_mels {
            let (lo, mid, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
            for b in 0..bins {
                let f = b as f64 * f64::from(rate) / fft_size as f64;
                let w = if f > lo && f <= mid {
                    (f - lo) / (mid - lo)
                } else if f > mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                filters.set(m, b, w);
            }
        }
        Self { filters, edges_hz }
    }

    pub fn n_mels(&self) -> usize {
        self.filters.rows()
    }

    pub fn bins(&self) -> usize {
        self.filters.cols()
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.edges_hz[1..self.edges_hz.len() - 1]
    }
}

/// Bank spanning 0 Hz to Nyquist.
pub fn build_mel_bank(n_mels: usize, fft_size: usize, rate: u32) -> MelBank {
    MelBank::new(n_mels, fft_size, rate, 0.0, f64::from(rate) / 2.0)
}

/// `log10(power . bank^T + 1e-10)`.
pub fn mel_log(power: &Mat, bank: &MelBank) -> Result<Mat, FeatureError> {
    mel_log_with(power, bank, 1e-10, 10.0)
}

pub fn mel_log_with(power: &Mat, bank: &MelBank, floor: f64, base: f64) -> Result<Mat, FeatureError> {
    if power.cols() != bank.bins() {
        return Err(FeatureError::ShapeMismatch(format!(
            "power has {} bins, mel bank expects {}",
            power.cols(),
            bank.bins()
        )));
    }
    let mut out = matmul(power, &bank.filters.transpose()).expect("shapes checked");
    let ln_base = base.ln();
    for v in out.as_mut_slice() {
        *v = if base == 10.0 {
            (*v + floor).log10()
        } else {
            (*v + floor).ln() / ln_base
        };
    }
    Ok(out)
}
