//! Audio to log-mel feature pipeline.
//!
//! WAV ingestion, resampling to the working rate, Hann-windowed STFT, mel
//! filterbank projection with log compression, segmentation and z-score
//! standardization, plus the `.mcf` feature container.

mod manifest;
mod mcf;
mod mel;
mod resample;
mod segment;
mod standardize;
mod stft;
mod wav;

pub use manifest::{parse_manifest, read_manifest, write_manifest, ManifestRow};
pub use mcf::{read_features, read_features_bytes, write_features, write_features_bytes, FeatureClip};
pub use mel::{build_mel_bank, hz_to_mel, mel_log, mel_log_with, mel_to_hz, MelBank};
pub use resample::resample;
pub use segment::{segment_clip, Segments};
pub use standardize::{apply_standardizer, fit_standardizer, Standardizer, STD_EPSILON};
pub use stft::{hann_window, stft_power, StftConfig};
pub use wav::{load_wav, parse_wav, wav_bytes, write_wav, PcmClip};

use crate::numerics::Mat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("not a RIFF/WAVE file")]
    NotRiff,
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedCodec(String),
    #[error("WAV data is truncated")]
    TruncatedData,
    #[error("bad sample rate {0}")]
    BadRate(u32),
    #[error("clip has {samples} samples, fewer than one FFT window of {fft_size}")]
    ClipTooShort { samples: usize, fft_size: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad STFT configuration: {0}")]
    BadConfig(String),
    #[error("no training frames to fit the standardizer")]
    NoTrainingData,
    #[error("not a feature file (bad magic)")]
    BadMagic,
    #[error("unsupported feature file version {0}")]
    VersionMismatch(u32),
    #[error("feature file is truncated or its frame count disagrees with the payload")]
    TruncatedFile,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parameters of the audio-to-feature transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub log_base: f64,
    pub log_floor: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sample_rate: 22050,
            fft_size: 2048,
            hop: 1024,
            n_mels: 256,
            fmin: 0.0,
            fmax: 11025.0,
            log_base: 10.0,
            log_floor: 1e-10,
        }
    }
}

impl FeatureConfig {
    pub fn stft(&self) -> StftConfig {
        StftConfig {
            fft_size: self.fft_size,
            hop: self.hop,
        }
    }

    pub fn mel_bank(&self) -> MelBank {
        MelBank::new(self.n_mels, self.fft_size, self.sample_rate, self.fmin, self.fmax)
    }

    /// Log-mel frames (`T x n_mels`) of a clip at any sample rate.
    pub fn extract(&self, clip: &PcmClip) -> Result<Mat, FeatureError> {
        let clip = resample(clip, self.sample_rate)?;
        let power = stft_power(&clip, &self.stft())?;
        mel_log_with(&power, &self.mel_bank(), self.log_floor, self.log_base)
    }
}
