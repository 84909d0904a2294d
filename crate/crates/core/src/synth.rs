//! Synthetic genre-like corpus for desk-scale runs.
//!
//! Each class is a band-limited tone cluster around its own carrier,
//! amplitude-modulated at its own rate. Clips jitter the carrier, phases and
//! level, and add low-level gaussian noise; everything derives from one seed.

use crate::features::{write_manifest, write_wav, FeatureError, ManifestRow, PcmClip};
use crate::numerics::{derive_seed, Prng};
use crate::training::{stratified_folds, TrainError};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("bad synth spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub class_count: usize,
    pub clips_per_class: usize,
    pub seconds: f64,
    pub sample_rate: u32,
    pub folds: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            class_count: 8,
            clips_per_class: 20,
            seconds: 4.0,
            sample_rate: 22050,
            folds: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTemplate {
    pub carrier_hz: f64,
    pub am_hz: f64,
}

const PARTIALS: usize = 5;
const PARTIAL_SPREAD: f64 = 0.04;
const CARRIER_JITTER: f64 = 0.02;
const NOISE_STD: f64 = 0.005;
const AM_DEPTH: f64 = 0.8;

impl SynthSpec {
    /// Parses `key=value` lines over the defaults (`#` starts a comment).
    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let mut spec = Self::default();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SynthError::BadSpec(format!("expected key=value, got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = || SynthError::BadSpec(format!("bad value '{v}' for key '{k}'"));
            match k {
                "class_count" => spec.class_count = v.parse().map_err(|_| bad())?,
                "clips_per_class" => spec.clips_per_class = v.parse().map_err(|_| bad())?,
                "seconds" => spec.seconds = v.parse().map_err(|_| bad())?,
                "sample_rate" => spec.sample_rate = v.parse().map_err(|_| bad())?,
                "folds" => spec.folds = v.parse().map_err(|_| bad())?,
                "seed" => spec.seed = v.parse().map_err(|_| bad())?,
                _ => return Err(SynthError::BadSpec(format!("unknown key '{k}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.class_count == 0 || self.clips_per_class == 0 {
            return Err(SynthError::BadSpec("need at least one class and one clip".into()));
        }
        if self.seconds.is_nan() || self.seconds <= 0.0 || self.sample_rate < 8000 {
            return Err(SynthError::BadSpec(format!(
                "{} s at {} Hz is not a usable clip",
                self.seconds, self.sample_rate
            )));
        }
        Ok(())
    }

    /// Carriers log-spaced from 150 Hz to ~27% of the sample rate; AM rates
    /// step by 1.25 Hz from 2 Hz in a stride that decouples them from the carrier order.
    pub fn templates(&self) -> Vec<ClassTemplate> {
        let c = self.class_count;
        let top = 0.27 * self.sample_rate as f64;
        (0..c)
            .map(|i| {
                let frac = if c == 1 { 0.0 } else { i as f64 / (c - 1) as f64 };
                ClassTemplate {
                    carrier_hz: 150.0 * (top / 150.0).powf(frac),
                    am_hz: 2.0 + ((3 * i) % c) as f64 * 1.25,
                }
            })
            .collect()
    }

    /// Clip `index` of `class`.
    pub fn clip(&self, class: usize, index: usize) -> PcmClip {
        let t = self.templates()[class];
        let mut rng = Prng::new(derive_seed(self.seed, (class * self.clips_per_class + index) as u64));
        let rate = self.sample_rate as f64;
        let carrier = t.carrier_hz * (1.0 + CARRIER_JITTER * rng.uniform(-1.0, 1.0));
        let level = rng.uniform(0.3, 0.6);
        let am_phase = rng.uniform(0.0, 2.0 * PI);
        let partials: Vec<(f64, f64)> = (0..PARTIALS)
            .map(|p| {
                let f = carrier * (1.0 + PARTIAL_SPREAD * (p as f64 - (PARTIALS / 2) as f64));
                (2.0 * PI * f / rate, rng.uniform(0.0, 2.0 * PI))
            })
            .collect();
        let n = (self.seconds * rate).round() as usize;
        let samples = (0..n)
            .map(|s| {
                let ts = s as f64;
                let env = (1.0 + AM_DEPTH * (2.0 * PI * t.am_hz * ts / rate + am_phase).sin()) / (1.0 + AM_DEPTH);
                let tone: f64 = partials.iter().map(|&(w, ph)| (w * ts + ph).sin()).sum::<f64>() / PARTIALS as f64;
                (level * env * tone + NOISE_STD * rng.gaussian()).clamp(-1.0, 1.0)
            })
            .collect();
        PcmClip {
            sample_rate: self.sample_rate,
            samples,
        }
    }

    /// Writes `class{c}_{i}.wav` files and `manifest.csv` with stratified
    /// folds into `out_dir`, returning the manifest rows.
    pub fn write_corpus(&self, out_dir: &Path) -> Result<Vec<ManifestRow>, SynthError> {
        self.validate()?;
        std::fs::create_dir_all(out_dir).map_err(FeatureError::from)?;
        let labels: Vec<usize> = (0..self.class_count)
            .flat_map(|c| std::iter::repeat_n(c, self.clips_per_class))
            .collect();
        let folds = stratified_folds(&labels, self.folds, self.seed)?;
        let mut rows = Vec::with_capacity(labels.len());
        for (idx, (&label, &fold)) in labels.iter().zip(&folds).enumerate() {
            let i = idx % self.clips_per_class;
            let name = format!("class{label}_{i:03}.wav");
            write_wav(out_dir.join(&name), self.sample_rate, &self.clip(label, i).samples)?;
            rows.push(ManifestRow {
                path: name.into(),
                label,
                fold,
            });
        }
        write_manifest(&out_dir.join("manifest.csv"), &rows)?;
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{stft_power, StftConfig};

    #[test]
    fn templates_distinct() {
        let t = SynthSpec::default().templates();
        assert_eq!(t.len(), 8);
        for i in 0..8 {
            for j in i + 1..8 {
                assert!(t[j].carrier_hz > t[i].carrier_hz * 1.3);
                assert_ne!(t[i].am_hz, t[j].am_hz);
            }
        }
        assert!(t[7].carrier_hz < 11025.0 * 0.6);
    }

    #[test]
    fn first_clip_spectral_peak_tracks_carrier() {
        let spec = SynthSpec::default();
        let cfg = StftConfig { fft_size: 2048, hop: 1024 };
        let mut peaks = Vec::new();
        for (c, t) in spec.templates().iter().enumerate() {
            let power = stft_power(&spec.clip(c, 0), &cfg).unwrap();
            let mut total = vec![0.0; power.cols()];
            for r in 0..power.rows() {
                total.iter_mut().zip(power.row(r)).for_each(|(a, b)| *a += b);
            }
            let bin = (0..total.len()).fold(0, |b, i| if total[i] > total[b] { i } else { b });
            let hz = bin as f64 * 22050.0 / 2048.0;
            assert!((hz / t.carrier_hz - 1.0).abs() < 0.15, "class {c}: peak {hz} Hz vs {}", t.carrier_hz);
            peaks.push(bin);
        }
        peaks.dedup();
        assert_eq!(peaks.len(), 8);
    }

    #[test]
    fn clips_are_bounded_and_seeded() {
        let spec = SynthSpec::default();
        let a = spec.clip(3, 7);
        assert_eq!(a.samples.len(), 88200);
        assert!(a.samples.iter().all(|s| s.abs() <= 1.0));
        assert_eq!(a, spec.clip(3, 7));
        assert_ne!(a, spec.clip(3, 8));
        let other = SynthSpec { seed: 1, ..spec };
        assert_ne!(a, other.clip(3, 7));
    }

    #[test]
    fn spec_parsing() {
        let s = SynthSpec::parse("# small\nclips_per_class=10\nseconds=2.5\n").unwrap();
        assert_eq!((s.clips_per_class, s.seconds, s.class_count), (10, 2.5, 8));
        assert!(SynthSpec::parse("clips=3").unwrap_err().to_string().contains("clips"));
        assert!(SynthSpec::parse("seconds=0").is_err());
    }

    #[test]
    fn corpus_counts() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            seconds: 0.2,
            ..SynthSpec::default()
        };
        let rows = spec.write_corpus(dir.path()).unwrap();
        assert_eq!(rows.len(), 160);
        for f in 0..10 {
            assert_eq!(rows.iter().filter(|r| r.fold == f).count(), 16);
        }
        let manifest = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert_eq!(manifest.lines().count(), 161);
        assert!(dir.path().join("class7_019.wav").exists());
    }
}
