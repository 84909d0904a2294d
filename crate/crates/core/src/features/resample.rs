use super::{FeatureError, PcmClip};
use std::f64::consts::PI;

const TAPS: usize = 64;
const KAISER_BETA: f64 = 8.6;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Polyphase windowed-sinc resampler: Kaiser window, 64 taps per phase,
/// cutoff at the lower of the two Nyquist frequencies. Each phase is
/// normalized to unit DC gain. Returns the input unchanged when the rates
/// already match.
pub fn resample(clip: &PcmClip, target_rate: u32) -> Result<PcmClip, FeatureError> {
    if clip.sample_rate == 0 {
        return Err(FeatureError::BadRate(clip.sample_rate));
    }
    if target_rate == 0 {
        return Err(FeatureError::BadRate(target_rate));
    }
    if clip.sample_rate == target_rate {
        return Ok(clip.clone());
    }
    let g = gcd(u64::from(clip.sample_rate), u64::from(target_rate));
    let up = u64::from(target_rate) / g;
    let down = u64::from(clip.sample_rate) / g;
    // Cutoff relative to the input Nyquist.
    let cutoff = (up as f64 / down as f64).min(1.0);
    let half = (TAPS / 2) as i64;
    let i0_beta = bessel_i0(KAISER_BETA);

    // Output sample k sits at input position k * down / up; its phase is
    // (k * down) mod up. Tap j reads input sample base + j - half + 1.
    let phases: Vec<Vec<f64>> = (0..up)
        .map(|p| {
            let frac = p as f64 / up as f64;
            let mut taps: Vec<f64> = (0..TAPS as i64)
                .map(|j| {
                    let x = (j - half + 1) as f64 - frac;
                    let r = x / half as f64;
                    let window = if r.abs() <= 1.0 {
                        bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta
                    } else {
                        0.0
                    };
                    cutoff * sinc(cutoff * x) * window
                })
                .collect();
            let sum: f64 = taps.iter().sum();
            taps.iter_mut().for_each(|t| *t /= sum);
            taps
        })
        .collect();

    let n_in = clip.samples.len() as u64;
    let n_out = (n_in * up).div_ceil(down);
    let samples = (0..n_out)
        .map(|k| {
            let pos = k * down;
            let base = (pos / up) as i64;
            let taps = &phases[(pos % up) as usize];
            let mut acc = 0.0;
            for (j, &w) in taps.iter().enumerate() {
                let idx = base + j as i64 - half + 1;
                if idx >= 0 && (idx as u64) < n_in {
                    acc += w * clip.samples[idx as usize];
                }
            }
            acc
        })
        .collect();
    Ok(PcmClip {
        sample_rate: target_rate,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_rates_match() {
        let clip = PcmClip {
            sample_rate: 22050,
            samples: vec![0.1, -0.3, 0.7],
        };
        assert_eq!(resample(&clip, 22050).unwrap(), clip);
    }

    #[test]
    fn bad_rate() {
        let clip = PcmClip {
            sample_rate: 0,
            samples: vec![],
        };
        assert!(matches!(resample(&clip, 22050), Err(FeatureError::BadRate(0))));
    }

    #[test]
    fn preserves_dc() {
        let clip = PcmClip {
            sample_rate: 44100,
            samples: vec![0.25; 4410],
        };
        let out = resample(&clip, 22050).unwrap();
        assert_eq!(out.samples.len(), 2205);
        for &v in &out.samples[TAPS..out.samples.len() - TAPS] {
            assert!((v - 0.25).abs() < 1e-6, "{v}");
        }
    }

    /// Compares against the analytic sinusoid at the output rate.
    #[test]
    fn sinusoid_amplitude_and_phase() {
        for (from, to) in [(44100u32, 22050u32), (48000, 22050), (16000, 22050)] {
            let n = from as usize / 2;
            let clip = PcmClip {
                sample_rate: from,
                samples: (0..n)
                    .map(|i| (2.0 * PI * 1000.0 * i as f64 / f64::from(from)).sin())
                    .collect(),
            };
            let out = resample(&clip, to).unwrap();
            let m = out.samples.len();
            let err = (TAPS..m - TAPS)
                .map(|k| {
                    let expect = (2.0 * PI * 1000.0 * k as f64 / f64::from(to)).sin();
                    (out.samples[k] - expect).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-3, "{from}->{to}: {err}");
        }
    }

    #[test]
    fn bessel_reference_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        // I0(1) = 1.2660658777520082
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_2).abs() < 1e-14);
    }
}
