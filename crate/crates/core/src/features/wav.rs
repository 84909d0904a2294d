use super::FeatureError;
use std::fs;
use std::path::Path;

/// Mono PCM samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmClip {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<PcmClip, FeatureError> {
    parse_wav(&fs::read(path)?)
}

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Decodes 16-bit integer PCM, averaging channels to mono.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmClip, FeatureError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(FeatureError::NotRiff);
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(&bytes[pos + 4..pos + 8]) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + 16 > bytes.len() {
                    return Err(FeatureError::TruncatedData);
                }
                let f = &bytes[body..body + size.min(bytes.len() - body)];
                let mut tag = le_u16(&f[0..2]);
                let channels = le_u16(&f[2..4]);
                let rate = le_u32(&f[4..8]);
                let bits = le_u16(&f[14..16]);
                if tag == 0xFFFE && f.len() >= 26 {
                    // WAVE_FORMAT_EXTENSIBLE: the sub-format GUID starts with the real tag.
                    tag = le_u16(&f[24..26]);
                }
                if tag != 1 {
                    return Err(FeatureError::UnsupportedCodec(format!("format tag {tag:#06x}")));
                }
                if bits != 16 {
                    return Err(FeatureError::UnsupportedCodec(format!("{bits}-bit samples")));
                }
                if channels == 0 {
                    return Err(FeatureError::UnsupportedCodec("zero channels".into()));
                }
                if rate == 0 {
                    return Err(FeatureError::BadRate(rate));
                }
                format = Some((channels, rate));
            }
            b"data" => {
                let (channels, rate) = format.ok_or(FeatureError::UnsupportedCodec(
                    "data chunk before fmt chunk".into(),
                ))?;
                if body + size > bytes.len() {
                    return Err(FeatureError::TruncatedData);
                }
                let frame_bytes = 2 * channels as usize;
                if !size.is_multiple_of(frame_bytes) {
                    return Err(FeatureError::TruncatedData);
                }
                let data = &bytes[body..body + size];
                let samples = data
                    .chunks_exact(frame_bytes)
                    .map(|frame| {
                        let sum: f64 = frame
                            .chunks_exact(2)
                            .map(|s| f64::from(i16::from_le_bytes([s[0], s[1]])))
                            .sum();
                        sum / f64::from(channels) / 32768.0
                    })
                    .collect();
                return Ok(PcmClip {
                    sample_rate: rate,
                    samples,
                });
            }
            _ => {}
        }
        // Chunks are padded to an even length.
        pos = body + size + (size & 1);
    }
    if format.is_none() {
        Err(FeatureError::NotRiff)
    } else {
        Err(FeatureError::TruncatedData)
    }
}

/// 16-bit mono PCM WAV bytes; samples are clipped to `[-1, 1]` and rounded.
pub fn wav_bytes(sample_rate: u32, samples: &[f64]) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_wav(path: impl AsRef<Path>, sample_rate: u32, samples: &[f64]) -> Result<(), FeatureError> {
    fs::write(path, wav_bytes(sample_rate, samples))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-assembled header so the decoder is not tested against its own encoder.
    fn raw_wav(tag: u16, channels: u16, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        b.extend_from_slice(b"WAVEfmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&tag.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&8000u32.to_le_bytes());
        b.extend_from_slice(&(8000 * u32::from(channels) * u32::from(bits) / 8).to_le_bytes());
        b.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        b.extend_from_slice(&bits.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(data.len() as u32).to_le_bytes());
        b.extend_from_slice(data);
        b
    }

    #[test]
    fn most_negative_sample_is_minus_one() {
        let clip = parse_wav(&raw_wav(1, 1, 16, &i16::MIN.to_le_bytes())).unwrap();
        assert_eq!(clip.samples, vec![-1.0]);
        assert_eq!(clip.sample_rate, 8000);
    }

    #[test]
    fn stereo_is_averaged() {
        let mut data = Vec::new();
        data.extend_from_slice(&16384i16.to_le_bytes());
        data.extend_from_slice(&(-16384i16).to_le_bytes());
        let clip = parse_wav(&raw_wav(1, 2, 16, &data)).unwrap();
        assert_eq!(clip.samples, vec![0.0]);
    }

    #[test]
    fn float_wav_is_rejected() {
        let r = parse_wav(&raw_wav(3, 1, 32, &[0; 8]));
        assert!(matches!(r, Err(FeatureError::UnsupportedCodec(_))));
        let r = parse_wav(&raw_wav(1, 1, 24, &[0; 6]));
        assert!(matches!(r, Err(FeatureError::UnsupportedCodec(_))));
    }

    #[test]
    fn not_riff() {
        assert!(matches!(parse_wav(b"OggS...."), Err(FeatureError::NotRiff)));
    }

    #[test]
    fn truncated_data_chunk() {
        let mut b = raw_wav(1, 1, 16, &[0; 8]);
        b.truncate(b.len() - 3);
        assert!(matches!(parse_wav(&b), Err(FeatureError::TruncatedData)));
    }

    #[test]
    fn encoder_round_trip() {
        let samples = vec![0.0, 0.5, -0.5, 1.0, -1.0];
        let clip = parse_wav(&wav_bytes(22050, &samples)).unwrap();
        assert_eq!(clip.sample_rate, 22050);
        for (a, b) in clip.samples.iter().zip(&samples) {
            assert!((a - b).abs() < 1.0 / 32768.0 + 1e-12);
        }
    }
}
