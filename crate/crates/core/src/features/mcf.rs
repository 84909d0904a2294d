//! `.mcf` feature files: `"MCF1"`, then little-endian u32 version (1),
//! feature_dim, frame_count and label, then `frame_count * feature_dim`
//! f32 values, frame-major.

use super::FeatureError;
use crate::numerics::Mat;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"MCF1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

/// Log-mel frames of one clip with its label and fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClip {
    pub feature_dim: usize,
    pub frame_count: usize,
    /// Frame-major, `frame_count * feature_dim` values.
    pub frames: Vec<f32>,
    pub label: usize,
    pub clip_id: String,
    pub fold: usize,
}

impl FeatureClip {
    pub fn from_mat(frames: &Mat, label: usize, clip_id: impl Into<String>, fold: usize) -> Self {
        Self {
            feature_dim: frames.cols(),
            frame_count: frames.rows(),
            frames: frames.as_slice().iter().map(|&v| v as f32).collect(),
            label,
            clip_id: clip_id.into(),
            fold,
        }
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_vec(
            self.frame_count,
            self.feature_dim,
            self.frames.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("frame buffer matches its dimensions")
    }
}

pub fn write_features_bytes(clip: &FeatureClip) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + clip.frames.len() * 4);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, clip.feature_dim as u32, clip.frame_count as u32, clip.label as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &clip.frames {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_features(clip: &FeatureClip, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    fs::write(path, write_features_bytes(clip))?;
    Ok(())
}

/// Decodes a feature file. The file carries no clip id or fold; those are
/// filled in from the arguments.
pub fn read_features_bytes(bytes: &[u8], clip_id: &str, fold: usize) -> Result<FeatureClip, FeatureError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(FeatureError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(FeatureError::TruncatedFile);
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
    let version = word(0);
    if version != VERSION {
        return Err(FeatureError::VersionMismatch(version));
    }
    let (dim, count, label) = (word(1) as usize, word(2) as usize, word(3) as usize);
    let payload = &bytes[HEADER_LEN..];
    if dim.checked_mul(count).and_then(|n| n.checked_mul(4)) != Some(payload.len()) {
        return Err(FeatureError::TruncatedFile);
    }
    let frames = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok(FeatureClip {
        feature_dim: dim,
        frame_count: count,
        frames,
        label,
        clip_id: clip_id.to_string(),
        fold,
    })
}

/// Reads a feature file; the clip id is the file stem, the fold is 0
/// until a manifest assigns one.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureClip, FeatureError> {
    let path = path.as_ref();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_features_bytes(&fs::read(path)?, &id, 0)
}
