use crate::numerics::Mat;

/// Fixed-length segments cut from a clip's frame matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments {
    pub segments: Vec<Mat>,
    pub starts: Vec<usize>,
    /// Set when the clip is shorter than one segment.
    pub warning: Option<String>,
}

/// Segments of `len` frames starting at `0, hop, 2 * hop, ...`.
pub fn segment_clip(frames: &Mat, len: usize, hop: usize) -> Segments {
    assert!(len >= 1 && hop >= 1, "segment length and hop must be positive");
    let total = frames.rows();
    if total < len {
        return Segments {
            segments: Vec::new(),
            starts: Vec::new(),
            warning: Some(format!("clip has {total} frames, shorter than one segment of {len}")),
        };
    }
    let starts: Vec<usize> = (0..=(total - len) / hop).map(|i| i * hop).collect();
    let segments = starts.iter().map(|&s| frames.slice_rows(s, s + len)).collect();
    Segments {
        segments,
        starts,
        warning: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(segment_clip(&Mat::zeros(96, 4), 96, 96).segments.len(), 1);
        let s = segment_clip(&Mat::zeros(645, 4), 96, 96);
        assert_eq!(s.segments.len(), 6);
        assert!(s.warning.is_none());
        let s = segment_clip(&Mat::zeros(95, 4), 96, 96);
        assert!(s.segments.is_empty());
        assert!(s.warning.is_some());
    }

    #[test]
    fn starts_follow_hop_grid() {
        let frames = Mat::from_vec(20, 1, (0..20).map(f64::from).collect()).unwrap();
        for (len, hop) in [(3, 1), (5, 2), (7, 7), (20, 3)] {
            let s = segment_clip(&frames, len, hop);
            assert_eq!(s.segments.len(), (20 - len) / hop + 1);
            for (i, (&start, seg)) in s.starts.iter().zip(&s.segments).enumerate() {
                assert_eq!(start, i * hop);
                assert_eq!(seg.shape(), (len, 1));
                assert_eq!(seg.get(0, 0), start as f64);
            }
        }
    }
}
