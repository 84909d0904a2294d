//! Band-structured binary masks for MCLNN layers.
//!
//! A mask has one row per input feature and one column per hidden node. Its
//! ones are laid out as runs of `bandwidth` consecutive features, repeating
//! every `l + (bandwidth - overlap)` positions of the column-major flat
//! index. A band that runs off the bottom of a column continues at the top
//! of the next one, which produces the shifted filterbank copies across
//! groups of columns. A negative overlap leaves a gap between successive
//! bands.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaskError {
    #[error("Bandwidth must lie in [1, {feature_len}], got {bandwidth}")]
    BadBandwidth { bandwidth: usize, feature_len: usize },
    #[error("Bandwidth - Overlap must be at least 1 (bandwidth {bandwidth}, overlap {overlap})")]
    BadStep { bandwidth: usize, overlap: i64 },
    #[error("mask dimensions must be positive, got {rows}x{cols}")]
    BadDims { rows: usize, cols: usize },
    #[error("column {index} out of range for a mask with {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
}

/// Shape and band parameters of a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskSpec {
    /// Feature-vector length (rows).
    pub feature_len: usize,
    /// Hidden-layer width (columns).
    pub hidden_width: usize,
    pub bandwidth: usize,
    pub overlap: i64,
}

impl MaskSpec {
    pub fn new(feature_len: usize, hidden_width: usize, bandwidth: usize, overlap: i64) -> Self {
        Self {
            feature_len,
            hidden_width,
            bandwidth,
            overlap,
        }
    }

    pub fn validate(self) -> Result<Self, MaskError> {
        if self.feature_len < 1 || self.hidden_width < 1 {
            return Err(MaskError::BadDims {
                rows: self.feature_len,
                cols: self.hidden_width,
            });
        }
        if self.bandwidth < 1 || self.bandwidth > self.feature_len {
            return Err(MaskError::BadBandwidth {
                bandwidth: self.bandwidth,
                feature_len: self.feature_len,
            });
        }
        if (self.bandwidth as i64) - self.overlap < 1 {
            return Err(MaskError::BadStep {
                bandwidth: self.bandwidth,
                overlap: self.overlap,
            });
        }
        Ok(self)
    }

    /// Distance in the flat index between the starts of successive bands.
    pub fn stride(&self) -> usize {
        (self.feature_len as i64 + self.bandwidth as i64 - self.overlap) as usize
    }
}

/// Binary `rows x cols` mask, stored row-major as 0/1 bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskStats {
    pub total_ones: usize,
    pub ones_per_column: Vec<usize>,
    pub density: f64,
}

impl MaskMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![0; rows * cols],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![1; rows * cols],
        }
    }

    /// Builds a mask from raw row-major bytes; any nonzero byte counts as 1.
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<u8>) -> Option<Self> {
        (bits.len() == rows * cols).then(|| Self {
            rows,
            cols,
            bits: bits.into_iter().map(|b| u8::from(b != 0)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col] != 0
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.bits[row * self.cols + col] = u8::from(on);
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|&b| b == 1)
    }

    /// Row indices with a 1 in column `col`, ascending.
    pub fn band_of_node(&self, col: usize) -> Result<Vec<usize>, MaskError> {
        if col >= self.cols {
            return Err(MaskError::IndexOutOfRange {
                index: col,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).filter(|&r| self.get(r, col)).collect())
    }

    /// `band_of_node` for every column.
    pub fn column_supports(&self) -> Vec<Vec<usize>> {
        (0..self.cols)
            .map(|c| (0..self.rows).filter(|&r| self.get(r, c)).collect())
            .collect()
    }

    pub fn stats(&self) -> MaskStats {
        let ones_per_column: Vec<usize> = (0..self.cols)
            .map(|c| (0..self.rows).filter(|&r| self.get(r, c)).count())
            .collect();
        let total_ones = ones_per_column.iter().sum();
        MaskStats {
            total_ones,
            ones_per_column,
            density: total_ones as f64 / (self.rows * self.cols) as f64,
        }
    }

    /// Plain PGM ("P2"): width = columns, height = rows, maxval 1.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.cols, self.rows);
        self.write_rows(&mut out, ' ');
        out
    }

    /// One line per row, columns separated by commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        self.write_rows(&mut out, ',');
        out
    }

    fn write_rows(&self, out: &mut String, sep: char) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    out.push(sep);
                }
                let _ = write!(out, "{}", self.bits[r * self.cols + c]);
            }
            out.push('\n');
        }
    }
}

pub fn validate_spec(spec: MaskSpec) -> Result<MaskSpec, MaskError> {
    spec.validate()
}

/// Lays out the bands of `spec`. Flat index `lx` maps to row `lx % l`,
/// column `lx / l`; indices past `l * e` are dropped.
pub fn generate_mask(spec: MaskSpec) -> Result<MaskMatrix, MaskError> {
    let spec = spec.validate()?;
    let l = spec.feature_len;
    let total = l * spec.hidden_width;
    let stride = spec.stride();
    let mut mask = MaskMatrix::zeros(l, spec.hidden_width);
    let mut start = 0;
    while start < total {
        for lx in start..(start + spec.bandwidth).min(total) {
            mask.set(lx % l, lx / l, true);
        }
        start += stride;
    }
    Ok(mask)
}

pub fn band_of_node(mask: &MaskMatrix, col: usize) -> Result<Vec<usize>, MaskError> {
    mask.band_of_node(col)
}

pub fn mask_stats(mask: &MaskMatrix) -> MaskStats {
    mask.stats()
}
