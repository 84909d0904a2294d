//! Small deterministic numeric kernel shared by the rest of the crate.
//!
//! Everything on the learning path is `f64` and every reduction runs in a
//! fixed order, so results are bit-reproducible for a given input.

mod fft;
mod gradcheck;
mod mat;
mod prng;

pub use fft::{dft_direct, fft_radix2, ifft_radix2, Complex};
pub use gradcheck::check_gradient;
pub use mat::{matmul, Mat};
pub use prng::{derive_seed, Prng};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("FFT length {0} is not a power of two")]
    BadLength(usize),
    #[error("non-finite value encountered at coordinate {0}")]
    NonFiniteValue(usize),
}
