//! Conditional and masked conditional neural networks (CLNN / MCLNN) for
//! classifying multidimensional temporal signals such as spectrograms.
//!
//! - [`masking`]: band-structured binary masks.
//! - [`numerics`]: matrices, seeded PRNG, radix-2 FFT, gradient checking.
//! - [`network`]: conditional layers, pooling, dense head, model files.
//! - [`features`]: WAV to standardized log-mel segments, `.mcf` files.
//! - [`training`]: ADAM, dropout, fold training, cross-validation, voting.
//! - [`config`], [`synth`], [`cli`]: experiment configuration, synthetic
//!   corpus generation and the command-line front end.

pub mod features;
pub mod masking;
pub mod network;
pub mod numerics;
pub mod training;
pub mod config;
pub mod synth;
pub mod cli;
