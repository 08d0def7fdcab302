//! Federated GAN simulation laboratory.
//!
//! Implements FedGAN (parameter averaging across clients) and Bias-Free FedGAN
//! (averaging followed by aggregator-side retraining on samples drawn from
//! every client generator), along with dense networks, non-iid partitioners,
//! and mode-coverage metrics used to measure how biased the generated data is.

pub mod adam;
pub mod cli;
pub mod data;
pub mod error;
pub mod federation;
pub mod gan;
pub mod matrix;
pub mod metrics;
pub mod nn;
pub mod snapshot;

pub use error::{Error, Result};
pub use matrix::Matrix;
