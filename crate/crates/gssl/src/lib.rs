//! Sampling-theoretic graph semi-supervised learning on similarity graphs:
//! generative models, Gaussian-kernel graphs, spectral bandwidth machinery,
//! labeled-set selection with bandlimited reconstruction, and Monte Carlo
//! experiment harnesses.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
