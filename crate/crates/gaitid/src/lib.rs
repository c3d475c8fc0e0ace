//! Gait-based legitimate-user identification from smartphone motion
//! signals.
//!
//! The pipeline: windowed tri-axial signal ingestion, a 72-dimensional
//! time/frequency feature vector per window, Extended Sammon Projection
//! (or a PCA baseline) for dimensionality reduction, a wavelet-kernel
//! extreme learning machine for classification with PSO-tuned kernel
//! parameters, and cross-validated evaluation with confidence intervals
//! and per-stage timing.
//!
//! ```text
//! recordings -> moving-average filter -> windows -> 72 features
//!            -> [0,1] normalization -> ESP / PCA -> KELM -> report
//! ```
//!
//! Every capability has a runnable demo under `examples/`; the `gaitid`
//! binary wraps the same functions behind `synth`, `extract`, `reduce`,
//! `train`, `evaluate` and `benchmark` subcommands.

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod kelm;
pub mod matdoc;
pub mod projection;
pub mod pso;
pub mod signal;
pub mod util;

pub use error::{GaitError, Result};
