//! # vibforge
//!
//! Turns heterogeneous public bearing-vibration recordings into a
//! standardized spectrogram benchmark.
//!
//! The pipeline, module by module:
//!
//! ```text
//! matio -> catalog -> dsp::segment -> dsp::stft -> spectro (PNG)
//!                            \                 \-> baseline (pooled features, softmax)
//!                             \-> folds (ByLoad / BySeverity plans, splits) -> eval
//! ```
//!
//! * [`matio`] reads level-5 MAT containers and plain-text signal files.
//! * [`catalog`] is the dataset registry: recordings with their operating
//!   conditions, plus file-name adapters for the supported public datasets.
//! * [`dsp`] segments recordings into fixed-duration slices and computes
//!   STFT magnitude grids, averaged spectra and time-domain statistics.
//! * [`spectro`] renders magnitude grids to fixed-size 8-bit rasters and PNGs.
//! * [`folds`] builds bias-aware K-fold plans and train/val/test splits.
//! * [`baseline`] is a classical classifier (pooled spectrogram features,
//!   ANOVA filter selection, softmax regression).
//! * [`eval`] scores predictions with balanced accuracy and macro-F1.
//! * [`synth`] generates deterministic synthetic bearing signals.

pub mod baseline;
pub mod catalog;
pub mod dsp;
pub mod eval;
pub mod folds;
pub mod hashing;
pub mod label;
pub mod matio;
pub mod pipeline;
pub mod rng;
pub mod spectro;
pub mod synth;

pub use label::HealthLabel;
