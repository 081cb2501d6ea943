//! Multi-label classification of protest attributes in images.
//!
//! The crate covers the full pipeline for a seven-attribute labeling task
//! (fire, flag, large crowd, other, police, sign, student):
//!
//! - [`manifest`]: line-delimited dataset manifests, linting, and seeded
//!   train/test splitting
//! - [`synthetic`]: a deterministic synthetic corpus generator for
//!   desk-scale experiments
//! - [`imageops`]: image decode/resize and the thirteen deterministic
//!   augmentation transforms
//! - [`augment`]: per-class augmentation planning that grows minority
//!   classes to explicit target counts
//! - [`svm`]: one-vs-all linear SVM trained by primal subgradient descent,
//!   with optional inverse-frequency penalty weighting
//! - [`cnn`]: a small convolutional network with hand-derived
//!   backpropagation, sigmoid cross-entropy, and ADAM
//! - [`calibrate`]: Matthews correlation coefficient and per-class
//!   probability threshold selection
//! - [`metrics`]: exact-match and Hamming losses plus per-class
//!   accuracy/precision/recall/F1 reports
//!
//! Every operation that consumes randomness takes an explicit seed and is
//! bit-reproducible for fixed inputs.

pub mod augment;
pub mod calibrate;
pub mod checkpoint;
pub mod cnn;
pub mod error;
pub mod imageops;
pub mod label;
pub mod manifest;
pub mod metrics;
pub mod rng;
pub mod svm;
pub mod synthetic;

pub use error::{Error, Result};
pub use label::{LabelVector, CLASS_NAMES, NUM_CLASSES};
