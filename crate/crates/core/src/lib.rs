//! Palmprint identification from block-wise statistical and wavelet features.
//!
//! Pipeline: [`dataset`] loads (or synthesises) 128×128 grayscale captures in
//! four spectra; [`features`] turns each capture into a 14×64 matrix of
//! per-block features; [`classify`] enrolls per-person templates and
//! identifies probes with a weighted minimum-distance rule or a weighted
//! majority vote; [`eval`] runs repeated train/test trials.

pub mod classify;
pub mod dataset;
mod error;
pub mod eval;
pub mod features;
pub mod rng;
pub mod wavelet;

pub use classify::{
    build_templates, distance, identify_mdc, identify_wmv, GalleryModel, LabeledSample, ModelWeights, PersonId,
    PersonTemplate, ScoreBoard, SpectralFeatures,
};
pub use dataset::{DatasetManifest, GrayImage, SampleKey, SpectralSet, Spectrum};
pub use error::{Error, Result};
pub use eval::{EvalReport, SplitConfig};
pub use features::{extract_feature_matrix, FeatureMatrix, BLOCK_SIDE, FEATURE_COUNT};
