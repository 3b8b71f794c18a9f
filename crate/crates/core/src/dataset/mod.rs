//! On-disk datasets: images, manifests and the synthetic generator.

mod image;
mod manifest;
mod spectrum;
pub mod synth;

pub use image::{decode_pgm, encode_pgm, load_image, save_image, GrayImage};
pub use manifest::{load_manifest, manifest_path, DatasetManifest, SampleKey, SampleRecord, MANIFEST_FILE};
pub use spectrum::{SpectralSet, Spectrum};
pub use synth::{generate_synthetic, generate_synthetic_with, SynthConfig, SyntheticGenerator};
