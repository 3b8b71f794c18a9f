//! Fixtures shared by the criterion benches.

use palmprint_core::classify::{GalleryModel, LabeledSample};
use palmprint_core::dataset::synth::{SynthConfig, SyntheticGenerator};
use palmprint_core::dataset::{GrayImage, SpectralSet, Spectrum};
use palmprint_core::{extract_feature_matrix, SpectralFeatures, BLOCK_SIDE};

pub fn palm_image(seed: u64) -> GrayImage {
    SyntheticGenerator::new(SynthConfig::default(), 1, seed)
        .expect("default config is valid")
        .render(0, 0, Spectrum::Green)
}

pub fn capture_features(generator: &SyntheticGenerator, person: usize, sample: usize) -> SpectralFeatures {
    SpectralSet::from_fn(|s| {
        extract_feature_matrix(&generator.render(person, sample, s), BLOCK_SIDE).expect("128x128 image")
    })
}

/// A fitted gallery of `persons` people with `train` captures each, plus one
/// held-out probe per person.
pub fn gallery(persons: usize, train: usize, seed: u64) -> (GalleryModel, Vec<SpectralFeatures>) {
    let generator = SyntheticGenerator::new(SynthConfig::default(), persons, seed).expect("valid config");
    let mut training = Vec::new();
    for p in 0..persons {
        for s in 0..train {
            training.push(LabeledSample {
                person: p as u32,
                features: capture_features(&generator, p, s),
            });
        }
    }
    let model = GalleryModel::fit(&training, BLOCK_SIDE).expect("fit");
    let probes = (0..persons).map(|p| capture_features(&generator, p, train)).collect();
    (model, probes)
}
