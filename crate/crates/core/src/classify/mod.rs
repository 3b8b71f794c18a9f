//! Template gallery and the two identification rules.
//!
//! Both rules compare a probe against per-person templates: the elementwise
//! mean of that person's training feature matrices, kept separately for each
//! spectrum. [`identify_mdc`] picks the smallest weighted squared distance
//! averaged over spectra; [`identify_wmv`] lets every feature row of every
//! spectrum vote for its nearest person and picks the highest weighted tally.
//! All argmin/argmax ties resolve to the lowest person id.

mod fit;
mod mdc;
mod model_io;
mod wmv;

use std::collections::BTreeMap;

pub use fit::{fit_alpha, fit_w, ALPHA_EPSILON};
pub use mdc::{distance, identify_mdc, mdc_distances};
pub use wmv::{identify_wmv, ScoreBoard};

use crate::dataset::{SpectralSet, Spectrum};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FEATURE_COUNT};

pub type PersonId = u32;

/// Feature matrices of one capture, one per spectrum.
pub type SpectralFeatures = SpectralSet<FeatureMatrix>;

/// A training capture with its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub person: PersonId,
    pub features: SpectralFeatures,
}

impl LabeledSample {
    /// Groups loose `(person, spectrum, matrix)` triples into captures, keyed by
    /// `(person, capture)` and emitted in key order.
    pub fn group(
        parts: impl IntoIterator<Item = (PersonId, u32, Spectrum, FeatureMatrix)>,
    ) -> Result<Vec<LabeledSample>> {
        let mut grouped: BTreeMap<(PersonId, u32), Vec<(Spectrum, FeatureMatrix)>> = BTreeMap::new();
        for (person, capture, spectrum, m) in parts {
            grouped.entry((person, capture)).or_default().push((spectrum, m));
        }
        grouped
            .into_iter()
            .map(|((person, _), parts)| {
                Ok(LabeledSample {
                    person,
                    features: SpectralSet::from_parts(parts)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonTemplate {
    pub person: PersonId,
    pub templates: SpectralFeatures,
}

/// Per-row normalisation `alpha` and importance `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    alpha: [f64; FEATURE_COUNT],
    w: [f64; FEATURE_COUNT],
}

impl ModelWeights {
    pub fn new(alpha: [f64; FEATURE_COUNT], w: [f64; FEATURE_COUNT]) -> Result<Self> {
        if let Some(i) = alpha.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::invalid(format!("alpha[{i}] = {} must be positive", alpha[i])));
        }
        if let Some(i) = w.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!("w[{i}] = {} must lie in [0, 1]", w[i])));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::invalid("at least one feature weight must be positive"));
        }
        Ok(Self { alpha, w })
    }

    pub fn uniform() -> Self {
        Self {
            alpha: [1.0; FEATURE_COUNT],
            w: [1.0; FEATURE_COUNT],
        }
    }

    pub fn alpha(&self) -> &[f64; FEATURE_COUNT] {
        &self.alpha
    }

    pub fn w(&self) -> &[f64; FEATURE_COUNT] {
        &self.w
    }

    /// Combined row factor `w_i * alpha_i` used by the distance classifier.
    pub fn row_factor(&self, i: usize) -> f64 {
        self.w[i] * self.alpha[i]
    }
}

/// Mean feature matrix per person and spectrum, in ascending person order.
pub fn build_templates(training: &[LabeledSample]) -> Result<Vec<PersonTemplate>> {
    let first = training
        .first()
        .ok_or_else(|| Error::invalid("no training samples"))?;
    let reference = &first.features[Spectrum::Red];

    let mut by_person: BTreeMap<PersonId, Vec<&SpectralFeatures>> = BTreeMap::new();
    for s in training {
        for (_, m) in s.features.iter() {
            reference.check_same_shape(m)?;
        }
        by_person.entry(s.person).or_default().push(&s.features);
    }

    Ok(by_person
        .into_iter()
        .map(|(person, samples)| {
            let n = samples.len() as f64;
            let templates = SpectralSet::from_fn(|spectrum| {
                let mut acc = FeatureMatrix::zeros(reference.blocks());
                for s in &samples {
                    *acc.as_array_mut() += s[spectrum].as_array();
                }
                acc.as_array_mut().mapv_inplace(|v| v / n);
                acc
            });
            PersonTemplate { person, templates }
        })
        .collect())
}

/// Immutable enrolled gallery with fitted weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GalleryModel {
    templates: Vec<PersonTemplate>,
    weights: ModelWeights,
    block_side: usize,
    blocks: usize,
}

impl GalleryModel {
    pub fn new(mut templates: Vec<PersonTemplate>, weights: ModelWeights, block_side: usize) -> Result<Self> {
        templates.sort_by_key(|t| t.person);
        if templates.windows(2).any(|w| w[0].person == w[1].person) {
            return Err(Error::invalid("duplicate person id in gallery"));
        }
        let blocks = match templates.first() {
            Some(t) => t.templates[Spectrum::Red].blocks(),
            None => 0,
        };
        for t in &templates {
            for (_, m) in t.templates.iter() {
                if m.blocks() != blocks {
                    return Err(Error::DimensionMismatch {
                        expected: format!("14x{blocks} templates"),
                        found: format!("14x{} for person {}", m.blocks(), t.person),
                    });
                }
            }
        }
        Ok(Self {
            templates,
            weights,
            block_side,
            blocks,
        })
    }

    /// Fits alpha, w and templates from training captures only.
    pub fn fit(training: &[LabeledSample], block_side: usize) -> Result<Self> {
        let templates = build_templates(training)?;
        let alpha = fit_alpha(training)?;
        let mut w = fit_w(training, &alpha)?;
        if w.iter().all(|v| *v == 0.0) {
            log::warn!("no feature row identifies anyone on its own; falling back to uniform weights");
            w = [1.0; FEATURE_COUNT];
        }
        Self::new(templates, ModelWeights::new(alpha, w)?, block_side)
    }

    pub fn templates(&self) -> &[PersonTemplate] {
        &self.templates
    }

    pub fn weights(&self) -> &ModelWeights {
        &self.weights
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn person_ids(&self) -> Vec<PersonId> {
        self.templates.iter().map(|t| t.person).collect()
    }

    pub fn with_weights(&self, weights: ModelWeights) -> Self {
        Self {
            weights,
            ..self.clone()
        }
    }

    pub(crate) fn check_probe(&self, probe: &SpectralFeatures) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::EmptyGallery);
        }
        for (s, m) in probe.iter() {
            if m.blocks() != self.blocks {
                return Err(Error::DimensionMismatch {
                    expected: format!("14x{} probe in spectrum {s}", self.blocks),
                    found: format!("14x{}", m.blocks()),
                });
            }
        }
        Ok(())
    }
}
