//! JSON form of a [`GalleryModel`]:
//!
//! ```json
//! { "persons": [ { "id": 0, "templates": { "R": [...], "G": [...], "B": [...], "NIR": [...] } } ],
//!   "alpha": [14 values], "w": [14 values], "N": 16, "M": 64 }
//! ```
//!
//! Each template is a flat row-major array of `14 * M` values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GalleryModel, ModelWeights, PersonId, PersonTemplate};
use crate::dataset::{SpectralSet, Spectrum};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FEATURE_COUNT};

#[derive(Serialize, Deserialize)]
struct TemplatesJson {
    #[serde(rename = "R")]
    red: Vec<f64>,
    #[serde(rename = "G")]
    green: Vec<f64>,
    #[serde(rename = "B")]
    blue: Vec<f64>,
    #[serde(rename = "NIR")]
    nir: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PersonJson {
    id: PersonId,
    templates: TemplatesJson,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    persons: Vec<PersonJson>,
    alpha: Vec<f64>,
    w: Vec<f64>,
    #[serde(rename = "N")]
    block_side: usize,
    #[serde(rename = "M")]
    blocks: usize,
}

fn fixed14(v: Vec<f64>, name: &str) -> Result<[f64; FEATURE_COUNT]> {
    let len = v.len();
    v.try_into().map_err(|_| Error::DimensionMismatch {
        expected: format!("{FEATURE_COUNT} {name} values"),
        found: len.to_string(),
    })
}

impl GalleryModel {
    pub fn to_json(&self) -> String {
        let flat = |s: Spectrum, t: &PersonTemplate| t.templates[s].as_slice().to_vec();
        let doc = ModelJson {
            persons: self
                .templates()
                .iter()
                .map(|t| PersonJson {
                    id: t.person,
                    templates: TemplatesJson {
                        red: flat(Spectrum::Red, t),
                        green: flat(Spectrum::Green, t),
                        blue: flat(Spectrum::Blue, t),
                        nir: flat(Spectrum::Nir, t),
                    },
                })
                .collect(),
            alpha: self.weights().alpha().to_vec(),
            w: self.weights().w().to_vec(),
            block_side: self.block_side(),
            blocks: self.blocks(),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelJson = serde_json::from_str(text)?;
        let weights = ModelWeights::new(fixed14(doc.alpha, "alpha")?, fixed14(doc.w, "w")?)?;
        let templates = doc
            .persons
            .into_iter()
            .map(|p| {
                let t = p.templates;
                let m = |v| FeatureMatrix::from_row_major(doc.blocks, v);
                Ok(PersonTemplate {
                    person: p.id,
                    templates: SpectralSet::new(m(t.red)?, m(t.green)?, m(t.blue)?, m(t.nir)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if templates.is_empty() {
            return Err(Error::EmptyGallery);
        }
        GalleryModel::new(templates, weights, doc.block_side)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
