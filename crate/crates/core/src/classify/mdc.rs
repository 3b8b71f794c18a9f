use super::{GalleryModel, ModelWeights, PersonId, PersonTemplate, SpectralFeatures};
use crate::dataset::Spectrum;
use crate::error::Result;
use crate::features::FEATURE_COUNT;

/// Weighted squared distance `sum_i sum_j w_i alpha_i (probe_ij - template_ij)^2`
/// per spectrum, averaged over the four spectra.
pub fn distance(probe: &SpectralFeatures, template: &PersonTemplate, weights: &ModelWeights) -> Result<f64> {
    let mut total = 0.0;
    for s in Spectrum::ALL {
        let (p, t) = (&probe[s], &template.templates[s]);
        p.check_same_shape(t)?;
        let mut d = 0.0;
        for i in 0..FEATURE_COUNT {
            let factor = weights.row_factor(i);
            if factor == 0.0 {
                continue;
            }
            let sq: f64 = p.row(i).iter().zip(t.row(i)).map(|(a, b)| (a - b) * (a - b)).sum();
            d += factor * sq;
        }
        total += d;
    }
    Ok(total / 4.0)
}

/// Distance to every enrolled person, in gallery (ascending id) order.
pub fn mdc_distances(probe: &SpectralFeatures, gallery: &GalleryModel) -> Result<Vec<(PersonId, f64)>> {
    gallery.check_probe(probe)?;
    gallery
        .templates()
        .iter()
        .map(|t| Ok((t.person, distance(probe, t, gallery.weights())?)))
        .collect()
}

/// Minimum-distance decision; ties go to the lowest person id.
pub fn identify_mdc(probe: &SpectralFeatures, gallery: &GalleryModel) -> Result<PersonId> {
    let mut best = (f64::INFINITY, PersonId::MAX);
    for (person, d) in mdc_distances(probe, gallery)? {
        if d < best.0 || best.1 == PersonId::MAX {
            best = (d, person);
        }
    }
    Ok(best.1)
}
