use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{build_templates, LabeledSample, PersonId, PersonTemplate, SpectralFeatures};
use crate::dataset::Spectrum;
use crate::error::{Error, Result};
use crate::features::FEATURE_COUNT;

/// Row means at or below this are treated as degenerate and get `alpha = 1`.
pub const ALPHA_EPSILON: f64 = 1e-12;

/// `alpha_i = 1 / mean |F_i|` of feature row `i` over every training capture,
/// spectrum and block.
///
/// For the non-negative rows this is the reciprocal of the row mean. The
/// third central moment is signed, so its magnitude is averaged instead.
pub fn fit_alpha(training: &[LabeledSample]) -> Result<[f64; FEATURE_COUNT]> {
    if training.is_empty() {
        return Err(Error::invalid("no training samples"));
    }
    let mut sums = [0.0; FEATURE_COUNT];
    let mut count = 0usize;
    for s in training {
        for (_, m) in s.features.iter() {
            for (i, sum) in sums.iter_mut().enumerate() {
                *sum += m.row(i).iter().map(|v| v.abs()).sum::<f64>();
            }
            count += m.blocks();
        }
    }
    let mut alpha = [1.0; FEATURE_COUNT];
    for (i, (a, sum)) in alpha.iter_mut().zip(sums).enumerate() {
        let mean = sum / count as f64;
        if mean > ALPHA_EPSILON {
            *a = 1.0 / mean;
        } else {
            log::info!("feature row {i} has mean magnitude {mean:e}; using alpha = 1");
        }
    }
    Ok(alpha)
}

/// Per-row single-feature accuracy from a symmetric 2-fold split of the
/// training captures.
///
/// Each person's captures, in the order given, are halved: the first
/// `ceil(n/2)` form fold A and the rest fold B. Templates from one fold
/// classify the other fold using only row `i`; `w_i` is the mean accuracy of
/// the two orientations.
pub fn fit_w(training: &[LabeledSample], alpha: &[f64; FEATURE_COUNT]) -> Result<[f64; FEATURE_COUNT]> {
    let mut by_person: BTreeMap<PersonId, Vec<&LabeledSample>> = BTreeMap::new();
    for s in training {
        by_person.entry(s.person).or_default().push(s);
    }
    if by_person.len() < 2 {
        return Err(Error::Config(format!(
            "feature weighting needs at least 2 persons, got {}",
            by_person.len()
        )));
    }
    if let Some((p, v)) = by_person.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::Config(format!(
            "feature weighting needs at least 2 training samples per person; person {p} has {}",
            v.len()
        )));
    }

    let mut fold_a = Vec::new();
    let mut fold_b = Vec::new();
    for samples in by_person.values() {
        let split = samples.len().div_ceil(2);
        fold_a.extend(samples[..split].iter().map(|s| (*s).clone()));
        fold_b.extend(samples[split..].iter().map(|s| (*s).clone()));
    }

    let forward = single_row_accuracy(&build_templates(&fold_a)?, &fold_b, alpha);
    let backward = single_row_accuracy(&build_templates(&fold_b)?, &fold_a, alpha);
    let mut w = [0.0; FEATURE_COUNT];
    for i in 0..FEATURE_COUNT {
        w[i] = 0.5 * (forward[i] + backward[i]);
    }
    Ok(w)
}

/// Per-row distance of a probe to a template, averaged over spectra.
pub(crate) fn row_distances(
    probe: &SpectralFeatures,
    template: &SpectralFeatures,
    alpha: &[f64; FEATURE_COUNT],
) -> [f64; FEATURE_COUNT] {
    let mut d = [0.0; FEATURE_COUNT];
    for s in Spectrum::ALL {
        let (p, t) = (&probe[s], &template[s]);
        for (i, slot) in d.iter_mut().enumerate() {
            let sq: f64 = p.row(i).iter().zip(t.row(i)).map(|(a, b)| (a - b) * (a - b)).sum();
            *slot += alpha[i] * sq;
        }
    }
    d.map(|v| v / 4.0)
}

fn single_row_accuracy(
    gallery: &[PersonTemplate],
    probes: &[LabeledSample],
    alpha: &[f64; FEATURE_COUNT],
) -> [f64; FEATURE_COUNT] {
    let correct = probes
        .par_iter()
        .map(|probe| {
            let mut best = [(f64::INFINITY, PersonId::MAX); FEATURE_COUNT];
            for t in gallery {
                let d = row_distances(&probe.features, &t.templates, alpha);
                for i in 0..FEATURE_COUNT {
                    if d[i] < best[i].0 {
                        best[i] = (d[i], t.person);
                    }
                }
            }
            best.map(|(_, who)| usize::from(who == probe.person))
        })
        .reduce(
            || [0usize; FEATURE_COUNT],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    correct.map(|c| c as f64 / probes.len() as f64)
}
