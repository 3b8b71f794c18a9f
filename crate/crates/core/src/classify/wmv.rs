use serde::Serialize;

use super::{GalleryModel, PersonId, SpectralFeatures};
use crate::dataset::Spectrum;
use crate::error::Result;
use crate::features::FEATURE_COUNT;

/// Weighted vote tally of one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreBoard {
    persons: Vec<PersonId>,
    scores: Vec<f64>,
    /// `votes[k][i]`: number of spectra in which feature row `i` voted for person `k`.
    votes: Vec<[u8; FEATURE_COUNT]>,
}

impl ScoreBoard {
    fn new(persons: Vec<PersonId>) -> Self {
        let n = persons.len();
        Self {
            persons,
            scores: vec![0.0; n],
            votes: vec![[0; FEATURE_COUNT]; n],
        }
    }

    pub fn persons(&self) -> &[PersonId] {
        &self.persons
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score_of(&self, person: PersonId) -> Option<f64> {
        self.persons.iter().position(|p| *p == person).map(|k| self.scores[k])
    }

    /// Vote counts per person and feature row.
    pub fn votes(&self) -> &[[u8; FEATURE_COUNT]] {
        &self.votes
    }

    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// Highest score; ties go to the lowest person id.
    pub fn winner(&self) -> PersonId {
        let mut best = 0;
        for k in 1..self.scores.len() {
            if self.scores[k] > self.scores[best] {
                best = k;
            }
        }
        self.persons[best]
    }

    /// The `n` best `(person, score)` pairs, by descending score then ascending id.
    pub fn top(&self, n: usize) -> Vec<(PersonId, f64)> {
        let mut ranked: Vec<(PersonId, f64)> = self.persons.iter().copied().zip(self.scores.iter().copied()).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(n);
        ranked
    }
}

/// Weighted majority vote over 4 spectra × 14 feature rows.
///
/// Each row of the probe, scaled by `alpha_i`, is compared by Euclidean norm
/// with the same row of every template; the nearest person earns `w_i`.
pub fn identify_wmv(probe: &SpectralFeatures, gallery: &GalleryModel) -> Result<(PersonId, ScoreBoard)> {
    gallery.check_probe(probe)?;
    let weights = gallery.weights();
    let templates = gallery.templates();
    let mut board = ScoreBoard::new(gallery.person_ids());

    for s in Spectrum::ALL {
        let p = &probe[s];
        for i in 0..FEATURE_COUNT {
            let a = weights.alpha()[i];
            let row = p.row(i);
            let mut best = (f64::INFINITY, 0usize);
            for (k, t) in templates.iter().enumerate() {
                let d2: f64 = row
                    .iter()
                    .zip(t.templates[s].row(i))
                    .map(|(x, y)| {
                        let d = a * (x - y);
                        d * d
                    })
                    .sum();
                if d2 < best.0 {
                    best = (d2, k);
                }
            }
            board.scores[best.1] += weights.w()[i];
            board.votes[best.1][i] += 1;
        }
    }
    Ok((board.winner(), board))
}
