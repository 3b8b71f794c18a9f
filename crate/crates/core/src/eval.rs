//! Repeated train/test evaluation over a multispectral dataset.
//!
//! For every trial each person's captures are shuffled with a SplitMix64
//! stream derived from `(seed, train_per_person, trial, person)`; the first
//! `train_per_person` captures train and the rest are probes. All four
//! spectra of a capture always land on the same side. Fitting only ever sees
//! the training captures: [`fit_trial`] takes nothing else.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{identify_mdc, identify_wmv, GalleryModel, LabeledSample, SpectralFeatures};
use crate::dataset::{load_image, DatasetManifest, SampleKey};
use crate::error::{Error, Result};
use crate::features::extract_feature_matrix;
use crate::rng::SplitMix64;

/// Accuracies reported for the 500-person, 12-capture multispectral corpus,
/// as `(train_per_person, MDC %, WMV %)`. Kept for side-by-side display only.
pub const REFERENCE_ACCURACY: [(usize, f64, f64); 4] =
    [(3, 97.42, 99.95), (4, 99.72, 99.99), (5, 99.51, 99.99), (6, 100.0, 99.99)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_per_person: usize,
    pub trials: usize,
    pub rng_seed: u64,
}

impl SplitConfig {
    pub fn validate(&self, samples_per_person: usize) -> Result<()> {
        if self.train_per_person < 2 || self.train_per_person >= samples_per_person {
            return Err(Error::Config(format!(
                "train_per_person must be in 2..{samples_per_person}, got {}",
                self.train_per_person
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<SampleKey>,
    pub test: Vec<SampleKey>,
}

fn shuffled_samples(samples: usize, train_per_person: usize, seed: u64, trial: usize, person: u32) -> Vec<u32> {
    let mut order: Vec<u32> = (0..samples as u32).collect();
    SplitMix64::from_parts(seed, &[train_per_person as u64, trial as u64, person as u64]).shuffle(&mut order);
    order
}

/// Partition for one trial. Training keys keep their shuffled order per person.
pub fn split(manifest: &DatasetManifest, config: &SplitConfig, trial: usize) -> Result<Split> {
    config.validate(manifest.samples_per_person)?;
    let mut out = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for person in manifest.person_ids() {
        let order = shuffled_samples(
            manifest.samples_per_person,
            config.train_per_person,
            config.rng_seed,
            trial,
            person,
        );
        let (train, test) = order.split_at(config.train_per_person);
        out.train.extend(train.iter().map(|&sample| SampleKey { person, sample }));
        out.test.extend(test.iter().map(|&sample| SampleKey { person, sample }));
    }
    Ok(out)
}

/// Feature matrices of every capture in a dataset.
#[derive(Debug, Clone)]
pub struct FeatureStore {
    block_side: usize,
    features: BTreeMap<SampleKey, SpectralFeatures>,
}

impl FeatureStore {
    /// Loads every image in the manifest and extracts its features.
    pub fn extract(manifest: &DatasetManifest, block_side: usize) -> Result<Self> {
        let features = manifest
            .samples()
            .into_par_iter()
            .map(|(key, paths)| {
                let f = paths.try_map(|_, p| extract_feature_matrix(&load_image(p)?, block_side))?;
                Ok((key, f))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self { block_side, features })
    }

    pub fn from_features(block_side: usize, features: BTreeMap<SampleKey, SpectralFeatures>) -> Self {
        Self { block_side, features }
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn get(&self, key: &SampleKey) -> Result<&SpectralFeatures> {
        self.features
            .get(key)
            .ok_or_else(|| Error::invalid(format!("no features for person {} sample {}", key.person, key.sample)))
    }

    pub fn labeled(&self, keys: &[SampleKey]) -> Result<Vec<LabeledSample>> {
        keys.iter()
            .map(|k| {
                Ok(LabeledSample {
                    person: k.person,
                    features: self.get(k)?.clone(),
                })
            })
            .collect()
    }
}

/// Fits templates, alpha and w from training captures alone.
pub fn fit_trial(training: &[LabeledSample], block_side: usize) -> Result<GalleryModel> {
    GalleryModel::fit(training, block_side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub model: GalleryModel,
    pub probes: usize,
    pub mdc_correct: usize,
    pub wmv_correct: usize,
    pub mdc_seconds: f64,
    pub wmv_seconds: f64,
}

/// One split, fit and identification pass.
pub fn run_trial(store: &FeatureStore, manifest: &DatasetManifest, config: &SplitConfig, trial: usize) -> Result<TrialOutcome> {
    let partition = split(manifest, config, trial)?;
    let model = fit_trial(&store.labeled(&partition.train)?, store.block_side())?;

    let results = partition
        .test
        .par_iter()
        .map(|key| {
            let probe = store.get(key)?;
            let t0 = Instant::now();
            let mdc = identify_mdc(probe, &model);
            let t1 = Instant::now();
            let wmv = identify_wmv(probe, &model);
            let t2 = Instant::now();
            let diagnose = |e: Error| {
                Error::invalid(format!(
                    "trial {trial}: probe person {} sample {} failed: {e}",
                    key.person, key.sample
                ))
            };
            let mdc = mdc.map_err(diagnose)?;
            let (wmv, _) = wmv.map_err(diagnose)?;
            Ok((
                mdc == key.person,
                wmv == key.person,
                (t1 - t0).as_secs_f64(),
                (t2 - t1).as_secs_f64(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrialOutcome {
        model,
        probes: results.len(),
        mdc_correct: results.iter().filter(|r| r.0).count(),
        wmv_correct: results.iter().filter(|r| r.1).count(),
        mdc_seconds: results.iter().map(|r| r.2).sum(),
        wmv_seconds: results.iter().map(|r| r.3).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub trial_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub correct: usize,
    pub misidentified: usize,
    pub total_probes: usize,
}

impl ClassifierReport {
    fn from_trials(correct: &[usize], probes: &[usize]) -> Self {
        let trial_accuracies: Vec<f64> = correct.iter().zip(probes).map(|(&c, &p)| c as f64 / p as f64).collect();
        let mean_accuracy = trial_accuracies.iter().sum::<f64>() / trial_accuracies.len() as f64;
        let correct: usize = correct.iter().sum();
        let total_probes: usize = probes.iter().sum();
        Self {
            trial_accuracies,
            mean_accuracy,
            correct,
            misidentified: total_probes - correct,
            total_probes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub persons: usize,
    pub samples_per_person: usize,
    pub train_per_person: usize,
    pub trials: usize,
    pub rng_seed: u64,
    pub block_side: usize,
}

/// Mean wall-clock seconds per identify call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub mdc_seconds_per_query: f64,
    pub wmv_seconds_per_query: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    pub mdc: ClassifierReport,
    pub wmv: ClassifierReport,
    pub timing: Timing,
}

/// Runs every trial of `config` against precomputed features.
pub fn run_with_store(store: &FeatureStore, manifest: &DatasetManifest, config: &SplitConfig) -> Result<EvalReport> {
    config.validate(manifest.samples_per_person)?;
    let mut outcomes = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let o = run_trial(store, manifest, config, trial)?;
        log::info!(
            "train {}/{} trial {trial}: MDC {}/{}  WMV {}/{}",
            config.train_per_person,
            manifest.samples_per_person,
            o.mdc_correct,
            o.probes,
            o.wmv_correct,
            o.probes
        );
        outcomes.push(o);
    }
    let probes: Vec<usize> = outcomes.iter().map(|o| o.probes).collect();
    let queries = probes.iter().sum::<usize>() as f64;
    Ok(EvalReport {
        config: ReportConfig {
            persons: manifest.persons,
            samples_per_person: manifest.samples_per_person,
            train_per_person: config.train_per_person,
            trials: config.trials,
            rng_seed: config.rng_seed,
            block_side: store.block_side(),
        },
        mdc: ClassifierReport::from_trials(&outcomes.iter().map(|o| o.mdc_correct).collect::<Vec<_>>(), &probes),
        wmv: ClassifierReport::from_trials(&outcomes.iter().map(|o| o.wmv_correct).collect::<Vec<_>>(), &probes),
        timing: Timing {
            mdc_seconds_per_query: outcomes.iter().map(|o| o.mdc_seconds).sum::<f64>() / queries,
            wmv_seconds_per_query: outcomes.iter().map(|o| o.wmv_seconds).sum::<f64>() / queries,
        },
    })
}

/// Loads the dataset, extracts features and runs all trials.
pub fn run_experiment(manifest: &DatasetManifest, config: &SplitConfig, block_side: usize) -> Result<EvalReport> {
    config.validate(manifest.samples_per_person)?;
    let store = FeatureStore::extract(manifest, block_side)?;
    run_with_store(&store, manifest, config)
}

/// Fixed-width accuracy table, one row per configuration in training-ratio order.
pub fn render_report(reports: &[EvalReport]) -> String {
    let mut sorted: Vec<&EvalReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.config.train_per_person);

    let mut out = String::new();
    let _ = writeln!(out, "{:<16} {:>14} {:>14}", "train ratio", "MDC acc (%)", "WMV acc (%)");
    let _ = writeln!(out, "{}", "-".repeat(46));
    for r in &sorted {
        let ratio = format!("{}/{}", r.config.train_per_person, r.config.samples_per_person);
        let _ = writeln!(
            out,
            "{:<16} {:>14.2} {:>14.2}",
            ratio,
            100.0 * r.mdc.mean_accuracy,
            100.0 * r.wmv.mean_accuracy
        );
    }
    if !sorted.is_empty() {
        let _ = writeln!(out);
    }
    for r in &sorted {
        let _ = writeln!(
            out,
            "timing {}/{}: {} trials x {} probes; per query MDC {:.3} ms, WMV {:.3} ms",
            r.config.train_per_person,
            r.config.samples_per_person,
            r.config.trials,
            r.mdc.total_probes / r.config.trials.max(1),
            1e3 * r.timing.mdc_seconds_per_query,
            1e3 * r.timing.wmv_seconds_per_query
        );
    }
    out
}

/// The reference accuracies as a table of the same shape.
pub fn render_reference() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "reference (500 persons x 12 captures):");
    for (train, mdc, wmv) in REFERENCE_ACCURACY {
        let _ = writeln!(out, "{:<16} {:>14.2} {:>14.2}", format!("{train}/12"), mdc, wmv);
    }
    out
}
