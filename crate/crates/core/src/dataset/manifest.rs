//! `manifest.json`: the index of a multispectral dataset on disk.
//!
//! ```json
//! { "persons": 2, "samples_per_person": 3,
//!   "records": [ { "person": 0, "sample": 0, "spectrum": "R", "path": "p000/s00_R.pgm" }, ... ] }
//! ```
//!
//! Record paths are relative to the directory holding the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::spectrum::{SpectralSet, Spectrum};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub person: u32,
    pub sample: u32,
    pub spectrum: Spectrum,
    pub path: String,
}

/// A person's capture, all four spectra taken together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleKey {
    pub person: u32,
    pub sample: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub persons: usize,
    pub samples_per_person: usize,
    pub records: Vec<SampleRecord>,
    #[serde(skip)]
    root: PathBuf,
}

impl DatasetManifest {
    /// Builds and validates a manifest whose record paths resolve against `root`.
    pub fn new(
        persons: usize,
        samples_per_person: usize,
        records: Vec<SampleRecord>,
        root: impl Into<PathBuf>,
    ) -> Result<Self> {
        let m = Self {
            persons,
            samples_per_person,
            records,
            root: root.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn set_root(&mut self, root: impl Into<PathBuf>) {
        self.root = root.into();
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen: BTreeMap<SampleKey, [bool; 4]> = BTreeMap::new();
        for r in &self.records {
            let slot = seen.entry(SampleKey { person: r.person, sample: r.sample }).or_default();
            if std::mem::replace(&mut slot[r.spectrum.index()], true) {
                return Err(Error::DuplicateRecord {
                    person: r.person,
                    sample: r.sample,
                    spectrum: r.spectrum,
                });
            }
        }
        for (key, present) in &seen {
            if let Some(missing) = Spectrum::ALL.into_iter().find(|s| !present[s.index()]) {
                return Err(Error::IncompleteTuple {
                    person: key.person,
                    sample: key.sample,
                    missing,
                });
            }
        }

        let mut per_person: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for key in seen.keys() {
            per_person.entry(key.person).or_default().insert(key.sample);
        }
        if per_person.len() != self.persons {
            return Err(Error::ManifestInconsistent(format!(
                "header declares {} persons, records contain {}",
                self.persons,
                per_person.len()
            )));
        }
        let expected: BTreeSet<u32> = (0..self.samples_per_person as u32).collect();
        for (person, samples) in &per_person {
            if *samples != expected {
                return Err(Error::ManifestInconsistent(format!(
                    "person {person} has samples {:?}, expected 0..{}",
                    samples, self.samples_per_person
                )));
            }
        }
        let want = self.persons * self.samples_per_person * 4;
        if self.records.len() != want {
            return Err(Error::ManifestInconsistent(format!(
                "expected {want} records, found {}",
                self.records.len()
            )));
        }
        Ok(())
    }

    /// Sorted, de-duplicated person ids.
    pub fn person_ids(&self) -> Vec<u32> {
        let ids: BTreeSet<u32> = self.records.iter().map(|r| r.person).collect();
        ids.into_iter().collect()
    }

    /// Every complete capture with its four resolved image paths, in key order.
    pub fn samples(&self) -> Vec<(SampleKey, SpectralSet<PathBuf>)> {
        let mut grouped: BTreeMap<SampleKey, Vec<(Spectrum, PathBuf)>> = BTreeMap::new();
        for r in &self.records {
            grouped
                .entry(SampleKey { person: r.person, sample: r.sample })
                .or_default()
                .push((r.spectrum, self.root.join(&r.path)));
        }
        grouped
            .into_iter()
            .map(|(k, parts)| {
                let set = SpectralSet::from_parts(parts).expect("manifest validated");
                (k, set)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Resolves `path` as either a manifest file or a directory containing one.
pub fn manifest_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Reads and validates a manifest; `path` may be the file or its directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = manifest_path(path);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut m: DatasetManifest = serde_json::from_str(&text).map_err(|source| Error::ManifestParse {
        path: path.clone(),
        source,
    })?;
    m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    m.validate()?;
    Ok(m)
}
