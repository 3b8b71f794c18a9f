use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::Spectrum;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: file not found")]
    NotFound { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: manifest parse error: {source}")]
    ManifestParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("duplicate record for person {person}, sample {sample}, spectrum {spectrum}")]
    DuplicateRecord {
        person: u32,
        sample: u32,
        spectrum: Spectrum,
    },

    #[error("incomplete spectral tuple for person {person}, sample {sample}: missing {missing}")]
    IncompleteTuple {
        person: u32,
        sample: u32,
        missing: Spectrum,
    },

    #[error("manifest inconsistent: {0}")]
    ManifestInconsistent(String),

    #[error("missing spectrum {0}")]
    MissingSpectrum(Spectrum),

    #[error("not a PGM file (bad magic {0:?})")]
    BadMagic(String),

    #[error("unsupported image format {0}; only binary PGM (P5) is read")]
    UnsupportedFormat(String),

    #[error("malformed PGM header: {0}")]
    BadHeader(String),

    #[error("unsupported PGM maxval {0}; expected 255")]
    BadMaxval(u32),

    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("empty gallery")]
    EmptyGallery,

    #[error("model parse error: {0}")]
    ModelParse(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound { path }
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
