use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Illumination channel of a capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spectrum {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "G")]
    Green,
    #[serde(rename = "B")]
    Blue,
    #[serde(rename = "NIR")]
    Nir,
}

impl Spectrum {
    pub const ALL: [Spectrum; 4] = [Spectrum::Red, Spectrum::Green, Spectrum::Blue, Spectrum::Nir];

    pub fn index(self) -> usize {
        match self {
            Spectrum::Red => 0,
            Spectrum::Green => 1,
            Spectrum::Blue => 2,
            Spectrum::Nir => 3,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Spectrum::Red => "R",
            Spectrum::Green => "G",
            Spectrum::Blue => "B",
            Spectrum::Nir => "NIR",
        }
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Spectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R" | "RED" => Ok(Spectrum::Red),
            "G" | "GREEN" => Ok(Spectrum::Green),
            "B" | "BLUE" => Ok(Spectrum::Blue),
            "NIR" => Ok(Spectrum::Nir),
            other => Err(Error::invalid(format!("unknown spectrum {other:?}"))),
        }
    }
}

/// One value per spectrum, indexed by [`Spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSet<T>([T; 4]);

impl<T> SpectralSet<T> {
    pub fn new(red: T, green: T, blue: T, nir: T) -> Self {
        Self([red, green, blue, nir])
    }

    pub fn from_fn(mut f: impl FnMut(Spectrum) -> T) -> Self {
        Self(Spectrum::ALL.map(&mut f))
    }

    /// Assembles a set from loose parts; every spectrum must appear exactly once.
    pub fn from_parts(parts: impl IntoIterator<Item = (Spectrum, T)>) -> Result<Self> {
        let mut slots: [Option<T>; 4] = [None, None, None, None];
        for (s, v) in parts {
            if slots[s.index()].replace(v).is_some() {
                return Err(Error::invalid(format!("spectrum {s} given more than once")));
            }
        }
        for s in Spectrum::ALL {
            if slots[s.index()].is_none() {
                return Err(Error::MissingSpectrum(s));
            }
        }
        Ok(Self(slots.map(|v| v.expect("checked above"))))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Spectrum, &T)> {
        Spectrum::ALL.into_iter().zip(self.0.iter())
    }

    pub fn values(&self) -> &[T; 4] {
        &self.0
    }

    pub fn map<U>(&self, mut f: impl FnMut(Spectrum, &T) -> U) -> SpectralSet<U> {
        SpectralSet::from_fn(|s| f(s, &self.0[s.index()]))
    }

    pub fn try_map<U, E>(
        &self,
        mut f: impl FnMut(Spectrum, &T) -> std::result::Result<U, E>,
    ) -> std::result::Result<SpectralSet<U>, E> {
        let [r, g, b, n] = &self.0;
        Ok(SpectralSet([
            f(Spectrum::Red, r)?,
            f(Spectrum::Green, g)?,
            f(Spectrum::Blue, b)?,
            f(Spectrum::Nir, n)?,
        ]))
    }
}

impl<T> Index<Spectrum> for SpectralSet<T> {
    type Output = T;

    fn index(&self, s: Spectrum) -> &T {
        &self.0[s.index()]
    }
}

impl<T> IndexMut<Spectrum> for SpectralSet<T> {
    fn index_mut(&mut self, s: Spectrum) -> &mut T {
        &mut self.0[s.index()]
    }
}
