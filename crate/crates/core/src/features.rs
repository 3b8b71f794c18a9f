//! Per-block texture features.
//!
//! Every `N×N` block (N = 16) contributes one 14-value column:
//!
//! | row | feature |
//! |-----|---------|
//! | 0   | mean intensity |
//! | 1–3 | 2nd, 3rd and 4th central moments of the intensity pmf |
//! | 4   | Shannon entropy of the pmf, in bits |
//! | 5–13 | mean squared coefficient of the detail subbands LH₁, HL₁, HH₁, LH₂, HL₂, HH₂, LH₃, HL₃, HH₃ of a 3-level db2 decomposition |
//!
//! Columns follow the blocks in raster order (left to right, then top to bottom).

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::dataset::GrayImage;
use crate::error::{Error, Result};
use crate::wavelet::{dwt2d_multilevel, WaveletFilter};

pub const BLOCK_SIDE: usize = 16;
pub const FEATURE_COUNT: usize = 14;
pub const STATISTICAL_FEATURES: usize = 5;
pub const WAVELET_FEATURES: usize = 9;
pub const WAVELET_LEVELS: usize = 3;

/// A square block cut from an image, with its top-left corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub pixels: Array2<u8>,
}

impl Block {
    pub fn side(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.pixels.mapv(f64::from)
    }
}

/// Splits an image into non-overlapping `side×side` blocks in raster order.
pub fn partition_blocks(image: &GrayImage, side: usize) -> Result<Vec<Block>> {
    let (w, h) = (image.width(), image.height());
    if side == 0 || w % side != 0 || h % side != 0 {
        return Err(Error::invalid(format!(
            "image {w}x{h} is not divisible into {side}x{side} blocks"
        )));
    }
    let mut blocks = Vec::with_capacity((w / side) * (h / side));
    for by in (0..h).step_by(side) {
        for bx in (0..w).step_by(side) {
            let pixels = Array2::from_shape_fn((side, side), |(r, c)| image.get(bx + c, by + r));
            blocks.push(Block { x: bx, y: by, pixels });
        }
    }
    Ok(blocks)
}

/// Empirical distribution of the intensities present in a block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPmf {
    pub values: Vec<u8>,
    pub probs: Vec<f64>,
}

impl BlockPmf {
    /// Number of distinct intensities.
    pub fn support(&self) -> usize {
        self.values.len()
    }
}

pub fn block_pmf(pixels: &[u8]) -> Result<BlockPmf> {
    if pixels.is_empty() {
        return Err(Error::invalid("empty block"));
    }
    let mut counts = [0usize; 256];
    for &p in pixels {
        counts[p as usize] += 1;
    }
    let total = pixels.len() as f64;
    let (values, probs) = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(v, &c)| (v as u8, c as f64 / total))
        .unzip();
    Ok(BlockPmf { values, probs })
}

/// Mean, 2nd/3rd/4th central moments and entropy (bits).
pub fn statistical_features(pmf: &BlockPmf) -> [f64; STATISTICAL_FEATURES] {
    let mean: f64 = pmf.values.iter().zip(&pmf.probs).map(|(&v, p)| p * v as f64).sum();
    let (mut m2, mut m3, mut m4, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    for (&v, &p) in pmf.values.iter().zip(&pmf.probs) {
        let d = v as f64 - mean;
        let d2 = d * d;
        m2 += p * d2;
        m3 += p * d2 * d;
        m4 += p * d2 * d2;
        entropy -= p * p.log2();
    }
    [mean, m2, m3, m4, entropy]
}

/// Mean squared coefficient of each detail subband, finest level first.
pub fn wavelet_features(block: ArrayView2<'_, f64>) -> Result<[f64; WAVELET_FEATURES]> {
    let set = dwt2d_multilevel(block, WAVELET_LEVELS, &WaveletFilter::db2())?;
    let mut out = [0.0; WAVELET_FEATURES];
    for (slot, band) in out.iter_mut().zip(set.detail_subbands()) {
        *slot = band.iter().map(|v| v * v).sum::<f64>() / band.len() as f64;
    }
    Ok(out)
}

/// All 14 features of one block.
pub fn block_features(block: &Block) -> Result<[f64; FEATURE_COUNT]> {
    let pixels: Vec<u8> = block.pixels.iter().copied().collect();
    let stats = statistical_features(&block_pmf(&pixels)?);
    let wave = wavelet_features(block.to_f64().view())?;
    let mut f = [0.0; FEATURE_COUNT];
    f[..STATISTICAL_FEATURES].copy_from_slice(&stats);
    f[STATISTICAL_FEATURES..].copy_from_slice(&wave);
    Ok(f)
}

/// 14×M matrix of per-block features; column `j` belongs to block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn from_array(data: Array2<f64>) -> Result<Self> {
        if data.nrows() != FEATURE_COUNT || data.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("{FEATURE_COUNT}xM with M > 0"),
                found: format!("{}x{}", data.nrows(), data.ncols()),
            });
        }
        Ok(Self(data.as_standard_layout().into_owned()))
    }

    /// Builds from a row-major buffer of `14 * blocks` values.
    pub fn from_row_major(blocks: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT * blocks {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values for 14x{blocks}", FEATURE_COUNT * blocks),
                found: values.len().to_string(),
            });
        }
        let data = Array2::from_shape_vec((FEATURE_COUNT, blocks), values)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::from_array(data)
    }

    pub fn zeros(blocks: usize) -> Self {
        Self(Array2::zeros((FEATURE_COUNT, blocks)))
    }

    /// Number of blocks (columns).
    pub fn blocks(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.0
    }

    /// Feature `i` across all blocks.
    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    /// Row-major values (feature-major).
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("standard layout")
    }

    pub fn get(&self, feature: usize, block: usize) -> f64 {
        self.0[[feature, block]]
    }

    pub(crate) fn check_same_shape(&self, other: &FeatureMatrix) -> Result<()> {
        if self.0.dim() != other.0.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.0.dim()),
                found: format!("{:?}", other.0.dim()),
            });
        }
        Ok(())
    }
}

/// Feature matrix of a whole image.
pub fn extract_feature_matrix(image: &GrayImage, side: usize) -> Result<FeatureMatrix> {
    let blocks = partition_blocks(image, side)?;
    let columns = blocks
        .par_iter()
        .map(block_features)
        .collect::<Result<Vec<_>>>()?;
    let mut data = Array2::zeros((FEATURE_COUNT, columns.len()));
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[[i, j]] = *v;
        }
    }
    FeatureMatrix::from_array(data)
}
