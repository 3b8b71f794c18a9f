//! Periodic 2D discrete wavelet transform with the 4-tap Daubechies (db2) filter.
//!
//! Analysis is a circular correlation with the filter taps followed by keeping
//! even-indexed outputs:
//!
//! ```text
//! approx[n] = sum_k lowpass[k]  * x[(2n + k) mod L]
//! detail[n] = sum_k highpass[k] * x[(2n + k) mod L]
//! ```
//!
//! With orthonormal taps and periodic extension this is an orthogonal change
//! of basis, so every level preserves energy exactly (up to rounding) and
//! the inverse is the transpose.
//!
//! In 2D the row transform runs first (horizontal filtering), then the column
//! transform. Subband names give the horizontal filter first: `HL` is
//! highpass across columns and lowpass down rows, so it responds to vertical
//! edges; `LH` responds to horizontal edges; `HH` to diagonal structure.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Analysis filter pair for a 4-tap orthonormal wavelet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletFilter {
    pub lowpass: [f64; 4],
    pub highpass: [f64; 4],
}

impl WaveletFilter {
    /// Second-order Daubechies filter, lowpass normalised to sum to `sqrt(2)`.
    pub fn db2() -> Self {
        let s3 = 3f64.sqrt();
        let denom = 4.0 * std::f64::consts::SQRT_2;
        let lowpass = [
            (1.0 + s3) / denom,
            (3.0 + s3) / denom,
            (3.0 - s3) / denom,
            (1.0 - s3) / denom,
        ];
        Self::from_lowpass(lowpass)
    }

    /// Builds the quadrature mirror highpass `g[k] = (-1)^k h[3 - k]`.
    pub fn from_lowpass(lowpass: [f64; 4]) -> Self {
        let highpass = [lowpass[3], -lowpass[2], lowpass[1], -lowpass[0]];
        Self { lowpass, highpass }
    }
}

impl Default for WaveletFilter {
    fn default() -> Self {
        Self::db2()
    }
}

fn check_even_len(len: usize) -> Result<()> {
    if len < 2 || !len.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "signal length must be even and at least 2, got {len}"
        )));
    }
    Ok(())
}

/// Single-level periodic analysis of a 1D signal.
pub fn dwt1d(signal: &[f64], filter: &WaveletFilter) -> Result<(Vec<f64>, Vec<f64>)> {
    check_even_len(signal.len())?;
    let half = signal.len() / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    analyze_into(signal, filter, &mut approx, &mut detail);
    Ok((approx, detail))
}

/// Single-level periodic synthesis; the exact inverse of [`dwt1d`].
pub fn idwt1d(approx: &[f64], detail: &[f64], filter: &WaveletFilter) -> Result<Vec<f64>> {
    if approx.len() != detail.len() || approx.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: format!("equal non-empty halves, approx has {}", approx.len()),
            found: format!("detail has {}", detail.len()),
        });
    }
    let mut out = vec![0.0; approx.len() * 2];
    synthesize_into(approx, detail, filter, &mut out);
    Ok(out)
}

#[inline]
fn analyze_into(signal: &[f64], filter: &WaveletFilter, approx: &mut [f64], detail: &mut [f64]) {
    let len = signal.len();
    let (h, g) = (&filter.lowpass, &filter.highpass);
    for n in 0..len / 2 {
        let base = 2 * n;
        let (mut a, mut d) = (0.0, 0.0);
        for k in 0..4 {
            let x = signal[(base + k) % len];
            a += h[k] * x;
            d += g[k] * x;
        }
        approx[n] = a;
        detail[n] = d;
    }
}

#[inline]
fn synthesize_into(approx: &[f64], detail: &[f64], filter: &WaveletFilter, out: &mut [f64]) {
    let len = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    let (h, g) = (&filter.lowpass, &filter.highpass);
    for n in 0..approx.len() {
        let base = 2 * n;
        for k in 0..4 {
            out[(base + k) % len] += h[k] * approx[n] + g[k] * detail[n];
        }
    }
}

/// The four outputs of one 2D analysis level.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands2d {
    pub ll: Array2<f64>,
    pub lh: Array2<f64>,
    pub hl: Array2<f64>,
    pub hh: Array2<f64>,
}

/// Detail subbands of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    pub lh: Array2<f64>,
    pub hl: Array2<f64>,
    pub hh: Array2<f64>,
}

/// Multilevel decomposition: `details[0]` is the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub details: Vec<DetailLevel>,
    pub approx: Array2<f64>,
}

impl SubbandSet {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail subbands in feature order: level-major, LH/HL/HH within a level,
    /// finest level first.
    pub fn detail_subbands(&self) -> impl Iterator<Item = &Array2<f64>> {
        self.details
            .iter()
            .flat_map(|d| [&d.lh, &d.hl, &d.hh].into_iter())
    }

    /// Sum of squared coefficients over every subband, approximation included.
    pub fn energy(&self) -> f64 {
        self.detail_subbands()
            .chain(std::iter::once(&self.approx))
            .map(|b| b.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn coefficient_count(&self) -> usize {
        self.detail_subbands()
            .chain(std::iter::once(&self.approx))
            .map(|b| b.len())
            .sum()
    }
}

/// One level of separable 2D analysis on a square block.
pub fn dwt2d_level(block: ArrayView2<'_, f64>, filter: &WaveletFilter) -> Result<Subbands2d> {
    let (rows, cols) = block.dim();
    if rows != cols {
        return Err(Error::invalid(format!("block must be square, got {rows}x{cols}")));
    }
    check_even_len(rows)?;
    let n = rows;
    let half = n / 2;

    // Rows: low half in columns [0, half), high half in [half, n).
    let mut tmp = Array2::<f64>::zeros((n, n));
    let mut line = vec![0.0; n];
    let (mut lo, mut hi) = (vec![0.0; half], vec![0.0; half]);
    for (r, row) in block.axis_iter(Axis(0)).enumerate() {
        line.iter_mut().zip(row.iter()).for_each(|(d, s)| *d = *s);
        analyze_into(&line, filter, &mut lo, &mut hi);
        for c in 0..half {
            tmp[[r, c]] = lo[c];
            tmp[[r, half + c]] = hi[c];
        }
    }

    let mut out = Subbands2d {
        ll: Array2::zeros((half, half)),
        lh: Array2::zeros((half, half)),
        hl: Array2::zeros((half, half)),
        hh: Array2::zeros((half, half)),
    };
    for c in 0..n {
        for (r, v) in line.iter_mut().enumerate() {
            *v = tmp[[r, c]];
        }
        analyze_into(&line, filter, &mut lo, &mut hi);
        let (col, horizontal_high) = if c < half { (c, false) } else { (c - half, true) };
        for r in 0..half {
            if horizontal_high {
                out.hl[[r, col]] = lo[r];
                out.hh[[r, col]] = hi[r];
            } else {
                out.ll[[r, col]] = lo[r];
                out.lh[[r, col]] = hi[r];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`dwt2d_level`].
pub fn idwt2d_level(bands: &Subbands2d, filter: &WaveletFilter) -> Result<Array2<f64>> {
    let dim = bands.ll.dim();
    if dim.0 != dim.1 || dim.0 == 0 {
        return Err(Error::invalid(format!("LL must be square and non-empty, got {dim:?}")));
    }
    for (name, b) in [("LH", &bands.lh), ("HL", &bands.hl), ("HH", &bands.hh)] {
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{name} of shape {dim:?}"),
                found: format!("{:?}", b.dim()),
            });
        }
    }
    let half = dim.0;
    let n = 2 * half;

    let mut tmp = Array2::<f64>::zeros((n, n));
    let mut line = vec![0.0; n];
    let (mut lo, mut hi) = (vec![0.0; half], vec![0.0; half]);
    for c in 0..n {
        let (col, horizontal_high) = if c < half { (c, false) } else { (c - half, true) };
        for r in 0..half {
            if horizontal_high {
                lo[r] = bands.hl[[r, col]];
                hi[r] = bands.hh[[r, col]];
            } else {
                lo[r] = bands.ll[[r, col]];
                hi[r] = bands.lh[[r, col]];
            }
        }
        synthesize_into(&lo, &hi, filter, &mut line);
        for (r, v) in line.iter().enumerate() {
            tmp[[r, c]] = *v;
        }
    }

    let mut out = Array2::<f64>::zeros((n, n));
    for r in 0..n {
        for c in 0..half {
            lo[c] = tmp[[r, c]];
            hi[c] = tmp[[r, half + c]];
        }
        synthesize_into(&lo, &hi, filter, &mut line);
        for (c, v) in line.iter().enumerate() {
            out[[r, c]] = *v;
        }
    }
    Ok(out)
}

/// Recursive decomposition of the approximation band, `levels` times.
pub fn dwt2d_multilevel(
    block: ArrayView2<'_, f64>,
    levels: usize,
    filter: &WaveletFilter,
) -> Result<SubbandSet> {
    let (rows, cols) = block.dim();
    if levels == 0 {
        return Err(Error::invalid("levels must be at least 1"));
    }
    let divisor = 1usize << levels;
    if rows != cols || rows == 0 || rows % divisor != 0 {
        return Err(Error::invalid(format!(
            "block side must be square and divisible by {divisor} for {levels} levels, got {rows}x{cols}"
        )));
    }

    let mut details = Vec::with_capacity(levels);
    let mut current = dwt2d_level(block, filter)?;
    for _ in 1..levels {
        let next = dwt2d_level(current.ll.view(), filter)?;
        details.push(DetailLevel {
            lh: current.lh,
            hl: current.hl,
            hh: current.hh,
        });
        current = next;
    }
    details.push(DetailLevel {
        lh: current.lh,
        hl: current.hl,
        hh: current.hh,
    });
    Ok(SubbandSet {
        details,
        approx: current.ll,
    })
}

/// Inverse of [`dwt2d_multilevel`].
pub fn idwt2d_multilevel(set: &SubbandSet, filter: &WaveletFilter) -> Result<Array2<f64>> {
    if set.details.is_empty() {
        return Err(Error::invalid("subband set has no detail levels"));
    }
    let mut approx = set.approx.clone();
    for (depth, level) in set.details.iter().enumerate().rev() {
        let expected = approx.dim();
        if level.lh.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("level {} subbands of shape {expected:?}", depth + 1),
                found: format!("{:?}", level.lh.dim()),
            });
        }
        approx = idwt2d_level(
            &Subbands2d {
                ll: approx,
                lh: level.lh.clone(),
                hl: level.hl.clone(),
                hh: level.hh.clone(),
            },
            filter,
        )?;
    }
    Ok(approx)
}
