//! Straight-line reference implementations used to cross-check the library.
//!
//! Nothing here calls into the transform, feature or classifier code: the
//! filter taps are written out from their closed form, subbands come from an
//! explicit 2D circular convolution, moments are summed over raw pixels, and
//! the classifiers enumerate every distance and vote.

#![allow(dead_code)]

use std::collections::HashMap;

pub type Grid = Vec<Vec<f64>>;

pub fn db2_taps() -> ([f64; 4], [f64; 4]) {
    let r3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    let h = [(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d];
    let g = [h[3], -h[2], h[1], -h[0]];
    (h, g)
}

/// One analysis level by direct 16-term sums: returns (LL, LH, HL, HH) where
/// the first letter names the horizontal filter.
pub fn naive_level(x: &Grid) -> (Grid, Grid, Grid, Grid) {
    let (h, g) = db2_taps();
    let n = x.len();
    let half = n / 2;
    let band = |vert: &[f64; 4], horiz: &[f64; 4]| -> Grid {
        let mut out = vec![vec![0.0; half]; half];
        for (m, row) in out.iter_mut().enumerate() {
            for (p, cell) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc += vert[a] * horiz[b] * x[(2 * m + a) % n][(2 * p + b) % n];
                    }
                }
                *cell = acc;
            }
        }
        out
    };
    (band(&h, &h), band(&g, &h), band(&h, &g), band(&g, &g))
}

/// Detail subbands LH1, HL1, HH1, LH2, ... followed by the final LL.
pub fn naive_multilevel(x: &Grid, levels: usize) -> Vec<Grid> {
    let mut out = Vec::new();
    let mut approx = x.clone();
    for _ in 0..levels {
        let (ll, lh, hl, hh) = naive_level(&approx);
        out.extend([lh, hl, hh]);
        approx = ll;
    }
    out.push(approx);
    out
}

pub fn mean_square(g: &Grid) -> f64 {
    let n: usize = g.iter().map(Vec::len).sum();
    g.iter().flatten().map(|v| v * v).sum::<f64>() / n as f64
}

pub fn energy(g: &Grid) -> f64 {
    g.iter().flatten().map(|v| v * v).sum()
}

/// The 14 features of one block straight from its pixels.
pub fn reference_block_features(block: &[Vec<u8>]) -> [f64; 14] {
    let px: Vec<f64> = block.iter().flatten().map(|&p| p as f64).collect();
    let n = px.len() as f64;
    let mean = px.iter().sum::<f64>() / n;
    let moment = |k: i32| px.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;

    let mut counts: HashMap<u8, usize> = HashMap::new();
    for &p in block.iter().flatten() {
        *counts.entry(p).or_default() += 1;
    }
    let entropy = -counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>();

    let grid: Grid = block.iter().map(|r| r.iter().map(|&p| p as f64).collect()).collect();
    let bands = naive_multilevel(&grid, 3);
    let mut f = [0.0; 14];
    f[0] = mean;
    f[1] = moment(2);
    f[2] = moment(3);
    f[3] = moment(4);
    f[4] = entropy;
    for i in 0..9 {
        f[5 + i] = mean_square(&bands[i]);
    }
    f
}

/// Reference 14×M matrix (rows = features, columns = raster-ordered blocks)
/// for a row-major image.
pub fn reference_feature_matrix(pixels: &[u8], width: usize, height: usize, side: usize) -> Vec<Vec<f64>> {
    let blocks_x = width / side;
    let blocks_y = height / side;
    let mut out = vec![Vec::new(); 14];
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let block: Vec<Vec<u8>> = (0..side)
                .map(|r| (0..side).map(|c| pixels[(by * side + r) * width + bx * side + c]).collect())
                .collect();
            let f = reference_block_features(&block);
            for i in 0..14 {
                out[i].push(f[i]);
            }
        }
    }
    out
}

/// Four spectra of 14×M values.
pub type Capture = Vec<Vec<Vec<f64>>>;

/// Exhaustive minimum-distance decision; lowest index wins ties.
pub fn brute_mdc(probe: &Capture, gallery: &[Capture], alpha: &[f64], w: &[f64]) -> (usize, Vec<f64>) {
    let mut dists = Vec::new();
    for t in gallery {
        let mut total = 0.0;
        for s in 0..4 {
            for i in 0..14 {
                for j in 0..probe[s][i].len() {
                    let d = probe[s][i][j] - t[s][i][j];
                    total += w[i] * alpha[i] * d * d;
                }
            }
        }
        dists.push(total / 4.0);
    }
    let mut best = 0;
    for k in 1..dists.len() {
        if dists[k] < dists[best] {
            best = k;
        }
    }
    (best, dists)
}

/// Exhaustive tally of all 4×14 row votes.
pub fn brute_wmv(probe: &Capture, gallery: &[Capture], alpha: &[f64], w: &[f64]) -> (usize, Vec<f64>) {
    let mut scores = vec![0.0; gallery.len()];
    for s in 0..4 {
        for i in 0..14 {
            let norms: Vec<f64> = gallery
                .iter()
                .map(|t| {
                    probe[s][i]
                        .iter()
                        .zip(&t[s][i])
                        .map(|(a, b)| (alpha[i] * (a - b)).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            let mut winner = 0;
            for k in 1..norms.len() {
                if norms[k] < norms[winner] {
                    winner = k;
                }
            }
            scores[winner] += w[i];
        }
    }
    let mut best = 0;
    for k in 1..scores.len() {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    (best, scores)
}
