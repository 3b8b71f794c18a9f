//! Deterministic synthetic multispectral palm-like images.
//!
//! Each person gets a base texture: a ridged background (two oriented
//! gratings plus a soft illumination gradient) crossed by 3 to 5 smooth dark
//! curves standing in for principal lines. A sample is the base shifted by up
//! to ±2 pixels with ±3% contrast jitter; each spectrum applies a fixed gamma
//! and independent Gaussian noise. All randomness derives from the seed
//! through [`SplitMix64`] streams keyed by (person, sample, spectrum), so
//! output does not depend on thread scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::image::{save_image, GrayImage};
use super::manifest::{DatasetManifest, SampleRecord, MANIFEST_FILE};
use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const STREAM_BASE: u64 = 1;
const STREAM_SAMPLE: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub min_lines: usize,
    pub max_lines: usize,
    pub noise_sigma: f64,
    pub max_shift: i64,
    pub contrast_jitter: f64,
    /// Tone-curve exponents for R, G, B, NIR.
    pub gammas: [f64; 4],
    /// Two bases must differ by at least `separation_level` gray levels on
    /// at least `separation_fraction` of their pixels.
    pub separation_fraction: f64,
    pub separation_level: u8,
    pub max_attempts: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            min_lines: 3,
            max_lines: 5,
            noise_sigma: 6.0,
            max_shift: 2,
            contrast_jitter: 0.03,
            gammas: [0.8, 1.0, 1.2, 1.4],
            separation_fraction: 0.10,
            separation_level: 20,
            max_attempts: 256,
        }
    }
}

impl SynthConfig {
    /// Samples are exact tone-mapped copies of the base: no noise, shift or jitter.
    pub fn noiseless() -> Self {
        Self {
            noise_sigma: 0.0,
            max_shift: 0,
            contrast_jitter: 0.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("image dimensions must be positive".into()));
        }
        if self.min_lines == 0 || self.min_lines > self.max_lines {
            return Err(Error::Config(format!(
                "line count range {}..={} is empty",
                self.min_lines, self.max_lines
            )));
        }
        if self.max_shift < 0 || self.noise_sigma < 0.0 || !(0.0..1.0).contains(&self.contrast_jitter) {
            return Err(Error::Config("shift, noise and jitter must be non-negative".into()));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Config("gammas must be positive".into()));
        }
        Ok(())
    }
}

/// Base texture on a canvas padded by `max_shift` on every side.
#[derive(Debug, Clone)]
pub struct BaseTexture {
    pad: usize,
    canvas_width: usize,
    canvas: Vec<f64>,
    width: usize,
    height: usize,
}

impl BaseTexture {
    fn value(&self, x: usize, y: usize) -> f64 {
        self.canvas[y * self.canvas_width + x]
    }

    /// The unshifted, unjittered 128×128 view (gamma 1, no noise).
    pub fn image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            quantize(self.value(x + self.pad, y + self.pad))
        })
    }
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn render_base(config: &SynthConfig, rng: &mut SplitMix64) -> BaseTexture {
    let pad = config.max_shift as usize;
    let cw = config.width + 2 * pad;
    let ch = config.height + 2 * pad;
    let scale = config.width.max(config.height) as f64;

    let level = rng.uniform(150.0, 190.0);
    let gratings: Vec<(f64, f64, f64, f64)> = (0..2)
        .map(|_| {
            let theta = rng.uniform(0.0, std::f64::consts::PI);
            let period = rng.uniform(4.0, 12.0);
            let amp = rng.uniform(10.0, 22.0);
            let phase = rng.uniform(0.0, std::f64::consts::TAU);
            (theta, period, amp, phase)
        })
        .collect();
    let (gx, gy) = (rng.uniform(-25.0, 25.0), rng.uniform(-25.0, 25.0));

    let mut canvas = vec![0.0; cw * ch];
    for y in 0..ch {
        for x in 0..cw {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = level + gx * (xf / scale - 0.5) + gy * (yf / scale - 0.5);
            for &(theta, period, amp, phase) in &gratings {
                let t = xf * theta.cos() + yf * theta.sin();
                v += amp * (std::f64::consts::TAU * t / period + phase).sin();
            }
            canvas[y * cw + x] = v;
        }
    }

    let span = (config.max_lines - config.min_lines) as i64;
    let lines = config.min_lines + rng.range_inclusive(0, span) as usize;
    for _ in 0..lines {
        let p0 = (rng.uniform(0.0, cw as f64), rng.uniform(0.0, ch as f64));
        let p2 = (rng.uniform(0.0, cw as f64), rng.uniform(0.0, ch as f64));
        let p1 = (rng.uniform(0.0, cw as f64), rng.uniform(0.0, ch as f64));
        let width = rng.uniform(1.5, 3.0);
        let depth = rng.uniform(60.0, 100.0);
        stamp_curve(&mut canvas, cw, ch, [p0, p1, p2], width, depth);
    }

    BaseTexture {
        pad,
        canvas_width: cw,
        canvas,
        width: config.width,
        height: config.height,
    }
}

/// Darkens pixels near a quadratic Bezier curve with a Gaussian cross-section.
fn stamp_curve(canvas: &mut [f64], cw: usize, ch: usize, pts: [(f64, f64); 3], width: f64, depth: f64) {
    const STEPS: usize = 96;
    let poly: Vec<(f64, f64)> = (0..=STEPS)
        .map(|i| {
            let t = i as f64 / STEPS as f64;
            let u = 1.0 - t;
            (
                u * u * pts[0].0 + 2.0 * u * t * pts[1].0 + t * t * pts[2].0,
                u * u * pts[0].1 + 2.0 * u * t * pts[1].1 + t * t * pts[2].1,
            )
        })
        .collect();
    let reach = 3.0 * width;
    let mut dist = vec![f64::INFINITY; cw * ch];
    for seg in poly.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let x0 = (a.0.min(b.0) - reach).floor().max(0.0) as usize;
        let x1 = ((a.0.max(b.0) + reach).ceil().max(0.0) as usize).min(cw);
        let y0 = (a.1.min(b.1) - reach).floor().max(0.0) as usize;
        let y1 = ((a.1.max(b.1) + reach).ceil().max(0.0) as usize).min(ch);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        for y in y0..y1 {
            for x in x0..x1 {
                let (px, py) = (x as f64 - a.0, y as f64 - a.1);
                let t = if len2 > 0.0 { ((px * dx + py * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
                let (ex, ey) = (px - t * dx, py - t * dy);
                let d = &mut dist[y * cw + x];
                *d = d.min((ex * ex + ey * ey).sqrt());
            }
        }
    }
    for (v, d) in canvas.iter_mut().zip(dist) {
        if d.is_finite() {
            *v -= depth * (-0.5 * (d / width).powi(2)).exp();
        }
    }
}

fn separated(a: &GrayImage, b: &GrayImage, config: &SynthConfig) -> bool {
    let level = config.separation_level as i16;
    let differing = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .filter(|(&p, &q)| (p as i16 - q as i16).abs() >= level)
        .count();
    differing as f64 >= config.separation_fraction * a.pixels().len() as f64
}

/// Seeded generator; bases are fixed at construction.
#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    config: SynthConfig,
    seed: u64,
    bases: Vec<BaseTexture>,
}

impl SyntheticGenerator {
    pub fn new(config: SynthConfig, persons: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut bases: Vec<BaseTexture> = Vec::with_capacity(persons);
        let mut views: Vec<GrayImage> = Vec::with_capacity(persons);
        for person in 0..persons as u64 {
            let mut accepted = None;
            for attempt in 0..config.max_attempts {
                let mut rng = SplitMix64::from_parts(seed, &[STREAM_BASE, person, attempt]);
                let base = render_base(&config, &mut rng);
                let view = base.image();
                if views.iter().all(|other| separated(&view, other, &config)) {
                    accepted = Some((base, view));
                    break;
                }
                log::debug!("person {person}: base attempt {attempt} too close to an earlier person");
            }
            let (base, view) = accepted.ok_or_else(|| {
                Error::Config(format!(
                    "could not separate person {person} from earlier persons in {} attempts",
                    config.max_attempts
                ))
            })?;
            bases.push(base);
            views.push(view);
        }
        Ok(Self { config, seed, bases })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn persons(&self) -> usize {
        self.bases.len()
    }

    pub fn base(&self, person: usize) -> &BaseTexture {
        &self.bases[person]
    }

    /// Renders one capture. Shift and contrast are shared across spectra of a sample.
    pub fn render(&self, person: usize, sample: usize, spectrum: Spectrum) -> GrayImage {
        let c = &self.config;
        let base = &self.bases[person];
        let mut rng = SplitMix64::from_parts(self.seed, &[STREAM_SAMPLE, person as u64, sample as u64]);
        let dx = rng.range_inclusive(-c.max_shift, c.max_shift);
        let dy = rng.range_inclusive(-c.max_shift, c.max_shift);
        let contrast = 1.0 + rng.uniform(-c.contrast_jitter, c.contrast_jitter);

        let gamma = c.gammas[spectrum.index()];
        let mut noise = SplitMix64::from_parts(
            self.seed,
            &[STREAM_NOISE, person as u64, sample as u64, spectrum.index() as u64],
        );
        let ox = (base.pad as i64 + dx) as usize;
        let oy = (base.pad as i64 + dy) as usize;
        GrayImage::from_fn(c.width, c.height, |x, y| {
            let v = 128.0 + contrast * (base.value(x + ox, y + oy) - 128.0);
            let toned = 255.0 * (v.clamp(0.0, 255.0) / 255.0).powf(gamma);
            let n = if c.noise_sigma > 0.0 { c.noise_sigma * noise.gaussian() } else { 0.0 };
            quantize(toned + n)
        })
    }
}

pub fn image_relative_path(person: u32, sample: u32, spectrum: Spectrum) -> String {
    format!("p{person:03}/s{sample:02}_{}.pgm", spectrum.code())
}

/// Generates a dataset with default parameters into `out_dir`.
pub fn generate_synthetic(
    persons: usize,
    samples: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    generate_synthetic_with(&SynthConfig::default(), persons, samples, seed, out_dir)
}

pub fn generate_synthetic_with(
    config: &SynthConfig,
    persons: usize,
    samples: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    if persons < 2 || samples < 2 {
        return Err(Error::Config(format!(
            "need at least 2 persons and 2 samples, got {persons} and {samples}"
        )));
    }
    let out_dir = out_dir.as_ref();
    let generator = SyntheticGenerator::new(config.clone(), persons, seed)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for person in 0..persons as u32 {
        let d = out_dir.join(format!("p{person:03}"));
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let mut records = Vec::with_capacity(persons * samples * 4);
    for person in 0..persons as u32 {
        for sample in 0..samples as u32 {
            for spectrum in Spectrum::ALL {
                records.push(SampleRecord {
                    person,
                    sample,
                    spectrum,
                    path: image_relative_path(person, sample, spectrum),
                });
            }
        }
    }

    records.par_iter().try_for_each(|r| -> Result<()> {
        let img = generator.render(r.person as usize, r.sample as usize, r.spectrum);
        let path: PathBuf = out_dir.join(&r.path);
        save_image(&img, path)
    })?;

    let manifest = DatasetManifest::new(persons, samples, records, out_dir)?;
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_requests() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(generate_synthetic(1, 12, 0, dir.path()), Err(Error::Config(_))));
        assert!(matches!(generate_synthetic(5, 1, 0, dir.path()), Err(Error::Config(_))));
    }

    #[test]
    fn bases_are_pairwise_separated() {
        let config = SynthConfig::default();
        let g = SyntheticGenerator::new(config.clone(), 12, 3).unwrap();
        let views: Vec<GrayImage> = (0..12).map(|p| g.base(p).image()).collect();
        for i in 0..views.len() {
            for j in 0..i {
                assert!(separated(&views[i], &views[j], &config), "persons {i} and {j}");
            }
        }
    }

    #[test]
    fn noiseless_samples_repeat_exactly() {
        let g = SyntheticGenerator::new(SynthConfig::noiseless(), 2, 9).unwrap();
        for s in Spectrum::ALL {
            assert_eq!(g.render(1, 0, s), g.render(1, 5, s));
        }
        assert_eq!(g.render(0, 0, Spectrum::Green), g.base(0).image());
    }

    #[test]
    fn spectra_differ_by_tone_curve() {
        let g = SyntheticGenerator::new(SynthConfig::noiseless(), 2, 9).unwrap();
        let red = g.render(0, 0, Spectrum::Red);
        let nir = g.render(0, 0, Spectrum::Nir);
        let mean = |im: &GrayImage| im.pixels().iter().map(|&p| p as f64).sum::<f64>() / im.pixels().len() as f64;
        // gamma < 1 brightens, gamma > 1 darkens
        assert!(mean(&red) > mean(&nir) + 10.0);
    }

    #[test]
    fn writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_synthetic(2, 2, 1, dir.path()).unwrap();
        assert_eq!(m.records.len(), 16);
        assert!(dir.path().join(MANIFEST_FILE).is_file());
        assert!(dir.path().join("p001/s01_NIR.pgm").is_file());
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = generate_synthetic(2, 2, 1, blocker.join("sub")).unwrap_err();
        assert!(matches!(err, Error::Io { .. } | Error::NotFound { .. }), "{err:?}");
    }
}
