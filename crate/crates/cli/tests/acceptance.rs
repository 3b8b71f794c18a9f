//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

// `!(err <= tol)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ndarray::Array2;

use palmprint_core::classify::{
    identify_mdc, identify_wmv, mdc_distances, GalleryModel, ModelWeights, PersonTemplate,
};
use palmprint_core::dataset::{generate_synthetic, load_manifest, save_image, GrayImage};
use palmprint_core::eval::{self, run_trial, run_with_store, split, FeatureStore, SplitConfig, REFERENCE_ACCURACY};
use palmprint_core::features::{block_features, partition_blocks, FeatureMatrix};
use palmprint_core::rng::SplitMix64;
use palmprint_core::wavelet::{dwt2d_multilevel, idwt2d_multilevel, WaveletFilter};
use palmprint_core::{extract_feature_matrix, SpectralFeatures, SpectralSet, BLOCK_SIDE};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn grid(a: &Array2<f64>) -> oracle::Grid {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn capture(f: &SpectralFeatures) -> oracle::Capture {
    f.values().iter().map(|m| (0..14).map(|i| m.row(i).to_vec()).collect()).collect()
}

fn random_capture(rng: &mut SplitMix64, blocks: usize) -> SpectralFeatures {
    SpectralSet::from_fn(|_| {
        FeatureMatrix::from_row_major(blocks, (0..14 * blocks).map(|_| rng.uniform(0.0, 100.0)).collect()).unwrap()
    })
}

fn palmprint(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_palmprint")).args(args).output().expect("binary runs")
}

/// Reference figures are displayed, never asserted against.
fn ac1_reference_values() -> Outcome {
    let expected = [(3, 97.42, 99.95), (4, 99.72, 99.99), (5, 99.51, 99.99), (6, 100.0, 99.99)];
    ensure!(REFERENCE_ACCURACY == expected, "reference table differs: {REFERENCE_ACCURACY:?}");
    let text = eval::render_reference();
    for needle in ["97.42", "99.72", "99.51", "100.00", "99.95", "99.99"] {
        ensure!(text.contains(needle), "rendered reference lacks {needle}");
    }
    Ok("reference table displayed only, not asserted".into())
}

fn ac2_wavelet() -> Outcome {
    let start = Instant::now();
    let filter = WaveletFilter::db2();
    let mut rng = SplitMix64::new(0xAC2);
    let (mut worst_energy, mut worst_rec, mut worst_oracle) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let block = Array2::from_shape_fn((16, 16), |_| rng.uniform(0.0, 255.0));
        let set = dwt2d_multilevel(block.view(), 3, &filter).map_err(|e| e.to_string())?;
        let e_in: f64 = block.iter().map(|v| v * v).sum();
        worst_energy = worst_energy.max((set.energy() - e_in).abs() / e_in);

        let rec = idwt2d_multilevel(&set, &filter).map_err(|e| e.to_string())?;
        worst_rec = worst_rec.max(max_abs(&rec, &block));

        let reference = oracle::naive_multilevel(&grid(&block), 3);
        let ours = set.detail_subbands().chain(std::iter::once(&set.approx));
        for (band, expected) in ours.zip(&reference) {
            for (x, y) in band.iter().zip(expected.iter().flatten()) {
                worst_oracle = worst_oracle.max((x - y).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst_energy <= 1e-9, "relative energy error {worst_energy:e}");
    ensure!(worst_rec <= 1e-9, "reconstruction error {worst_rec:e}");
    ensure!(worst_oracle <= 1e-9, "oracle mismatch {worst_oracle:e}");
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "energy {worst_energy:.1e} rel, reconstruction {worst_rec:.1e}, oracle {worst_oracle:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn ac3_feature_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xAC3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let image = GrayImage::from_fn(128, 128, |_, _| rng.below(256) as u8);
        let ours = extract_feature_matrix(&image, BLOCK_SIDE).map_err(|e| e.to_string())?;
        ensure!(ours.as_array().dim() == (14, 64), "shape {:?}", ours.as_array().dim());
        let reference = oracle::reference_feature_matrix(image.pixels(), 128, 128, BLOCK_SIDE);
        for (i, row) in reference.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                worst = worst.max((ours.get(i, j) - b).abs() / b.abs().max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-9, "max scaled deviation {worst:e}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("20 images, 14x64, max deviation {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn ac4_analytic_features() -> Outcome {
    let features_of = |pixels: Vec<u8>| {
        let img = GrayImage::new(16, 16, pixels).unwrap();
        block_features(&partition_blocks(&img, 16).unwrap()[0]).unwrap()
    };
    let c = 137u8;
    let f = features_of(vec![c; 256]);
    ensure!((f[0] - c as f64).abs() <= 1e-9, "constant mean {}", f[0]);
    ensure!(f[1..].iter().all(|v| v.abs() <= 1e-9), "constant block non-mean features {:?}", &f[1..]);

    let f = features_of((0..256).map(|k| if k < 128 { 0 } else { 255 }).collect());
    ensure!((f[0] - 127.5).abs() <= 1e-9, "f1 {}", f[0]);
    ensure!((f[1] - 16256.25).abs() <= 1e-9, "f2 {}", f[1]);
    ensure!(f[2].abs() <= 1e-9, "f3 {}", f[2]);
    ensure!((f[4] - 1.0).abs() <= 1e-9, "f5 {}", f[4]);

    let f = features_of((0..=255).collect());
    ensure!((f[4] - 8.0).abs() <= 1e-9, "uniform entropy {}", f[4]);
    Ok("constant, two-level and 256-level blocks exact".into())
}

fn ac5_classifiers() -> Outcome {
    let mut rng = SplitMix64::new(0xAC5);
    for case in 0..50 {
        let templates: Vec<PersonTemplate> = (0..5)
            .map(|p| PersonTemplate { person: p, templates: random_capture(&mut rng, 8) })
            .collect();
        // Dyadic weights keep every partial sum exact.
        let w: [f64; 14] = std::array::from_fn(|_| (1 + rng.below(64)) as f64 / 64.0);
        let alpha: [f64; 14] = std::array::from_fn(|_| rng.uniform(0.001, 1.0));
        let model = GalleryModel::new(templates.clone(), ModelWeights::new(alpha, w).unwrap(), 16).unwrap();
        let gallery: Vec<oracle::Capture> = templates.iter().map(|t| capture(&t.templates)).collect();

        for t in &templates {
            ensure!(identify_mdc(&t.templates, &model).unwrap() == t.person, "case {case}: MDC self-match");
            ensure!(identify_wmv(&t.templates, &model).unwrap().0 == t.person, "case {case}: WMV self-match");
        }

        let probe = random_capture(&mut rng, 8);
        let (mdc_idx, dists) = oracle::brute_mdc(&capture(&probe), &gallery, &alpha, &w);
        let (wmv_idx, scores) = oracle::brute_wmv(&capture(&probe), &gallery, &alpha, &w);
        ensure!(identify_mdc(&probe, &model).unwrap() == mdc_idx as u32, "case {case}: MDC vs oracle");
        for ((_, d), e) in mdc_distances(&probe, &model).unwrap().iter().zip(&dists) {
            ensure!((d - e).abs() <= 1e-9 * e.max(1.0), "case {case}: distance {d} vs {e}");
        }
        let (who, board) = identify_wmv(&probe, &model).unwrap();
        ensure!(who == wmv_idx as u32, "case {case}: WMV vs oracle");
        ensure!(board.scores() == scores.as_slice(), "case {case}: scores {:?} vs {scores:?}", board.scores());

        let expected_total = 4.0 * w.iter().sum::<f64>();
        ensure!(board.total() == expected_total, "case {case}: total {} vs {expected_total}", board.total());
        for i in 0..14 {
            let votes: u32 = board.votes().iter().map(|v| v[i] as u32).sum();
            ensure!(votes == 4, "case {case}: row {i} cast {votes} votes");
        }
    }
    Ok("self-match, exact score conservation, 50/50 oracle agreement".into())
}

fn ac6_end_to_end(data: &Path) -> Outcome {
    let start = Instant::now();
    let out = palmprint(&["gen", "--persons", "50", "--samples", "12", "--seed", "7", "--out", data.to_str().unwrap()]);
    ensure!(out.status.code() == Some(0), "gen failed: {}", String::from_utf8_lossy(&out.stderr));
    let manifest = load_manifest(data).map_err(|e| e.to_string())?;
    ensure!(manifest.records.len() == 2400, "{} records", manifest.records.len());

    let store = FeatureStore::extract(&manifest, BLOCK_SIDE).map_err(|e| e.to_string())?;
    let half = run_with_store(&store, &manifest, &SplitConfig { train_per_person: 6, trials: 3, rng_seed: 0 })
        .map_err(|e| e.to_string())?;
    let low = run_with_store(&store, &manifest, &SplitConfig { train_per_person: 3, trials: 3, rng_seed: 0 })
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let (mdc, wmv) = (half.mdc.mean_accuracy, half.wmv.mean_accuracy);
    ensure!(mdc >= 0.99, "6/12 MDC accuracy {mdc:.4} < 0.99");
    ensure!(wmv >= 0.99, "6/12 WMV accuracy {wmv:.4} < 0.99");
    let (mdc3, wmv3) = (low.mdc.mean_accuracy, low.wmv.mean_accuracy);
    ensure!(wmv3 >= mdc3 - 0.005, "3/12 WMV {wmv3:.4} trails MDC {mdc3:.4} by more than 0.5 pp");
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "6/12: MDC {:.2}% WMV {:.2}%; 3/12: MDC {:.2}% WMV {:.2}%; {:.1} s",
        100.0 * mdc,
        100.0 * wmv,
        100.0 * mdc3,
        100.0 * wmv3,
        elapsed.as_secs_f64()
    ))
}

fn ac7_determinism(data: &Path, work: &Path) -> Outcome {
    let mut dumps = Vec::new();
    for k in 0..2 {
        let report = work.join(format!("report{k}.json"));
        let out = palmprint(&[
            "eval", "--dataset", data.to_str().unwrap(), "--ratios", "3,6", "--trials", "2", "--seed", "11",
            "--report", report.to_str().unwrap(),
        ]);
        ensure!(out.status.code() == Some(0), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for r in v["reports"].as_array_mut().ok_or("no reports array")? {
            r.as_object_mut().ok_or("report is not an object")?.remove("timing");
        }
        dumps.push(serde_json::to_vec(&v).unwrap());
    }
    ensure!(dumps[0] == dumps[1], "reports differ");
    Ok(format!("two eval runs identical ({} bytes without timing)", dumps[0].len()))
}

fn ac8_no_leakage(work: &Path) -> Outcome {
    let data = work.join("leak");
    let manifest = generate_synthetic(10, 6, 8, &data).map_err(|e| e.to_string())?;
    let config = SplitConfig { train_per_person: 3, trials: 1, rng_seed: 2 };
    let clean = run_trial(&FeatureStore::extract(&manifest, BLOCK_SIDE).unwrap(), &manifest, &config, 0)
        .map_err(|e| e.to_string())?;

    let partition = split(&manifest, &config, 0).unwrap();
    let mut rng = SplitMix64::new(0xAC8);
    for (key, paths) in manifest.samples() {
        if partition.test.contains(&key) {
            for (_, p) in paths.iter() {
                save_image(&GrayImage::from_fn(128, 128, |_, _| rng.below(256) as u8), p).map_err(|e| e.to_string())?;
            }
        }
    }
    let noisy = run_trial(&FeatureStore::extract(&manifest, BLOCK_SIDE).unwrap(), &manifest, &config, 0)
        .map_err(|e| e.to_string())?;

    ensure!(noisy.model.weights().alpha() == clean.model.weights().alpha(), "alpha changed");
    ensure!(noisy.model.weights().w() == clean.model.weights().w(), "w changed");
    ensure!(noisy.model.templates() == clean.model.templates(), "templates changed");
    let (before, after) = (clean.mdc_correct + clean.wmv_correct, noisy.mdc_correct + noisy.wmv_correct);
    ensure!(before != after, "accuracy unchanged by noise probes");
    Ok(format!(
        "model bit-identical; correct MDC {}->{} WMV {}->{} of {}",
        clean.mdc_correct, noisy.mdc_correct, clean.wmv_correct, noisy.wmv_correct, clean.probes
    ))
}

fn main() -> ExitCode {
    let work = tempfile::tempdir().expect("temp dir");
    let data = work.path().join("synthetic");

    let criteria: Vec<Criterion> = vec![
        ("AC1 reference values recorded", Box::new(ac1_reference_values)),
        ("AC2 wavelet correctness", Box::new(ac2_wavelet)),
        ("AC3 feature oracle equivalence", Box::new(ac3_feature_oracle)),
        ("AC4 analytic feature cases", Box::new(ac4_analytic_features)),
        ("AC5 classifier micro-fixtures", Box::new(ac5_classifiers)),
        ("AC6 desk-scale experiment", Box::new(|| ac6_end_to_end(&data))),
        ("AC7 eval determinism", Box::new(|| ac7_determinism(&data, work.path()))),
        ("AC8 no-leakage audit", Box::new(|| ac8_no_leakage(work.path()))),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
