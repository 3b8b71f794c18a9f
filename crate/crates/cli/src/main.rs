use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use palmprint_core::dataset::{self, load_image, load_manifest, manifest_path, DatasetManifest};
use palmprint_core::eval::{self, FeatureStore, SplitConfig};
use palmprint_core::{
    extract_feature_matrix, identify_mdc, identify_wmv, GalleryModel, SpectralSet, Spectrum, BLOCK_SIDE,
};

#[derive(Debug, Parser)]
#[command(name = "palmprint", version, about = "Multispectral palmprint identification")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a deterministic synthetic dataset.
    Gen {
        #[arg(long)]
        persons: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit templates and weights on one split and write the model.
    Train {
        /// Dataset directory or manifest file.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        train_per_person: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model output path.
        #[arg(long)]
        out: PathBuf,
        /// Train on every capture, leaving no test data.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = BLOCK_SIDE)]
        block_size: usize,
    },
    /// Identify one probe given its four spectral images.
    Identify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        red: Option<PathBuf>,
        #[arg(long)]
        green: Option<PathBuf>,
        #[arg(long)]
        blue: Option<PathBuf>,
        #[arg(long)]
        nir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Wmv)]
        method: Method,
    },
    /// Run repeated train/test trials for each training ratio.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Training captures per person, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = BLOCK_SIDE)]
        block_size: usize,
        /// Also print the reference accuracy table.
        #[arg(long)]
        show_reference: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Mdc,
    Wmv,
}

/// Exit 2 for usage errors, 1 for everything that fails at run time.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<palmprint_core::Error> for Failure {
    fn from(e: palmprint_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_block_size(side: usize) -> CmdResult {
    if side == 0 || !side.is_multiple_of(8) {
        return Err(usage(format!("--block-size must be a positive multiple of 8, got {side}")));
    }
    Ok(())
}

fn open_dataset(path: &Path) -> Result<DatasetManifest, Failure> {
    let manifest = manifest_path(path);
    load_manifest(&manifest)
        .with_context(|| format!("loading dataset {}", manifest.display()))
        .map_err(Failure::Runtime)
}

fn cmd_gen(persons: usize, samples: usize, seed: u64, out: &Path) -> CmdResult {
    if persons < 2 {
        return Err(usage(format!("--persons must be at least 2, got {persons}")));
    }
    if samples < 2 {
        return Err(usage(format!("--samples must be at least 2, got {samples}")));
    }
    let manifest = dataset::generate_synthetic(persons, samples, seed, out)
        .with_context(|| format!("generating dataset in {}", out.display()))?;
    println!("{}", out.join(dataset::MANIFEST_FILE).display());
    log::info!("{} records", manifest.records.len());
    Ok(())
}

fn cmd_train(
    dataset: &Path,
    train_per_person: usize,
    seed: u64,
    out: &Path,
    all: bool,
    block_size: usize,
) -> CmdResult {
    check_block_size(block_size)?;
    if train_per_person < 2 {
        return Err(usage(format!("--train-per-person must be at least 2, got {train_per_person}")));
    }
    let manifest = open_dataset(dataset)?;
    let samples = manifest.samples_per_person;
    if train_per_person > samples || (train_per_person == samples && !all) {
        return Err(usage(format!(
            "--train-per-person {train_per_person} leaves no test captures out of {samples}; pass --all to train on everything"
        )));
    }

    let keys = if all && train_per_person == samples {
        manifest.samples().into_iter().map(|(k, _)| k).collect()
    } else {
        let config = SplitConfig {
            train_per_person,
            trials: 1,
            rng_seed: seed,
        };
        eval::split(&manifest, &config, 0)?.train
    };
    let store = FeatureStore::extract(&manifest, block_size)?;
    let model = eval::fit_trial(&store.labeled(&keys)?, block_size)?;
    model
        .save(out)
        .with_context(|| format!("writing model {}", out.display()))?;

    println!("model: {}", out.display());
    println!("persons: {}", model.templates().len());
    println!("alpha: {:?}", model.weights().alpha());
    println!("w: {:?}", model.weights().w());
    Ok(())
}

fn cmd_identify(model: &Path, paths: [Option<PathBuf>; 4], method: Method) -> CmdResult {
    let parts: Vec<(Spectrum, PathBuf)> = Spectrum::ALL
        .into_iter()
        .zip(paths)
        .filter_map(|(s, p)| p.map(|p| (s, p)))
        .collect();
    let paths = SpectralSet::from_parts(parts).map_err(|e| usage(format!("{e}; all of --red --green --blue --nir are required")))?;

    let model = GalleryModel::load(model).with_context(|| format!("loading model {}", model.display()))?;
    let probe = paths.try_map(|_, p| -> anyhow::Result<_> {
        let image = load_image(p).with_context(|| format!("reading {}", p.display()))?;
        Ok(extract_feature_matrix(&image, model.block_side())?)
    })?;

    match method {
        Method::Mdc => {
            let person = identify_mdc(&probe, &model)?;
            println!("person: {person}");
        }
        Method::Wmv => {
            let (person, board) = identify_wmv(&probe, &model)?;
            println!("person: {person}");
            for (rank, (id, score)) in board.top(3).into_iter().enumerate() {
                println!("  #{} person {id} score {score:.6}", rank + 1);
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    dataset: &Path,
    ratios: &[usize],
    trials: usize,
    seed: u64,
    report: Option<&Path>,
    block_size: usize,
    show_reference: bool,
) -> CmdResult {
    check_block_size(block_size)?;
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let manifest = open_dataset(dataset)?;
    let configs: Vec<SplitConfig> = ratios
        .iter()
        .map(|&train_per_person| SplitConfig {
            train_per_person,
            trials,
            rng_seed: seed,
        })
        .collect();
    for c in &configs {
        c.validate(manifest.samples_per_person).map_err(|e| usage(e.to_string()))?;
    }

    let store = FeatureStore::extract(&manifest, block_size)?;
    let reports = configs
        .iter()
        .map(|c| eval::run_with_store(&store, &manifest, c))
        .collect::<palmprint_core::Result<Vec<_>>>()?;

    print!("{}", eval::render_report(&reports));
    if show_reference {
        println!();
        print!("{}", eval::render_reference());
    }
    if let Some(path) = report {
        let doc = serde_json::json!({ "reports": reports });
        let text = serde_json::to_string_pretty(&doc).context("serializing report")?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();

    let result = match cli.command {
        Command::Gen { persons, samples, seed, out } => cmd_gen(persons, samples, seed, &out),
        Command::Train {
            dataset,
            train_per_person,
            seed,
            out,
            all,
            block_size,
        } => cmd_train(&dataset, train_per_person, seed, &out, all, block_size),
        Command::Identify {
            model,
            red,
            green,
            blue,
            nir,
            method,
        } => cmd_identify(&model, [red, green, blue, nir], method),
        Command::Eval {
            dataset,
            ratios,
            trials,
            seed,
            report,
            block_size,
            show_reference,
        } => cmd_eval(&dataset, &ratios, trials, seed, report.as_deref(), block_size, show_reference),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
