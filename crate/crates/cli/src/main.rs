// Copyright 2026 The lpiqe-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `lpiqe-lab`: calibrate PDU tables, generate paired datasets, score
//! reconstructions and check the noiseless encoding round trip.

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use lpiqe_core::dataset::{self, Experiment, ImageKind, Manifest, Stage};
use lpiqe_core::interp::Interpolation;
use lpiqe_core::noise::{NoiseConfig, ShotBackend};
use lpiqe_core::{lpiqe, metrics, pdu, report, GrayImage};

use config::{parse_size, FileConfig, NoisePatch};

const THREADS_ENV: &str = "LPIQE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "lpiqe-lab",
    version,
    about = "LPIQE encoding with PDU noise correction"
)]
struct Cli {
    /// Root seed for every random stream in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// TOML file with defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print only the final summary line.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure probe phases on the noisy backend and write a PDU table.
    Calibrate(CalibrateArgs),
    /// Generate images, run them through the backend and write a dataset.
    GenDataset(GenDatasetArgs),
    /// Score one stage of a dataset against the originals.
    Evaluate(EvaluateArgs),
    /// Encode and decode a PGM with exact probabilities.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Number of probe phases (at least 2).
    #[arg(long)]
    granularity: Option<usize>,
    /// Shots per probe.
    #[arg(long)]
    shots: Option<u64>,
    /// Noise configuration TOML.
    #[arg(long, value_name = "PATH")]
    noise: Option<PathBuf>,
    /// `monotone-cubic` or `linear`.
    #[arg(long)]
    interpolation: Option<Interpolation>,
    /// Output table path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenDatasetArgs {
    /// E1, E2, E3 or E4.
    #[arg(long)]
    experiment: Option<Experiment>,
    /// Number of images.
    #[arg(long)]
    count: Option<usize>,
    /// Image size as WxH.
    #[arg(long)]
    size: Option<String>,
    /// Noise configuration TOML.
    #[arg(long, value_name = "PATH")]
    noise: Option<PathBuf>,
    /// PDU table (required for E3 and E4).
    #[arg(long, value_name = "PATH")]
    pdu: Option<PathBuf>,
    /// Output directory (must be empty or absent).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Fraction of samples in the train split.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Comma-separated image kinds: random, gradient, blob, stripes.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<ImageKind>>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Dataset directory.
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// raw, pdu or gan.
    #[arg(long)]
    stage: Option<Stage>,
    /// Per-image metrics CSV; the summary goes to `<stem>_summary.csv`.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Also write SVG line charts of MSE and error deviation.
    #[arg(long)]
    charts: bool,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    /// Binary PGM image.
    #[arg(long, value_name = "PATH")]
    image: PathBuf,
}

/// A failure with its exit status: 2 for bad input, 3 for runtime errors.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Failure::Usage(e) | Failure::Runtime(e)) = self;
        write!(f, "{e:#}")
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// Bad parameters and unusable inputs are usage errors; the rest are runtime.
fn classify(e: lpiqe_core::Error) -> Failure {
    use lpiqe_core::Error as E;
    match e {
        E::Io { .. } | E::Csv(_) | E::UndefinedCorrelation(_) | E::InsufficientSamples { .. } => {
            runtime(e)
        }
        _ => usage(e),
    }
}

struct Ctx {
    seed: u64,
    quiet: bool,
    file: FileConfig,
}

impl Ctx {
    fn say(&self, text: impl fmt::Display) {
        if !self.quiet {
            println!("{text}");
        }
    }

    /// Defaults, then the config file's `[noise]`, then the noise file; the
    /// run seed always wins.
    fn noise(&self, path: Option<&Path>) -> CliResult<NoiseConfig> {
        let mut cfg = self.file.noise.apply(NoiseConfig::default());
        if let Some(path) = path {
            cfg = NoisePatch::read(path).map_err(usage)?.apply(cfg);
        }
        let cfg = cfg.with_seed(self.seed);
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<String> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::read(path).map_err(usage)?,
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        quiet: cli.quiet,
        file,
    };
    match cli.command {
        Command::Calibrate(args) => calibrate(&ctx, args),
        Command::GenDataset(args) => gen_dataset(&ctx, args),
        Command::Evaluate(args) => evaluate(&ctx, args),
        Command::Roundtrip(args) => roundtrip(&ctx, args),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(anyhow!("{THREADS_ENV}={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(runtime)
}

fn parse_field<T>(name: &str, value: Option<&str>) -> CliResult<Option<T>>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| usage(anyhow!("config {name}: {e}")))
        })
        .transpose()
}

fn calibrate(ctx: &Ctx, args: CalibrateArgs) -> CliResult<String> {
    let section = &ctx.file.calibrate;
    let granularity = args.granularity.or(section.granularity).unwrap_or(5);
    let shots = args.shots.or(section.shots).unwrap_or(8192);
    let interpolation = match args.interpolation {
        Some(i) => i,
        None => parse_field("calibrate.interpolation", section.interpolation.as_deref())?
            .unwrap_or_default(),
    };
    let out = args
        .out
        .or_else(|| section.out.clone())
        .unwrap_or_else(|| PathBuf::from(dataset::PDU_TABLE_FILE));
    let noise = ctx.noise(args.noise.as_deref().or(section.noise.as_deref()))?;

    let backend = ShotBackend { cfg: noise };
    let table =
        pdu::calibrate(&backend, granularity, shots, ctx.seed, interpolation).map_err(classify)?;
    pdu::save_table(&table, &out).map_err(runtime)?;
    ctx.say(table.describe());
    Ok(format!(
        "calibrated {granularity} knots ({interpolation}, {shots} shots) -> {}",
        out.display()
    ))
}

fn gen_dataset(ctx: &Ctx, args: GenDatasetArgs) -> CliResult<String> {
    let section = &ctx.file.gen_dataset;
    let experiment = match args.experiment {
        Some(e) => e,
        None => parse_field("gen_dataset.experiment", section.experiment.as_deref())?
            .unwrap_or(Experiment::E1),
    };
    let count = args.count.or(section.count).unwrap_or(match experiment {
        Experiment::E1 | Experiment::E3 => 631,
        Experiment::E2 | Experiment::E4 => 61,
    });
    let out = args
        .out
        .or_else(|| section.out.clone())
        .ok_or_else(|| usage(anyhow!("--out is required")))?;
    let pdu_path = args.pdu.or_else(|| section.pdu.clone());
    if experiment.needs_pdu() && pdu_path.is_none() {
        return Err(usage(anyhow!(
            "experiment {experiment} needs a PDU table; run `calibrate` and pass --pdu"
        )));
    }

    let mut manifest = Manifest::new(experiment, count, ctx.seed);
    if let Some(size) = args.size.as_deref().or(section.size.as_deref()) {
        let (w, h) = parse_size(size).map_err(usage)?;
        manifest.image_size = [w, h];
    }
    if let Some(f) = args.train_fraction.or(section.train_fraction) {
        manifest.train_fraction = f;
    }
    if let Some(kinds) = args.kinds {
        manifest.kinds = kinds;
    } else if let Some(names) = &section.kinds {
        manifest.kinds = names
            .iter()
            .map(|n| parse_field("gen_dataset.kinds", Some(n)).map(Option::unwrap))
            .collect::<CliResult<_>>()?;
    }
    manifest.noise = ctx.noise(args.noise.as_deref().or(section.noise.as_deref()))?;
    manifest.validate_config().map_err(usage)?;

    let table = match &pdu_path {
        Some(path) if experiment.needs_pdu() => {
            let loaded = pdu::load_table(path, Some(&manifest.noise)).map_err(usage)?;
            if loaded.fingerprint_mismatch {
                log::warn!("continuing with a table calibrated for another noise configuration");
            }
            Some(loaded.table)
        }
        Some(_) => {
            log::warn!("experiment {experiment} does not use a PDU table; ignoring --pdu");
            None
        }
        None => None,
    };

    let manifest = dataset::run_experiment(&manifest, &out, table.as_ref()).map_err(classify)?;
    if manifest.before_summary.is_some() {
        let rows =
            report::read_metrics_csv(out.join(dataset::BEFORE_METRICS_FILE)).map_err(runtime)?;
        let samples: Vec<_> = rows.iter().map(report::MetricsRow::metrics).collect();
        let summary = metrics::aggregate(&samples).map_err(runtime)?;
        ctx.say(format!(
            "before ({} stage):\n{}",
            experiment.input_stage(),
            report::format_summary(&summary)
        ));
    }
    Ok(format!(
        "{experiment}: wrote {} pairs ({}x{}) to {}",
        manifest.samples.len(),
        manifest.width(),
        manifest.height(),
        out.display()
    ))
}

/// `<stem><suffix>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn evaluate(ctx: &Ctx, args: EvaluateArgs) -> CliResult<String> {
    let section = &ctx.file.evaluate;
    let dir = args
        .dataset
        .or_else(|| section.dataset.clone())
        .ok_or_else(|| usage(anyhow!("--dataset is required")))?;
    let stage = match args.stage {
        Some(s) => s,
        None => parse_field("evaluate.stage", section.stage.as_deref())?.unwrap_or(Stage::Raw),
    };
    let report_path = args
        .report
        .or_else(|| section.report.clone())
        .unwrap_or_else(|| dir.join(format!("{stage}_metrics.csv")));
    let charts = args.charts || section.charts.unwrap_or(false);

    let manifest = Manifest::load(&dir)
        .with_context(|| format!("loading dataset {}", dir.display()))
        .map_err(usage)?;
    let eval = dataset::evaluate(&dir, &manifest, stage).map_err(classify)?;

    if let Some(parent) = report_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .map_err(runtime)?;
    }
    report::write_metrics_csv(&report_path, &eval.rows).map_err(runtime)?;
    let summary_path = sibling(&report_path, "_summary.csv");
    report::write_summary_csv(&summary_path, &eval.report).map_err(runtime)?;
    if charts {
        let mse: Vec<f64> = eval.rows.iter().map(|r| r.mse).collect();
        let sd: Vec<f64> = eval.rows.iter().map(|r| r.err_stdev).collect();
        let name = stage.to_string();
        for (suffix, title, values) in [
            ("_mse.svg", "Mean square error per image", &mse),
            ("_err_stdev.svg", "Std dev of error per image", &sd),
        ] {
            let svg = report::line_chart_svg(title, title, &[(name.as_str(), values.as_slice())]);
            report::write_text(sibling(&report_path, suffix), &svg).map_err(runtime)?;
        }
    }
    ctx.say(format!(
        "{stage} stage:\n{}",
        report::format_summary(&eval.report)
    ));
    Ok(format!(
        "evaluated {} images ({stage}): mean R = {:.5}, mean MSE = {:.5} -> {}",
        eval.report.count,
        eval.report.pearson_r.mean,
        eval.report.mse.mean,
        report_path.display()
    ))
}

fn roundtrip(ctx: &Ctx, args: RoundtripArgs) -> CliResult<String> {
    let image = GrayImage::read_pgm(&args.image).map_err(usage)?;
    let qubits = lpiqe::qubit_count(image.width(), image.height());
    let decoded = lpiqe::analytic_round_trip(&image).map_err(classify)?;
    let differing = image
        .pixels()
        .iter()
        .zip(decoded.pixels())
        .filter(|(a, b)| a != b)
        .count();
    ctx.say(format!(
        "{}x{} image, {qubits} qubits",
        image.width(),
        image.height()
    ));
    let summary = format!("{differing} pixels differ");
    if differing > 0 {
        return Err(runtime(anyhow!(summary)));
    }
    Ok(summary)
}
