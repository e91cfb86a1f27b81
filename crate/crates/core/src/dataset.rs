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

//! Synthetic corpora, experiment runs and the on-disk dataset contract.
//!
//! A dataset directory looks like
//!
//! ```text
//! <dataset>/
//!   manifest.toml
//!   before_metrics.csv       per-image metrics of the stored input stage
//!   before_summary.csv       min/mean/max of the same
//!   pdu_table.toml           E3/E4 only, the table used for correction
//!   originals/<id>.pgm       targets
//!   raw/<id>.pgm             E1/E2 inputs (plain decode)
//!   pdu/<id>.pgm             E3/E4 inputs (PDU-corrected decode)
//!   gan/<id>.pgm             written later by the image translator, test split
//! ```
//!
//! All paths inside the manifest are relative to the dataset root.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lpiqe::{self, EncodingLayout};
use crate::metrics::{aggregate, AggregateReport, ImageMetrics};
use crate::noise::{self, NoiseConfig};
use crate::pdu::{self, PduTable};
use crate::report::{self, MetricsRow};
use crate::rng;
use crate::statevec::MAX_QUBITS;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const PDU_TABLE_FILE: &str = "pdu_table.toml";
pub const BEFORE_METRICS_FILE: &str = "before_metrics.csv";
pub const BEFORE_SUMMARY_FILE: &str = "before_summary.csv";
pub const ORIGINALS_DIR: &str = "originals";
/// Side length of the square images exchanged with the image translator.
pub const TRANSLATOR_SIDE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    /// 16x16, simulator backend, plain decode as input.
    E1,
    /// 8x8, device-like backend, plain decode as input.
    E2,
    /// 16x16, simulator backend, PDU-corrected input.
    E3,
    /// 8x8, device-like backend, PDU-corrected input.
    E4,
}

impl Experiment {
    pub fn default_size(self) -> (usize, usize) {
        match self {
            Experiment::E1 | Experiment::E3 => (16, 16),
            Experiment::E2 | Experiment::E4 => (8, 8),
        }
    }

    pub fn needs_pdu(self) -> bool {
        matches!(self, Experiment::E3 | Experiment::E4)
    }

    /// Stage whose images become the translator inputs.
    pub fn input_stage(self) -> Stage {
        if self.needs_pdu() {
            Stage::Pdu
        } else {
            Stage::Raw
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E1" => Ok(Experiment::E1),
            "E2" => Ok(Experiment::E2),
            "E3" => Ok(Experiment::E3),
            "E4" => Ok(Experiment::E4),
            _ => Err(Error::Parse(format!("unknown experiment `{s}` (E1..E4)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Pdu,
    Gan,
}

impl Stage {
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Pdu => "pdu",
            Stage::Gan => "gan",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Stage::Raw),
            "pdu" => Ok(Stage::Pdu),
            "gan" => Ok(Stage::Gan),
            _ => Err(Error::Parse(format!("unknown stage `{s}` (raw, pdu, gan)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageKind {
    Random,
    Gradient,
    Blob,
    Stripes,
}

impl ImageKind {
    pub const ALL: [ImageKind; 4] = [
        ImageKind::Random,
        ImageKind::Gradient,
        ImageKind::Blob,
        ImageKind::Stripes,
    ];
}

impl FromStr for ImageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(ImageKind::Random),
            "gradient" => Ok(ImageKind::Gradient),
            "blob" => Ok(ImageKind::Blob),
            "stripes" => Ok(ImageKind::Stripes),
            _ => Err(Error::Parse(format!("unknown image kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairedSample {
    pub id: String,
    pub input_path: String,
    pub target_path: String,
    pub stage: Stage,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub image_size: [usize; 2],
    pub sample_count: usize,
    /// Root seed for image generation.
    pub seed: u64,
    pub kinds: Vec<ImageKind>,
    pub split_seed: u64,
    pub train_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdu_table_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before_metrics: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before_summary: Option<String>,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub samples: Vec<PairedSample>,
}

impl Manifest {
    /// An unpopulated manifest with the experiment's default image size.
    pub fn new(experiment: Experiment, sample_count: usize, seed: u64) -> Self {
        let (w, h) = experiment.default_size();
        Manifest {
            schema_version: SCHEMA_VERSION,
            experiment,
            image_size: [w, h],
            sample_count,
            seed,
            kinds: ImageKind::ALL.to_vec(),
            split_seed: rng::subseed(seed, "split"),
            train_fraction: 0.9,
            pdu_table_path: None,
            before_metrics: None,
            before_summary: None,
            noise: NoiseConfig::default().with_seed(seed),
            samples: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.image_size[0]
    }

    pub fn height(&self) -> usize {
        self.image_size[1]
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Manifest =
            toml::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "manifest schema_version {} (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn load(dataset: impl AsRef<Path>) -> Result<Self> {
        let path = dataset.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Manifest::from_toml(&text)
    }

    pub fn save(&self, dataset: impl AsRef<Path>) -> Result<()> {
        let path = dataset.as_ref().join(MANIFEST_FILE);
        fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))
    }

    /// Checks the run parameters (not the sample list).
    pub fn validate_config(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::Argument("sample_count must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Argument("no image kinds selected".into()));
        }
        let (w, h) = (self.width(), self.height());
        if w == 0 || h == 0 {
            return Err(Error::Size(format!("image size {w}x{h}")));
        }
        if lpiqe::qubit_count(w, h) > MAX_QUBITS {
            return Err(Error::Size(format!(
                "{w}x{h} images need {} qubits, cap is {MAX_QUBITS}",
                lpiqe::qubit_count(w, h)
            )));
        }
        check_fraction(self.train_fraction, self.sample_count)?;
        self.noise.validate()
    }
}

fn check_fraction(fraction: f64, n: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction {fraction} outside (0, 1)"
        )));
    }
    let train = (fraction * n as f64).floor() as usize;
    if train == 0 || train == n {
        return Err(Error::Argument(format!(
            "train fraction {fraction} on {n} samples leaves an empty split"
        )));
    }
    Ok(train)
}

pub fn sample_id(index: usize) -> String {
    format!("img_{index:05}")
}

fn stretch(field: &[f64], rng: &mut rng::Rng) -> Vec<u8> {
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        let v: u8 = rng.random();
        return vec![v; field.len()];
    }
    field
        .iter()
        .map(|f| (255.0 * (f - lo) / (hi - lo)).round() as u8)
        .collect()
}

fn synthesize(kind: ImageKind, w: usize, h: usize, rng: &mut rng::Rng) -> GrayImage {
    let coords = (0..h).flat_map(|r| (0..w).map(move |c| (c as f64, r as f64)));
    let field: Vec<f64> = match kind {
        ImageKind::Random => (0..w * h).map(|_| rng.random::<f64>()).collect(),
        ImageKind::Gradient => {
            let theta = rng.random_range(0.0..2.0 * PI);
            let gamma = rng.random_range(0.5..2.0);
            let (dx, dy) = (theta.cos(), theta.sin());
            let span = (w + h) as f64;
            coords
                .map(|(x, y)| ((x * dx + y * dy) / span + 1.0).powf(gamma))
                .collect()
        }
        ImageKind::Blob => {
            let blobs: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(1..=4))
                .map(|_| {
                    (
                        rng.random_range(0.0..w as f64),
                        rng.random_range(0.0..h as f64),
                        rng.random_range(0.1..0.5) * w.max(h) as f64,
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            coords
                .map(|(x, y)| {
                    blobs
                        .iter()
                        .map(|&(cx, cy, s, a)| {
                            a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp()
                        })
                        .sum()
                })
                .collect()
        }
        ImageKind::Stripes => {
            let theta = rng.random_range(0.0..PI);
            let period = rng.random_range(2.0..(w.max(h) as f64).max(2.5));
            let offset = rng.random_range(0.0..2.0 * PI);
            let (dx, dy) = (theta.cos(), theta.sin());
            coords
                .map(|(x, y)| (2.0 * PI * (x * dx + y * dy) / period + offset).sin())
                .collect()
        }
    };
    let pixels = stretch(&field, rng);
    GrayImage::new(w, h, pixels).expect("one value per pixel")
}

const MAX_ATTEMPTS: usize = 64;

/// Generates `count` distinct images, cycling through `kinds`.
pub fn gen_images(
    count: usize,
    size: (usize, usize),
    kinds: &[ImageKind],
    seed: u64,
) -> Result<Vec<GrayImage>> {
    if kinds.is_empty() {
        return Err(Error::Argument("no image kinds selected".into()));
    }
    if count == 0 {
        return Err(Error::Argument("image count must be at least 1".into()));
    }
    let (w, h) = size;
    if w == 0 || h == 0 {
        return Err(Error::Size(format!("image size {w}x{h}")));
    }
    let mut seen = HashSet::with_capacity(count);
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let kind = kinds[i % kinds.len()];
        let image = (0..MAX_ATTEMPTS)
            .map(|attempt| {
                let mut rng = rng::seeded(rng::subseed(seed, &format!("image-{i}-{attempt}")));
                synthesize(kind, w, h, &mut rng)
            })
            .find(|img| !seen.contains(img))
            .ok_or_else(|| {
                Error::Argument(format!(
                    "could not generate {count} distinct {w}x{h} images"
                ))
            })?;
        seen.insert(image.clone());
        images.push(image);
    }
    Ok(images)
}

/// Nearest-neighbour enlargement to a `side x side` square.
pub fn upscale(img: &GrayImage, side: usize) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    if side == 0 || !side.is_multiple_of(w) || !side.is_multiple_of(h) {
        return Err(Error::Size(format!(
            "{side} is not a multiple of {w} and {h}"
        )));
    }
    let (bx, by) = (side / w, side / h);
    let pixels = (0..side)
        .flat_map(|r| (0..side).map(move |c| (r / by, c / bx)))
        .map(|(r, c)| img.get(r, c))
        .collect();
    GrayImage::new(side, side, pixels)
}

/// Block-mean reduction to `width x height`, rounding each mean.
pub fn descale(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    let (iw, ih) = (img.width(), img.height());
    if width == 0 || height == 0 || iw % width != 0 || ih % height != 0 {
        return Err(Error::Size(format!(
            "cannot reduce {iw}x{ih} to {width}x{height} in whole blocks"
        )));
    }
    let (bx, by) = (iw / width, ih / height);
    let area = (bx * by) as f64;
    let pixels = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .map(|(r, c)| {
            let sum: u64 = (0..by)
                .flat_map(|dy| (0..bx).map(move |dx| (r * by + dy, c * bx + dx)))
                .map(|(y, x)| u64::from(img.get(y, x)))
                .sum();
            (sum as f64 / area).round() as u8
        })
        .collect();
    GrayImage::new(width, height, pixels)
}

/// Assigns train/test labels by a seeded shuffle; `floor(fraction * n)` train.
pub fn split(manifest: &Manifest, train_fraction: f64, seed: u64) -> Result<Manifest> {
    let n = manifest.samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let train = check_fraction(train_fraction, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut out = manifest.clone();
    for (rank, &idx) in order.iter().enumerate() {
        out.samples[idx].split = if rank < train {
            Split::Train
        } else {
            Split::Test
        };
    }
    out.train_fraction = train_fraction;
    out.split_seed = seed;
    Ok(out)
}

fn rel(dir: &str, id: &str) -> String {
    format!("{dir}/{id}.pgm")
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Generates the corpus, runs every image through the noisy backend and
/// writes the dataset tree into `out_dir`, which must be empty or absent.
pub fn run_experiment(
    config: &Manifest,
    out_dir: impl AsRef<Path>,
    pdu_table: Option<&PduTable>,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    config.validate_config()?;
    let experiment = config.experiment;
    let table = match (experiment.needs_pdu(), pdu_table) {
        (true, None) => return Err(Error::MissingPduTable(experiment.to_string())),
        (true, Some(t)) => Some(t),
        (false, _) => None,
    };
    if out_dir.exists() {
        let mut entries = fs::read_dir(out_dir).map_err(|e| Error::io(out_dir, e))?;
        if entries.next().is_some() {
            return Err(Error::Argument(format!(
                "output directory {} is not empty",
                out_dir.display()
            )));
        }
    }
    let stage = experiment.input_stage();
    create_dir(&out_dir.join(ORIGINALS_DIR))?;
    create_dir(&out_dir.join(stage.dir_name()))?;

    let (w, h) = (config.width(), config.height());
    let images = gen_images(
        config.sample_count,
        (w, h),
        &config.kinds,
        rng::subseed(config.seed, "images"),
    )?;
    let layout = EncodingLayout::new(w, h);

    let processed: Vec<(PairedSample, Option<ImageMetrics>)> = images
        .par_iter()
        .enumerate()
        .map(|(i, original)| {
            let id = sample_id(i);
            let cfg = config.noise.with_seed(rng::subseed(config.noise.seed, &id));
            let counts = noise::simulate_backend(original, &cfg)?;
            let decoded = match table {
                Some(t) => t.correct_image(&counts, &layout)?,
                None => lpiqe::decode_counts(&counts, &layout)?,
            };
            let sample = PairedSample {
                input_path: rel(stage.dir_name(), &id),
                target_path: rel(ORIGINALS_DIR, &id),
                id,
                stage,
                split: Split::Train,
            };
            original.write_pgm(out_dir.join(&sample.target_path))?;
            decoded.image.write_pgm(out_dir.join(&sample.input_path))?;
            let metrics = match ImageMetrics::compute(original, &decoded.image) {
                Ok(m) => Some(m),
                Err(e) => {
                    log::warn!("{}: no metrics ({e})", sample.id);
                    None
                }
            };
            Ok((sample, metrics))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<MetricsRow> = processed
        .iter()
        .filter_map(|(s, m)| {
            m.as_ref()
                .map(|m| MetricsRow::new(&s.id, stage.dir_name(), m))
        })
        .collect();
    let mut manifest = config.clone();
    manifest.samples = processed.into_iter().map(|(s, _)| s).collect();
    manifest = split(&manifest, config.train_fraction, config.split_seed)?;

    report::write_metrics_csv(out_dir.join(BEFORE_METRICS_FILE), &rows)?;
    manifest.before_metrics = Some(BEFORE_METRICS_FILE.into());
    if let Ok(summary) = aggregate(&rows.iter().map(MetricsRow::metrics).collect::<Vec<_>>()) {
        report::write_summary_csv(out_dir.join(BEFORE_SUMMARY_FILE), &summary)?;
        manifest.before_summary = Some(BEFORE_SUMMARY_FILE.into());
    }
    if let Some(t) = table {
        pdu::save_table(t, out_dir.join(PDU_TABLE_FILE))?;
        manifest.pdu_table_path = Some(PDU_TABLE_FILE.into());
    }
    manifest.save(out_dir)?;
    Ok(manifest)
}

fn files_under(root: &Path, dir: &Path, out: &mut BTreeSet<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            files_under(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under root");
            out.insert(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Verifies that every referenced file exists and every file outside
/// `gan/` is referenced by the manifest.
pub fn check_completeness(dataset: impl AsRef<Path>, manifest: &Manifest) -> Result<()> {
    let root = dataset.as_ref();
    let mut referenced: BTreeSet<String> = BTreeSet::new();
    referenced.insert(MANIFEST_FILE.into());
    for s in &manifest.samples {
        referenced.insert(s.input_path.clone());
        referenced.insert(s.target_path.clone());
    }
    for extra in [
        &manifest.pdu_table_path,
        &manifest.before_metrics,
        &manifest.before_summary,
    ]
    .into_iter()
    .flatten()
    {
        referenced.insert(extra.clone());
    }
    let mut present = BTreeSet::new();
    files_under(root, root, &mut present)?;
    present.retain(|p| !p.starts_with("gan/"));
    if let Some(missing) = referenced.difference(&present).next() {
        return Err(Error::Argument(format!(
            "referenced file {missing} is missing"
        )));
    }
    if let Some(stray) = present.difference(&referenced).next() {
        return Err(Error::Argument(format!(
            "file {stray} is not in the manifest"
        )));
    }
    Ok(())
}

/// A reconstruction paired with its original, ready for scoring.
#[derive(Debug, Clone)]
pub struct StagePair {
    pub id: String,
    pub original: GrayImage,
    pub candidate: GrayImage,
}

/// Loads `(original, stage output)` pairs for `stage`. Translator outputs are
/// read for the test split only and block-mean reduced to the manifest size
/// when they come back enlarged.
pub fn load_stage(
    dataset: impl AsRef<Path>,
    manifest: &Manifest,
    stage: Stage,
) -> Result<Vec<StagePair>> {
    let root = dataset.as_ref();
    let stage_dir = root.join(stage.dir_name());
    if !stage_dir.is_dir() {
        return Err(Error::StageMissing(stage.to_string()));
    }
    let (w, h) = (manifest.width(), manifest.height());
    let selected: Vec<(&PairedSample, PathBuf)> = match stage {
        Stage::Gan => manifest
            .samples
            .iter()
            .filter(|s| s.split == Split::Test)
            .map(|s| (s, stage_dir.join(format!("{}.pgm", s.id))))
            .collect(),
        _ => manifest
            .samples
            .iter()
            .filter(|s| s.stage == stage)
            .map(|s| (s, root.join(&s.input_path)))
            .collect(),
    };
    if selected.is_empty() {
        return Err(Error::StageMissing(stage.to_string()));
    }
    selected
        .into_iter()
        .map(|(s, path)| {
            let original = GrayImage::read_pgm(root.join(&s.target_path))?;
            let mut candidate = GrayImage::read_pgm(&path)?;
            if (candidate.width(), candidate.height()) != (w, h) {
                candidate = descale(&candidate, w, h)?;
            }
            Ok(StagePair {
                id: s.id.clone(),
                original,
                candidate,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rows: Vec<MetricsRow>,
    pub report: AggregateReport,
}

pub fn evaluate(
    dataset: impl AsRef<Path>,
    manifest: &Manifest,
    stage: Stage,
) -> Result<Evaluation> {
    let pairs = load_stage(dataset, manifest, stage)?;
    let rows: Vec<MetricsRow> = pairs
        .par_iter()
        .map(|p| {
            ImageMetrics::compute(&p.original, &p.candidate)
                .map(|m| MetricsRow::new(&p.id, stage.dir_name(), &m))
                .map_err(|e| Error::Argument(format!("{}: {e}", p.id)))
        })
        .collect::<Result<_>>()?;
    let report = aggregate(&rows.iter().map(MetricsRow::metrics).collect::<Vec<_>>())?;
    Ok(Evaluation { rows, report })
}
