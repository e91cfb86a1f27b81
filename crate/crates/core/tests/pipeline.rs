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

use lpiqe_core::dataset::{self, Experiment, Manifest, Split, Stage};
use lpiqe_core::interp::Interpolation;
use lpiqe_core::lpiqe::{self, PhaseVector};
use lpiqe_core::noise::{AnalyticBackend, Backend, NoiseConfig, ShotBackend};
use lpiqe_core::pdu::{self, PduTable};
use lpiqe_core::rng;
use lpiqe_core::GrayImage;
use rand::Rng;

fn config(experiment: Experiment, count: usize, size: usize, noise: NoiseConfig) -> Manifest {
    let mut m = Manifest::new(experiment, count, noise.seed);
    m.image_size = [size, size];
    m.noise = noise;
    m
}

fn default_table(seed: u64) -> PduTable {
    let cfg = NoiseConfig::default().with_seed(seed);
    pdu::calibrate(
        &ShotBackend { cfg },
        9,
        8192,
        seed,
        Interpolation::MonotoneCubic,
    )
    .unwrap()
}

#[test]
fn near_noiseless_raw_stage_is_almost_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let noise = NoiseConfig::noiseless(1 << 22, 3);
    let manifest =
        dataset::run_experiment(&config(Experiment::E1, 10, 2, noise), tmp.path(), None).unwrap();
    let eval = dataset::evaluate(tmp.path(), &manifest, Stage::Raw).unwrap();
    assert!(eval.report.mse.max < 1e-4, "{:?}", eval.report.mse);
    assert!(eval.report.pearson_r.min > 0.999);
}

#[test]
fn pdu_experiment_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let noise = NoiseConfig::default().with_seed(4);
    let table = default_table(4);
    let manifest = dataset::run_experiment(
        &config(Experiment::E3, 20, 4, noise),
        tmp.path(),
        Some(&table),
    )
    .unwrap();

    assert!(manifest
        .samples
        .iter()
        .all(|s| s.stage == Stage::Pdu && s.input_path.starts_with("pdu/")));
    assert!(!tmp.path().join("raw").exists());
    assert_eq!(
        manifest.pdu_table_path.as_deref(),
        Some(dataset::PDU_TABLE_FILE)
    );
    let stored = pdu::load_table(tmp.path().join(dataset::PDU_TABLE_FILE), Some(&noise)).unwrap();
    assert_eq!(stored.table, table);
    assert!(!stored.fingerprint_mismatch);

    let on_disk = Manifest::load(tmp.path()).unwrap();
    assert_eq!(on_disk, manifest);
    dataset::check_completeness(tmp.path(), &on_disk).unwrap();
    let train = on_disk
        .samples
        .iter()
        .filter(|s| s.split == Split::Train)
        .count();
    assert_eq!(train, 18);
    assert!(matches!(
        dataset::evaluate(tmp.path(), &on_disk, Stage::Raw),
        Err(lpiqe_core::Error::StageMissing(_))
    ));
}

#[test]
fn pdu_experiment_needs_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(Experiment::E4, 4, 8, NoiseConfig::default());
    assert!(matches!(
        dataset::run_experiment(&cfg, tmp.path(), None),
        Err(lpiqe_core::Error::MissingPduTable(_))
    ));
}

#[test]
fn stray_files_break_completeness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(Experiment::E2, 6, 4, NoiseConfig::default());
    let manifest = dataset::run_experiment(&cfg, tmp.path(), None).unwrap();
    std::fs::write(tmp.path().join("raw/extra.pgm"), b"x").unwrap();
    assert!(dataset::check_completeness(tmp.path(), &manifest).is_err());
    std::fs::remove_file(tmp.path().join("raw/extra.pgm")).unwrap();
    std::fs::remove_file(tmp.path().join(&manifest.samples[0].input_path)).unwrap();
    assert!(dataset::check_completeness(tmp.path(), &manifest).is_err());
}

#[test]
fn correction_improves_pearson_on_small_images() {
    let tmp = tempfile::tempdir().unwrap();
    let noise = NoiseConfig::default().with_seed(12);
    let table = default_table(12);
    let mut means = Vec::new();
    for (experiment, t) in [(Experiment::E2, None), (Experiment::E4, Some(&table))] {
        let dir = tmp.path().join(experiment.to_string());
        let m = dataset::run_experiment(&config(experiment, 40, 8, noise), &dir, t).unwrap();
        let eval = dataset::evaluate(&dir, &m, experiment.input_stage()).unwrap();
        means.push((eval.report.pearson_r.mean, eval.report.mse.mean));
    }
    assert!(means[1].0 > means[0].0, "{means:?}");
    assert!(means[1].1 < means[0].1, "{means:?}");
}

/// Mean absolute decoded-phase error over a sweep of pixel phases.
fn phase_error(backend: &AnalyticBackend, table: Option<&PduTable>) -> f64 {
    let phases: Vec<f64> = (0..64)
        .map(|k| k as f64 * std::f64::consts::PI / 63.0)
        .collect();
    let pv = PhaseVector::from_pixel_phases(64, 1, &phases).unwrap();
    let readout = backend.run(&pv, 1, 0).unwrap();
    let ratios = readout.ratios(&pv.layout()).unwrap();
    phases
        .iter()
        .zip(ratios)
        .map(|(p, r)| {
            let r = r.unwrap();
            let r = table.map_or(r, |t| t.correct_probability(r));
            (lpiqe::ratio_to_phase(r) - p).abs()
        })
        .sum::<f64>()
        / 64.0
}

#[test]
fn correction_reduces_phase_error_for_moderate_warps() {
    let mut rng = rng::seeded(99);
    let mut checked = 0;
    for case in 0..50 {
        let cfg = NoiseConfig {
            warp_amplitude: rng.random_range(-0.5..=0.5),
            warp_offset: rng.random_range(-1.0..=1.0),
            warp_bias: rng.random_range(-0.1..=0.1),
            ..NoiseConfig::noiseless(1, case)
        };
        let backend = AnalyticBackend { cfg };
        let g = rng.random_range(9..=33);
        let table = match pdu::calibrate(&backend, g, 1, case, Interpolation::MonotoneCubic) {
            Ok(t) => t,
            // clamping at 0 or pi can merge neighbouring probes
            Err(lpiqe_core::Error::Calibration { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let before = phase_error(&backend, None);
        let after = phase_error(&backend, Some(&table));
        assert!(
            after <= before + 1e-12,
            "case {case} ({cfg:?}, g = {g}): {after} > {before}"
        );
        checked += 1;
    }
    assert!(checked >= 40, "only {checked} warps calibrated");
}

#[test]
fn correction_is_inert_on_clean_data() {
    let backend = AnalyticBackend {
        cfg: NoiseConfig::noiseless(1, 0),
    };
    let table = pdu::calibrate(&backend, 17, 1, 0, Interpolation::MonotoneCubic).unwrap();
    assert!(table.knots().iter().all(|k| k.error.abs() < 1e-12));
    let img = GrayImage::new(16, 16, (0..=255).collect()).unwrap();
    let pv = lpiqe::build_phase_vector(&img);
    let readout = backend.run(&pv, 1, 0).unwrap();
    let corrected = table.correct_readout(&readout, &pv.layout()).unwrap();
    assert_eq!(corrected.image, img);
}
