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

//! Emulated noisy backend.
//!
//! Three effects are layered on the ideal circuit:
//!
//! * a smooth systematic phase warp `p -> clamp(p + A sin(p + phi0) + B, 0, pi)`,
//! * Gaussian phase jitter with standard deviation `sigma_p`, drawn once per
//!   pixel and run,
//! * independent readout bit flips with probability `eps_ro` on every bit of
//!   every shot.
//!
//! The warp is the component a calibrated PDU table can undo; jitter and
//! shot/readout noise are left for downstream stages.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lpiqe::{self, EncodingLayout, PhaseVector};
use crate::rng;
use crate::statevec::{CountsTable, ProbabilityTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Warp amplitude `A` in radians; `|A| < 1` keeps the warp monotone.
    pub warp_amplitude: f64,
    pub warp_offset: f64,
    pub warp_bias: f64,
    pub jitter_sigma: f64,
    /// Per-bit readout flip probability, in `[0, 0.5)`.
    pub readout_flip: f64,
    pub shots: u64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            warp_amplitude: 0.7,
            warp_offset: 0.0,
            warp_bias: 0.05,
            jitter_sigma: 0.03,
            readout_flip: 0.002,
            shots: 65_536,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    /// No warp, no jitter, no readout error.
    pub fn noiseless(shots: u64, seed: u64) -> Self {
        NoiseConfig {
            warp_amplitude: 0.0,
            warp_offset: 0.0,
            warp_bias: 0.0,
            jitter_sigma: 0.0,
            readout_flip: 0.0,
            shots,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.warp_amplitude,
            self.warp_offset,
            self.warp_bias,
            self.jitter_sigma,
            self.readout_flip,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Argument("noise parameters must be finite".into()));
        }
        if self.warp_amplitude.abs() >= 1.0 {
            return Err(Error::Argument(format!(
                "warp_amplitude {} must satisfy |A| < 1",
                self.warp_amplitude
            )));
        }
        if self.jitter_sigma < 0.0 {
            return Err(Error::Argument(format!(
                "jitter_sigma {} is negative",
                self.jitter_sigma
            )));
        }
        if !(0.0..0.5).contains(&self.readout_flip) {
            return Err(Error::Argument(format!(
                "readout_flip {} outside [0, 0.5)",
                self.readout_flip
            )));
        }
        if self.shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 over the physical noise parameters (not shots or seed), hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in [
            self.warp_amplitude,
            self.warp_offset,
            self.warp_bias,
            self.jitter_sigma,
            self.readout_flip,
        ] {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

pub fn warp_phase(phase: f64, cfg: &NoiseConfig) -> f64 {
    (phase + cfg.warp_amplitude * (phase + cfg.warp_offset).sin() + cfg.warp_bias).clamp(0.0, PI)
}

/// Warp plus jitter on every pixel phase; padding entries stay 0.
pub fn apply_channel(pv: &PhaseVector, cfg: &NoiseConfig) -> PhaseVector {
    let mut rng = rng::seeded(rng::subseed(cfg.seed, "channel"));
    let jitter = (cfg.jitter_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.jitter_sigma).expect("validated sigma"));
    let noisy: Vec<f64> = pv
        .pixel_phases()
        .iter()
        .map(|&p| {
            let mut q = warp_phase(p, cfg);
            if let Some(normal) = &jitter {
                q += normal.sample(&mut rng);
            }
            q.clamp(0.0, PI)
        })
        .collect();
    PhaseVector::from_pixel_phases(pv.width(), pv.height(), &noisy)
        .expect("channel output clamped to [0, pi]")
}

/// Flips each measured bit of each shot independently with probability `p`.
pub fn apply_readout_flips(counts: &CountsTable, p: f64, seed: u64) -> CountsTable {
    if p <= 0.0 {
        return counts.clone();
    }
    let n = counts.n_qubits();
    let mut rng = rng::seeded(seed);
    let mut flipped: BTreeMap<usize, u64> = BTreeMap::new();
    for (outcome, count) in counts.iter() {
        for _ in 0..count {
            let mut mask = 0usize;
            for bit in 0..n {
                if rng.random::<f64>() < p {
                    mask |= 1 << bit;
                }
            }
            *flipped.entry(outcome ^ mask).or_default() += 1;
        }
    }
    CountsTable::new(n, flipped).expect("flips stay inside the register")
}

/// Runs a phase vector through the noisy backend with `cfg.shots` shots.
pub fn simulate_phases(pv: &PhaseVector, cfg: &NoiseConfig) -> Result<CountsTable> {
    cfg.validate()?;
    let noisy = apply_channel(pv, cfg);
    let probs = lpiqe::encode(&noisy)?.probabilities();
    let counts = probs.sample_counts(cfg.shots, rng::subseed(cfg.seed, "shots"))?;
    Ok(apply_readout_flips(
        &counts,
        cfg.readout_flip,
        rng::subseed(cfg.seed, "readout"),
    ))
}

pub fn simulate_backend(image: &GrayImage, cfg: &NoiseConfig) -> Result<CountsTable> {
    simulate_phases(&lpiqe::build_phase_vector(image), cfg)
}

/// What a backend run hands back: sampled counts or an exact distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    Counts(CountsTable),
    Exact(ProbabilityTable),
}

impl Readout {
    pub fn ratios(&self, layout: &EncodingLayout) -> Result<Vec<Option<f64>>> {
        match self {
            Readout::Counts(c) => lpiqe::count_ratios(c, layout),
            Readout::Exact(p) => lpiqe::probability_ratios(p, layout),
        }
    }
}

/// Anything that can execute the encoding circuit for a phase vector.
pub trait Backend: Sync {
    fn run(&self, pv: &PhaseVector, shots: u64, seed: u64) -> Result<Readout>;

    fn config(&self) -> &NoiseConfig;
}

/// Full stochastic backend: channel, finite shots and readout flips.
#[derive(Debug, Clone)]
pub struct ShotBackend {
    pub cfg: NoiseConfig,
}

impl Backend for ShotBackend {
    fn run(&self, pv: &PhaseVector, shots: u64, seed: u64) -> Result<Readout> {
        let cfg = NoiseConfig {
            shots,
            seed,
            ..self.cfg
        };
        simulate_phases(pv, &cfg).map(Readout::Counts)
    }

    fn config(&self) -> &NoiseConfig {
        &self.cfg
    }
}

/// Applies the phase channel and returns exact probabilities. Shots and
/// readout flips are ignored.
#[derive(Debug, Clone)]
pub struct AnalyticBackend {
    pub cfg: NoiseConfig,
}

impl Backend for AnalyticBackend {
    fn run(&self, pv: &PhaseVector, _shots: u64, seed: u64) -> Result<Readout> {
        self.cfg.validate()?;
        let noisy = apply_channel(pv, &self.cfg.with_seed(seed));
        Ok(Readout::Exact(lpiqe::encode(&noisy)?.probabilities()))
    }

    fn config(&self) -> &NoiseConfig {
        &self.cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpiqe::{build_phase_vector, decode_counts};

    fn warp_cfg(a: f64, phi0: f64, b: f64) -> NoiseConfig {
        NoiseConfig {
            warp_amplitude: a,
            warp_offset: phi0,
            warp_bias: b,
            ..NoiseConfig::noiseless(1024, 0)
        }
    }

    #[test]
    fn warp_examples() {
        let identity = warp_cfg(0.0, 0.0, 0.0);
        for k in 0..=20 {
            let p = PI * k as f64 / 20.0;
            assert_eq!(warp_phase(p, &identity), p);
        }
        let cfg = warp_cfg(0.3, 0.0, 0.05);
        assert!((warp_phase(0.0, &cfg) - 0.05).abs() < 1e-15);
        assert!((warp_phase(PI / 2.0, &cfg) - (PI / 2.0 + 0.35)).abs() < 1e-15);
    }

    #[test]
    fn warp_is_increasing_for_small_amplitude() {
        for &a in &[-0.9, -0.5, 0.3, 0.7, 0.95] {
            let cfg = warp_cfg(a, 0.4, 0.0);
            let mut prev = -1.0;
            for k in 0..=1000 {
                let p = PI * k as f64 / 1000.0;
                let w = p + a * (p + 0.4).sin();
                assert!(w > prev);
                prev = w;
                assert_eq!(warp_phase(p, &cfg), w.clamp(0.0, PI));
            }
        }
    }

    #[test]
    fn channel_examples() {
        let img = GrayImage::new(3, 2, vec![0, 40, 90, 128, 200, 255]).unwrap();
        let pv = build_phase_vector(&img);
        assert_eq!(apply_channel(&pv, &NoiseConfig::noiseless(1, 3)), pv);

        let cfg = warp_cfg(0.3, 0.1, 0.02);
        let out = apply_channel(&pv, &cfg);
        for (o, p) in out.pixel_phases().iter().zip(pv.pixel_phases()) {
            assert_eq!(*o, warp_phase(*p, &cfg));
        }
        assert_eq!(&out.phases()[6..], &[0.0, 0.0]);

        let jittery = NoiseConfig {
            jitter_sigma: 0.2,
            seed: 99,
            ..cfg
        };
        let a = apply_channel(&pv, &jittery);
        assert_eq!(a, apply_channel(&pv, &jittery));
        assert_ne!(a, out);
        assert_eq!(&a.phases()[6..], &[0.0, 0.0]);
        assert!(a.pixel_phases().iter().all(|p| (0.0..=PI).contains(p)));
    }

    #[test]
    fn config_validation() {
        assert!(NoiseConfig::default().validate().is_ok());
        let bad = [
            NoiseConfig {
                readout_flip: 0.5,
                ..Default::default()
            },
            NoiseConfig {
                readout_flip: -0.1,
                ..Default::default()
            },
            NoiseConfig {
                jitter_sigma: -1e-3,
                ..Default::default()
            },
            NoiseConfig {
                warp_amplitude: 1.0,
                ..Default::default()
            },
            NoiseConfig {
                shots: 0,
                ..Default::default()
            },
            NoiseConfig {
                warp_bias: f64::NAN,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Argument(_))), "{cfg:?}");
        }
        let img = GrayImage::filled(2, 2, 0).unwrap();
        let cfg = NoiseConfig {
            readout_flip: 0.5,
            ..Default::default()
        };
        assert!(simulate_backend(&img, &cfg).is_err());
    }

    #[test]
    fn fingerprint_tracks_physical_parameters_only() {
        let a = NoiseConfig::default();
        assert_eq!(a.fingerprint(), a.with_seed(5).fingerprint());
        assert_eq!(a.fingerprint(), NoiseConfig { shots: 9, ..a }.fingerprint());
        assert_ne!(
            a.fingerprint(),
            NoiseConfig {
                warp_bias: 0.0,
                ..a
            }
            .fingerprint()
        );
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn readout_flips_preserve_shots_and_rate() {
        let probs = ProbabilityTable::new(3, {
            let mut v = vec![0.0; 8];
            v[0] = 1.0;
            v
        })
        .unwrap();
        let counts = probs.sample_counts(100_000, 1).unwrap();
        let flipped = apply_readout_flips(&counts, 0.1, 2);
        assert_eq!(flipped.shots(), 100_000);
        for bit in 0..3 {
            let ones: u64 = flipped
                .iter()
                .filter(|(k, _)| k >> bit & 1 == 1)
                .map(|(_, c)| c)
                .sum();
            let rate = ones as f64 / 100_000.0;
            assert!((rate - 0.1).abs() < 0.005, "bit {bit}: {rate}");
        }
        assert_eq!(apply_readout_flips(&counts, 0.0, 2), counts);
    }

    #[test]
    fn simulation_is_deterministic() {
        let img = GrayImage::new(4, 4, (0..16).map(|v| v * 16).collect()).unwrap();
        let cfg = NoiseConfig {
            shots: 4096,
            seed: 12,
            ..Default::default()
        };
        assert_eq!(
            simulate_backend(&img, &cfg).unwrap(),
            simulate_backend(&img, &cfg).unwrap()
        );
        assert_ne!(
            simulate_backend(&img, &cfg).unwrap(),
            simulate_backend(&img, &cfg.with_seed(13)).unwrap()
        );
    }

    #[test]
    fn noiseless_backend_converges_to_ideal() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(4);
        for seed in 0..20 {
            let px: Vec<u8> = (0..64).map(|_| rng.random()).collect();
            let img = GrayImage::new(8, 8, px).unwrap();
            let cfg = NoiseConfig::noiseless(1 << 20, seed);
            let counts = simulate_backend(&img, &cfg).unwrap();
            let decoded = decode_counts(&counts, &EncodingLayout::for_image(&img)).unwrap();
            let close = decoded
                .image
                .pixels()
                .iter()
                .zip(img.pixels())
                .filter(|(a, b)| (**a as i32 - **b as i32).abs() <= 2)
                .count();
            assert!(close as f64 >= 0.99 * 64.0, "seed {seed}: {close}/64");
        }
    }

    #[test]
    fn analytic_backend_ignores_readout_noise() {
        let pv = build_phase_vector(&GrayImage::new(2, 1, vec![30, 220]).unwrap());
        let cfg = NoiseConfig {
            jitter_sigma: 0.0,
            ..Default::default()
        };
        let Readout::Exact(p) = AnalyticBackend { cfg }.run(&pv, 1, 0).unwrap() else {
            panic!("analytic backend returns exact probabilities");
        };
        let ratios = Readout::Exact(p).ratios(&pv.layout()).unwrap();
        for (r, phase) in ratios.iter().zip(pv.pixel_phases()) {
            let expected = lpiqe::phase_to_ratio(warp_phase(*phase, &cfg));
            assert!((r.unwrap() - expected).abs() < 1e-12);
        }
    }
}
