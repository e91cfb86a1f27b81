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

//! Optional TOML run configuration. Every key mirrors a command-line flag;
//! flags win over the file, the file wins over built-in defaults.
//!
//! ```toml
//! seed = 7
//!
//! [noise]              # any subset of the noise fields
//! warp_amplitude = 0.5
//!
//! [calibrate]
//! granularity = 9
//!
//! [gen_dataset]
//! experiment = "E3"
//! pdu = "pdu_table.toml"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lpiqe_core::noise::NoiseConfig;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub noise: NoisePatch,
    #[serde(default)]
    pub calibrate: CalibrateSection,
    #[serde(default)]
    pub gen_dataset: GenDatasetSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
}

/// Noise fields that override the defaults when present.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisePatch {
    pub warp_amplitude: Option<f64>,
    pub warp_offset: Option<f64>,
    pub warp_bias: Option<f64>,
    pub jitter_sigma: Option<f64>,
    pub readout_flip: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

impl NoisePatch {
    pub fn apply(&self, base: NoiseConfig) -> NoiseConfig {
        NoiseConfig {
            warp_amplitude: self.warp_amplitude.unwrap_or(base.warp_amplitude),
            warp_offset: self.warp_offset.unwrap_or(base.warp_offset),
            warp_bias: self.warp_bias.unwrap_or(base.warp_bias),
            jitter_sigma: self.jitter_sigma.unwrap_or(base.jitter_sigma),
            readout_flip: self.readout_flip.unwrap_or(base.readout_flip),
            shots: self.shots.unwrap_or(base.shots),
            seed: self.seed.unwrap_or(base.seed),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading noise config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing noise config {}", path.display()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub granularity: Option<usize>,
    pub shots: Option<u64>,
    pub interpolation: Option<String>,
    pub noise: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDatasetSection {
    pub experiment: Option<String>,
    pub count: Option<usize>,
    pub size: Option<String>,
    pub noise: Option<PathBuf>,
    pub pdu: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub train_fraction: Option<f64>,
    pub kinds: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub dataset: Option<PathBuf>,
    pub stage: Option<String>,
    pub report: Option<PathBuf>,
    pub charts: Option<bool>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Parses `WxH` (e.g. `16x16`).
pub fn parse_size(text: &str) -> Result<(usize, usize)> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("size `{text}` is not of the form WxH"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .with_context(|| format!("size `{text}` has an invalid dimension"))
    };
    Ok((parse(w)?, parse(h)?))
}
