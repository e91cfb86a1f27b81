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

//! Phase distortion unraveling (PDU).
//!
//! Calibration runs single-pixel probes at evenly spaced phases `x_k` and
//! records, for each, the ideal ancilla-zero ratio `expected = (1 + cos x_k) / 2`,
//! the ratio the backend actually `measured`, and the error
//! `error = expected - measured`. Knots are kept sorted by `measured`, so a
//! later measurement can be corrected by interpolating the error at the
//! measured value and adding it back.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{Interpolant, Interpolation};
use crate::lpiqe::{self, Decoded, EncodingLayout, PhaseVector};
use crate::noise::{Backend, NoiseConfig, Readout};
use crate::rng;
use crate::statevec::CountsTable;

pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PduKnot {
    /// Probe phase in radians.
    pub phase: f64,
    pub expected: f64,
    pub measured: f64,
    /// Always exactly `expected - measured`.
    pub error: f64,
}

impl PduKnot {
    pub fn new(phase: f64, expected: f64, measured: f64) -> Self {
        PduKnot {
            phase,
            expected,
            measured,
            error: expected - measured,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PduTable {
    knots: Vec<PduKnot>,
    interpolation: Interpolation,
    backend_fingerprint: String,
    calibration_shots: u64,
    curve: Interpolant,
}

impl PartialEq for PduTable {
    fn eq(&self, other: &Self) -> bool {
        self.knots == other.knots
            && self.interpolation == other.interpolation
            && self.backend_fingerprint == other.backend_fingerprint
            && self.calibration_shots == other.calibration_shots
    }
}

impl PduTable {
    /// Builds a table from knots in any order. Fails on out-of-range values,
    /// an inconsistent error column or tied measured ratios.
    pub fn from_knots(
        knots: Vec<PduKnot>,
        interpolation: Interpolation,
        backend_fingerprint: String,
        calibration_shots: u64,
    ) -> Result<Self> {
        for k in &knots {
            let unit = |v: f64| (0.0..=1.0).contains(&v);
            if !unit(k.expected) || !unit(k.measured) {
                return Err(Error::Argument(format!(
                    "knot at phase {} has ratios outside [0, 1]",
                    k.phase
                )));
            }
            if k.error != k.expected - k.measured {
                return Err(Error::Argument(format!(
                    "knot at phase {}: error {} != expected - measured",
                    k.phase, k.error
                )));
            }
        }
        let mut indexed: Vec<(usize, PduKnot)> = knots.into_iter().enumerate().collect();
        indexed.sort_by(|a, b| a.1.measured.total_cmp(&b.1.measured));
        if let Some(w) = indexed
            .windows(2)
            .find(|w| w[0].1.measured >= w[1].1.measured)
        {
            return Err(Error::Calibration {
                first: w[0].0,
                first_phase: w[0].1.phase,
                second: w[1].0,
                second_phase: w[1].1.phase,
                gamma: w[0].1.measured,
            });
        }
        let knots: Vec<PduKnot> = indexed.into_iter().map(|(_, k)| k).collect();
        let curve = Interpolant::new(
            interpolation,
            knots.iter().map(|k| k.measured).collect(),
            knots.iter().map(|k| k.error).collect(),
        )?;
        Ok(PduTable {
            knots,
            interpolation,
            backend_fingerprint,
            calibration_shots,
            curve,
        })
    }

    /// A table whose correction is the identity.
    pub fn zero(interpolation: Interpolation) -> Self {
        let knots = [0.0, 1.0]
            .iter()
            .map(|&g| PduKnot::new(lpiqe::ratio_to_phase(g), g, g))
            .collect();
        PduTable::from_knots(knots, interpolation, String::new(), 1).expect("valid zero table")
    }

    pub fn knots(&self) -> &[PduKnot] {
        &self.knots
    }

    pub fn granularity(&self) -> usize {
        self.knots.len()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn backend_fingerprint(&self) -> &str {
        &self.backend_fingerprint
    }

    pub fn calibration_shots(&self) -> u64 {
        self.calibration_shots
    }

    /// Estimated error at a measured ratio; flat beyond the end knots.
    pub fn eval(&self, measured: f64) -> f64 {
        self.curve.eval(measured)
    }

    pub fn correct_probability(&self, measured: f64) -> f64 {
        (measured + self.eval(measured)).clamp(0.0, 1.0)
    }

    pub fn correct_readout(&self, readout: &Readout, layout: &EncodingLayout) -> Result<Decoded> {
        let ratios = readout.ratios(layout)?;
        Ok(lpiqe::ratios_to_image(&ratios, layout, |r| {
            self.correct_probability(r)
        }))
    }

    pub fn correct_image(&self, counts: &CountsTable, layout: &EncodingLayout) -> Result<Decoded> {
        self.correct_readout(&Readout::Counts(counts.clone()), layout)
    }

    /// Human-readable table listing, one knot per line.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "PDU table: {} knots, {} interpolation, {} calibration shots\n",
            self.granularity(),
            self.interpolation,
            self.calibration_shots
        );
        out.push_str("       phase     expected     measured        error\n");
        for k in &self.knots {
            out.push_str(&format!(
                "{:>12.6} {:>12.6} {:>12.6} {:>12.6}\n",
                k.phase, k.expected, k.measured, k.error
            ));
        }
        out
    }

    pub fn to_toml(&self) -> String {
        let file = TableFile {
            version: TABLE_VERSION,
            granularity: self.knots.len(),
            interpolation: self.interpolation,
            fingerprint: self.backend_fingerprint.clone(),
            calibration_shots: self.calibration_shots,
            knot: self.knots.clone(),
        };
        toml::to_string(&file).expect("table serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: TableFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("PDU table: {e}")))?;
        if file.version != TABLE_VERSION {
            return Err(Error::Parse(format!(
                "PDU table version {} (expected {TABLE_VERSION})",
                file.version
            )));
        }
        if file.granularity != file.knot.len() {
            return Err(Error::Parse(format!(
                "granularity {} but {} knots",
                file.granularity,
                file.knot.len()
            )));
        }
        let table = PduTable::from_knots(
            file.knot,
            file.interpolation,
            file.fingerprint,
            file.calibration_shots,
        )
        .map_err(|e| Error::Parse(format!("PDU table: {e}")))?;
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    version: u32,
    granularity: usize,
    interpolation: Interpolation,
    fingerprint: String,
    calibration_shots: u64,
    knot: Vec<PduKnot>,
}

/// Probe phases `k * pi / (granularity - 1)` for `k = 0..granularity`.
pub fn probe_phases(granularity: usize) -> Vec<f64> {
    (0..granularity)
        .map(|k| k as f64 * PI / (granularity - 1) as f64)
        .collect()
}

/// Measures single-pixel probes on `backend` and builds the correction table.
pub fn calibrate(
    backend: &dyn Backend,
    granularity: usize,
    shots: u64,
    seed: u64,
    interpolation: Interpolation,
) -> Result<PduTable> {
    if granularity < 2 {
        return Err(Error::Argument(format!(
            "granularity {granularity} is below the minimum of 2"
        )));
    }
    if shots == 0 {
        return Err(Error::Argument(
            "calibration shots must be at least 1".into(),
        ));
    }
    let layout = EncodingLayout::new(1, 1);
    let knots = probe_phases(granularity)
        .into_iter()
        .enumerate()
        .map(|(k, phase)| {
            let pv = PhaseVector::from_pixel_phases(1, 1, &[phase])?;
            let readout = backend.run(&pv, shots, rng::subseed(seed, &format!("probe-{k}")))?;
            let measured = readout.ratios(&layout)?[0]
                .ok_or_else(|| Error::Argument(format!("probe {k} produced no shots")))?;
            Ok(PduKnot::new(phase, lpiqe::phase_to_ratio(phase), measured))
        })
        .collect::<Result<Vec<_>>>()?;
    PduTable::from_knots(knots, interpolation, backend.config().fingerprint(), shots)
}

pub fn save_table(table: &PduTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, table.to_toml()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub table: PduTable,
    /// Set when the table was calibrated against a different noise configuration.
    pub fingerprint_mismatch: bool,
}

pub fn load_table(path: impl AsRef<Path>, active: Option<&NoiseConfig>) -> Result<LoadedTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table = PduTable::from_toml(&text).map_err(|e| e.in_file(path))?;
    let fingerprint_mismatch =
        active.is_some_and(|cfg| cfg.fingerprint() != table.backend_fingerprint);
    if fingerprint_mismatch {
        log::warn!(
            "{} was calibrated against a different noise configuration",
            path.display()
        );
    }
    Ok(LoadedTable {
        table,
        fingerprint_mismatch,
    })
}
