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

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A register, vector or image does not have the size an operation needs.
    #[error("size error: {0}")]
    Size(String),

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitIndex { qubit: usize, n_qubits: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Two calibration probes produced measured ratios that are not strictly
    /// increasing once sorted, so the correction curve cannot be inverted.
    #[error(
        "calibration is not monotone: probes {first} (x = {first_phase:.6}) and {second} \
         (x = {second_phase:.6}) both measured gamma = {gamma:.9}"
    )]
    Calibration {
        first: usize,
        first_phase: f64,
        second: usize,
        second_phase: f64,
        gamma: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("correlation is undefined: {0} image is constant")]
    UndefinedCorrelation(&'static str),

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("experiment {0} needs a calibrated PDU table")]
    MissingPduTable(String),

    #[error("stage not present: {0}")]
    StageMissing(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes a parse error with the file it came from.
    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        }
    }
}
