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

//! Dense pure-state simulator.
//!
//! Basis index convention: bit `q` of an outcome index is the value of
//! qubit `q`, so qubit 0 is the least-significant bit. Every module in this
//! crate uses the same convention.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng;

/// Largest register the simulator will allocate (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-9;
const PHASE_SLACK: f64 = 1e-12;

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "register of {n_qubits} qubits is outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Normalized amplitude vector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Size(format!(
                "{} amplitudes for a {n_qubits}-qubit register",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Argument(format!("state has squared norm {norm}")));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// The all-zero basis state |0...0>.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Hadamard on every qubit of |0...0>: all amplitudes equal 2^(-n/2).
    pub fn uniform_superposition(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let amp = 0.5f64.powf(n_qubits as f64 / 2.0);
        Ok(StateVector {
            n_qubits,
            amplitudes: vec![Complex64::new(amp, 0.0); 1 << n_qubits],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies amplitude `j` by `exp(i * phases[j])` for every `j` covered by
    /// `phases`; the remaining amplitudes are left as they are.
    pub fn apply_phase_diagonal(mut self, phases: &[f64]) -> Result<Self> {
        if phases.len() > self.dim() {
            return Err(Error::Size(format!(
                "{} phases for a state of dimension {}",
                phases.len(),
                self.dim()
            )));
        }
        if let Some(bad) = phases
            .iter()
            .find(|p| !p.is_finite() || p.abs() > PI + PHASE_SLACK)
        {
            return Err(Error::Argument(format!("phase {bad} outside [-pi, pi]")));
        }
        for (amp, &phase) in self.amplitudes.iter_mut().zip(phases) {
            *amp *= Complex64::from_polar(1.0, phase);
        }
        Ok(self)
    }

    pub fn apply_hadamard(mut self, qubit: usize) -> Result<Self> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let stride = 1usize << qubit;
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for block in self.amplitudes.chunks_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * scale;
                *b = (x - y) * scale;
            }
        }
        Ok(self)
    }

    /// Born-rule outcome probabilities.
    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            n_qubits: self.n_qubits,
            probs: self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        }
    }
}

/// Outcome distribution over `2^n_qubits` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if probs.len() != 1 << n_qubits {
            return Err(Error::Size(format!(
                "{} probabilities for a {n_qubits}-qubit register",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Argument(format!("probability {bad} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Argument(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityTable { n_qubits, probs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Draws a multinomial histogram of `shots` outcomes.
    ///
    /// Uses the conditional-binomial decomposition: outcome `k` receives
    /// `Binomial(remaining, p_k / remaining_mass)` shots, in index order.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<CountsTable> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let mut rng = rng::seeded(seed);
        let mut counts = BTreeMap::new();
        let mut remaining = shots;
        let mut mass: f64 = self.probs.iter().sum();
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (k, &p) in self.probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let drawn = if k == last {
                remaining
            } else if p <= 0.0 {
                0
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                Binomial::new(remaining, q)
                    .expect("probability clamped to [0, 1]")
                    .sample(&mut rng)
            };
            if drawn > 0 {
                counts.insert(k, drawn);
            }
            remaining -= drawn;
            mass -= p;
        }
        Ok(CountsTable {
            n_qubits: self.n_qubits,
            counts,
            shots,
        })
    }
}

/// Measurement histogram from a finite number of shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    n_qubits: usize,
    counts: BTreeMap<usize, u64>,
    shots: u64,
}

impl CountsTable {
    pub fn new(n_qubits: usize, counts: BTreeMap<usize, u64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if let Some(&k) = counts.keys().find(|&&k| k >= 1 << n_qubits) {
            return Err(Error::Argument(format!(
                "outcome {k} outside a {n_qubits}-qubit register"
            )));
        }
        let shots: u64 = counts.values().sum();
        if shots == 0 {
            return Err(Error::Argument("counts table holds no shots".into()));
        }
        Ok(CountsTable {
            n_qubits,
            counts: counts.into_iter().filter(|&(_, c)| c > 0).collect(),
            shots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, outcome: usize) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }
}
