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

//! Local-phase image encoding.
//!
//! Pixel `(r, c)` of a `W x H` image becomes position `j = r*W + c`. Its
//! intensity `v` is stored as the phase `p = pi * v / 255` on basis state
//! `|j>` of the position register, and a cosine-sampling circuit moves that
//! phase into the outcome statistics of one ancilla qubit:
//!
//! ```text
//! P(position = j, ancilla = 0) = (1 + cos p_j) / (2 * 2^position_qubits)
//! P(position = j, ancilla = 1) = (1 - cos p_j) / (2 * 2^position_qubits)
//! ```
//!
//! The ancilla is the highest-index qubit, so outcome index
//! `k = j + ancilla * 2^position_qubits`. Decoding only needs the per-position
//! ratio `P(j, 0) / (P(j, 0) + P(j, 1)) = (1 + cos p_j) / 2`, which does not
//! depend on the shot count.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::statevec::{CountsTable, ProbabilityTable, StateVector, MAX_QUBITS};

fn ceil_log2(x: usize) -> usize {
    x.next_power_of_two().trailing_zeros() as usize
}

/// Total qubits for a `width x height` image: position bits plus one ancilla.
pub fn qubit_count(width: usize, height: usize) -> usize {
    ceil_log2(width) + ceil_log2(height) + 1
}

/// Row-major flattening, `j = r * width + c`.
pub fn flatten(image: &GrayImage) -> Vec<u8> {
    image.pixels().to_vec()
}

pub fn intensity_to_phase(value: i32) -> Result<f64> {
    if !(0..=255).contains(&value) {
        return Err(Error::Argument(format!(
            "intensity {value} outside [0, 255]"
        )));
    }
    Ok(phase_of(value as u8))
}

pub(crate) fn phase_of(value: u8) -> f64 {
    PI * f64::from(value) / 255.0
}

/// Nearest gray level for a phase in `[0, pi]`.
pub fn phase_to_intensity(phase: f64) -> u8 {
    (255.0 * phase / PI).round().clamp(0.0, 255.0) as u8
}

/// Phase recovered from an ancilla-zero ratio `r = (1 + cos p) / 2`.
pub fn ratio_to_phase(ratio: f64) -> f64 {
    (2.0 * ratio - 1.0).clamp(-1.0, 1.0).acos()
}

/// Ancilla-zero ratio an ideal backend produces for phase `p`.
pub fn phase_to_ratio(phase: f64) -> f64 {
    (1.0 + phase.cos()) / 2.0
}

/// Per-pixel phases padded with zeros to the next power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    width: usize,
    height: usize,
    phases: Vec<f64>,
}

impl PhaseVector {
    /// Builds a phase vector from raw pixel phases; each must lie in `[0, pi]`.
    pub fn from_pixel_phases(width: usize, height: usize, pixel_phases: &[f64]) -> Result<Self> {
        if width == 0 || height == 0 || pixel_phases.len() != width * height {
            return Err(Error::Size(format!(
                "{} phases for a {width}x{height} image",
                pixel_phases.len()
            )));
        }
        if let Some(bad) = pixel_phases.iter().find(|p| !(0.0..=PI).contains(*p)) {
            return Err(Error::Argument(format!(
                "pixel phase {bad} outside [0, pi]"
            )));
        }
        let mut phases = pixel_phases.to_vec();
        phases.resize((width * height).next_power_of_two(), 0.0);
        Ok(PhaseVector {
            width,
            height,
            phases,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Index of the last pixel phase, `W*H - 1`.
    pub fn last_index(&self) -> usize {
        self.width * self.height - 1
    }

    /// Padded length, the smallest power of two `>= W*H`.
    pub fn padded_len(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn pixel_phases(&self) -> &[f64] {
        &self.phases[..self.width * self.height]
    }

    pub fn layout(&self) -> EncodingLayout {
        EncodingLayout::new(self.width, self.height)
    }
}

pub fn build_phase_vector(image: &GrayImage) -> PhaseVector {
    let pixel_phases: Vec<f64> = flatten(image).into_iter().map(phase_of).collect();
    PhaseVector::from_pixel_phases(image.width(), image.height(), &pixel_phases)
        .expect("intensity phases lie in [0, pi]")
}

/// Register layout for a `width x height` image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingLayout {
    pub width: usize,
    pub height: usize,
    pub position_qubits: usize,
    pub ancilla: usize,
    pub total_qubits: usize,
}

impl EncodingLayout {
    pub fn new(width: usize, height: usize) -> Self {
        let position_qubits = ceil_log2(width) + ceil_log2(height);
        EncodingLayout {
            width,
            height,
            position_qubits,
            ancilla: position_qubits,
            total_qubits: position_qubits + 1,
        }
    }

    pub fn for_image(image: &GrayImage) -> Self {
        EncodingLayout::new(image.width(), image.height())
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// Number of basis states of the position register.
    pub fn position_dim(&self) -> usize {
        1 << self.position_qubits
    }

    fn check_register(&self, n_qubits: usize) -> Result<()> {
        if n_qubits != self.total_qubits {
            return Err(Error::Argument(format!(
                "readout covers {n_qubits} qubits but a {}x{} layout needs {}",
                self.width, self.height, self.total_qubits
            )));
        }
        Ok(())
    }
}

/// Cosine-sampling state for the given layout and position phases.
///
/// `phases` may hold any values in `[-pi, pi]` and at most `position_dim`
/// entries; missing entries act as phase 0. The circuit is: Hadamard on
/// every qubit, the phase diagonal on the ancilla = 1 half of the register,
/// then a second Hadamard on the ancilla.
pub fn encode_phases(layout: &EncodingLayout, phases: &[f64]) -> Result<StateVector> {
    if layout.total_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "{}x{} image needs {} qubits, cap is {MAX_QUBITS}",
            layout.width, layout.height, layout.total_qubits
        )));
    }
    let dim = layout.position_dim();
    if phases.len() > dim {
        return Err(Error::Size(format!(
            "{} phases for a {dim}-state position register",
            phases.len()
        )));
    }
    let mut diagonal = vec![0.0; dim + phases.len()];
    diagonal[dim..].copy_from_slice(phases);
    StateVector::uniform_superposition(layout.total_qubits)?
        .apply_phase_diagonal(&diagonal)?
        .apply_hadamard(layout.ancilla)
}

pub fn encode(pv: &PhaseVector) -> Result<StateVector> {
    encode_phases(&pv.layout(), pv.phases())
}

/// Decoded image together with the positions that received no shots.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub image: GrayImage,
    /// Positions decoded as 0 because no shot landed on them.
    pub starved: Vec<usize>,
}

/// Per-position ancilla-zero ratios; `None` where the position saw no weight.
pub fn count_ratios(counts: &CountsTable, layout: &EncodingLayout) -> Result<Vec<Option<f64>>> {
    layout.check_register(counts.n_qubits())?;
    let dim = layout.position_dim();
    let mut zeros = vec![0u64; layout.pixels()];
    let mut ones = vec![0u64; layout.pixels()];
    for (outcome, count) in counts.iter() {
        let (position, ancilla) = (outcome % dim, outcome / dim);
        if position < layout.pixels() {
            if ancilla == 0 {
                zeros[position] += count;
            } else {
                ones[position] += count;
            }
        }
    }
    Ok(zeros
        .into_iter()
        .zip(ones)
        .map(|(z, o)| (z + o > 0).then(|| z as f64 / (z + o) as f64))
        .collect())
}

pub fn probability_ratios(
    probs: &ProbabilityTable,
    layout: &EncodingLayout,
) -> Result<Vec<Option<f64>>> {
    layout.check_register(probs.n_qubits())?;
    let dim = layout.position_dim();
    let p = probs.probs();
    Ok((0..layout.pixels())
        .map(|j| {
            let (z, o) = (p[j], p[j + dim]);
            (z + o > 0.0).then(|| z / (z + o))
        })
        .collect())
}

/// Maps per-position ratios to pixels through `adjust`, which receives the
/// measured ratio and returns the ratio to decode.
pub(crate) fn ratios_to_image(
    ratios: &[Option<f64>],
    layout: &EncodingLayout,
    adjust: impl Fn(f64) -> f64,
) -> Decoded {
    let mut starved = Vec::new();
    let pixels = ratios
        .iter()
        .enumerate()
        .map(|(j, ratio)| match ratio {
            Some(r) => phase_to_intensity(ratio_to_phase(adjust(*r))),
            None => {
                starved.push(j);
                0
            }
        })
        .collect();
    let image = GrayImage::new(layout.width, layout.height, pixels).expect("one ratio per pixel");
    if !starved.is_empty() {
        log::warn!(
            "{} positions received no shots and decode to 0",
            starved.len()
        );
    }
    Decoded { image, starved }
}

pub fn decode_counts(counts: &CountsTable, layout: &EncodingLayout) -> Result<Decoded> {
    let ratios = count_ratios(counts, layout)?;
    Ok(ratios_to_image(&ratios, layout, |r| r))
}

pub fn decode_probs(probs: &ProbabilityTable, layout: &EncodingLayout) -> Result<Decoded> {
    let ratios = probability_ratios(probs, layout)?;
    Ok(ratios_to_image(&ratios, layout, |r| r))
}

/// Noiseless encode and decode; returns the reconstruction.
pub fn analytic_round_trip(image: &GrayImage) -> Result<GrayImage> {
    let layout = EncodingLayout::for_image(image);
    let state = encode(&build_phase_vector(image))?;
    Ok(decode_probs(&state.probabilities(), &layout)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn img(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn flatten_is_row_major() {
        let v = flatten(&img(2, 2, &[10, 20, 30, 40]));
        assert_eq!(v, vec![10, 20, 30, 40]);
        let im = img(2, 2, &[10, 20, 30, 40]);
        assert_eq!(v[2], im.get(1, 0));
        assert_eq!(flatten(&img(1, 1, &[7])), vec![7]);
        let mut px = vec![0u8; 256];
        px[3 * 16 + 5] = 99;
        let big = img(16, 16, &px);
        assert_eq!(big.get(3, 5), 99);
        assert_eq!(flatten(&big)[53], 99);
    }

    #[test]
    fn intensity_phase_map() {
        assert_eq!(intensity_to_phase(0).unwrap(), 0.0);
        assert_eq!(intensity_to_phase(255).unwrap(), PI);
        assert!((intensity_to_phase(128).unwrap() - 1.5770).abs() < 5e-5);
        assert!((intensity_to_phase(128).unwrap() - PI * 128.0 / 255.0).abs() < 1e-15);
        assert!(intensity_to_phase(256).is_err());
        assert!(intensity_to_phase(-1).is_err());
        for v in 0..255 {
            assert!(intensity_to_phase(v).unwrap() < intensity_to_phase(v + 1).unwrap());
        }
        for v in 0..=255u8 {
            assert_eq!(phase_to_intensity(phase_of(v)), v);
            assert_eq!(
                phase_to_intensity(ratio_to_phase(phase_to_ratio(phase_of(v)))),
                v
            );
        }
    }

    #[test]
    fn phase_vector_padding() {
        let pv = build_phase_vector(&img(2, 2, &[0; 4]));
        assert_eq!(pv.phases(), &[0.0; 4]);
        assert_eq!((pv.last_index(), pv.padded_len()), (3, 4));

        let pv = build_phase_vector(&img(3, 1, &[0, 255, 0]));
        assert_eq!(pv.phases(), &[0.0, PI, 0.0, 0.0]);
        assert_eq!(pv.padded_len(), 4);

        let pv = build_phase_vector(&GrayImage::filled(16, 16, 3).unwrap());
        assert_eq!((pv.last_index(), pv.padded_len()), (255, 256));
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(qubit_count(16, 16), 9);
        assert_eq!(qubit_count(8, 8), 7);
        assert_eq!(qubit_count(1, 1), 1);
        assert_eq!(qubit_count(3, 5), 6);
        let layout = EncodingLayout::new(16, 16);
        assert_eq!(
            (layout.position_qubits, layout.ancilla, layout.total_qubits),
            (8, 8, 9)
        );
    }

    fn ancilla_zero_given_position(state: &StateVector, layout: &EncodingLayout, j: usize) -> f64 {
        let p = state.probabilities();
        let dim = layout.position_dim();
        p.probs()[j] / (p.probs()[j] + p.probs()[j + dim])
    }

    #[test]
    fn encode_examples() {
        let layout = EncodingLayout::new(2, 2);
        let zero = encode(&build_phase_vector(&img(2, 2, &[0; 4]))).unwrap();
        for j in 0..4 {
            assert!((ancilla_zero_given_position(&zero, &layout, j) - 1.0).abs() < 1e-12);
        }

        let pi_pixel = encode(&build_phase_vector(&img(2, 2, &[0, 255, 0, 0]))).unwrap();
        assert!(ancilla_zero_given_position(&pi_pixel, &layout, 1).abs() < 1e-12);
    }

    #[test]
    fn encode_negative_angle_matches_dense_oracle() {
        use num_complex::Complex64;
        // Dense 2-qubit oracle: H on the ancilla, controlled phase, H again,
        // acting on |+> (position) x |0> (ancilla). Ancilla is qubit 1.
        let theta = -3.0 * PI / 4.0;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        let h_anc = [
            [c(h), c(0.0), c(h), c(0.0)],
            [c(0.0), c(h), c(0.0), c(h)],
            [c(h), c(0.0), c(-h), c(0.0)],
            [c(0.0), c(h), c(0.0), c(-h)],
        ];
        // phase only on position 1 with ancilla 1 (index 3)
        let cp = [c(1.0), c(1.0), c(1.0), Complex64::from_polar(1.0, theta)];
        let mv = |m: &[[Complex64; 4]; 4], v: &[Complex64; 4]| {
            let mut out = [c(0.0); 4];
            for i in 0..4 {
                out[i] = (0..4).map(|k| m[i][k] * v[k]).sum();
            }
            out
        };
        let start = [c(h), c(h), c(0.0), c(0.0)];
        let mut v = mv(&h_anc, &start);
        for i in 0..4 {
            v[i] *= cp[i];
        }
        let v = mv(&h_anc, &v);
        let oracle = v[1].norm_sqr() / (v[1].norm_sqr() + v[3].norm_sqr());
        assert!((oracle - 0.146_446_609_4).abs() < 1e-9);

        let layout = EncodingLayout::new(2, 1);
        let state = encode_phases(&layout, &[0.0, theta]).unwrap();
        let got = ancilla_zero_given_position(&state, &layout, 1);
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - (1.0 + (3.0 * PI / 4.0).cos()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn encode_respects_qubit_cap() {
        let layout = EncodingLayout::new(1 << 12, 1 << 12);
        assert!(matches!(encode_phases(&layout, &[]), Err(Error::Size(_))));
    }

    fn counts_for(layout: &EncodingLayout, per_position: &[(u64, u64)]) -> CountsTable {
        let dim = layout.position_dim();
        let mut map = BTreeMap::new();
        for (j, &(z, o)) in per_position.iter().enumerate() {
            map.insert(j, z);
            map.insert(j + dim, o);
        }
        CountsTable::new(layout.total_qubits, map).unwrap()
    }

    #[test]
    fn decode_counts_examples() {
        let layout = EncodingLayout::new(2, 2);
        let all_zero = decode_counts(&counts_for(&layout, &[(50, 0); 4]), &layout).unwrap();
        assert_eq!(all_zero.image.pixels(), &[0; 4]);
        assert!(all_zero.starved.is_empty());

        let half = decode_counts(&counts_for(&layout, &[(40, 40); 4]), &layout).unwrap();
        assert_eq!(half.image.pixels(), &[128; 4]);

        let starving = counts_for(&layout, &[(10, 0), (0, 0), (0, 10), (5, 5)]);
        let decoded = decode_counts(&starving, &layout).unwrap();
        assert_eq!(decoded.image.pixels(), &[0, 0, 255, 128]);
        assert_eq!(decoded.starved, vec![1]);

        let wrong = EncodingLayout::new(4, 4);
        assert!(matches!(
            decode_counts(&starving, &wrong),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn uniform_probabilities_decode_to_mid_gray() {
        let layout = EncodingLayout::new(4, 2);
        let probs = ProbabilityTable::new(4, vec![1.0 / 16.0; 16]).unwrap();
        let decoded = decode_probs(&probs, &layout).unwrap();
        assert_eq!(decoded.image.pixels(), &[128; 8]);
    }

    #[test]
    fn large_shot_counts_recover_image() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(77);
        for trial in 0..100 {
            let w = 1 + trial % 16;
            let h = 1 + (trial / 16) % 16;
            let px: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
            let image = img(w, h, &px);
            let layout = EncodingLayout::for_image(&image);
            let probs = encode(&build_phase_vector(&image)).unwrap().probabilities();
            // shots -> infinity: scale the analytic distribution to exact counts
            let scale = 1e15;
            let map = probs
                .probs()
                .iter()
                .enumerate()
                .map(|(k, p)| (k, (p * scale).round() as u64))
                .collect();
            let counts = CountsTable::new(layout.total_qubits, map).unwrap();
            assert_eq!(decode_counts(&counts, &layout).unwrap().image, image);
        }
    }

    #[test]
    fn padding_does_not_change_decoding() {
        let image = img(3, 1, &[17, 201, 99]);
        let layout = EncodingLayout::for_image(&image);
        let state = encode(&build_phase_vector(&image)).unwrap();
        let p = state.probabilities();
        // padding position 3 carries phase 0: ancilla always 0
        let dim = layout.position_dim();
        assert!(p.probs()[3 + dim].abs() < 1e-15);
        assert_eq!(analytic_round_trip(&image).unwrap(), image);
    }
}
