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

//! Quantum image encoding with local phases on a simulated noisy backend.
//!
//! The pipeline takes an 8-bit grayscale image, stores each pixel as a
//! phase on the position register of a cosine-sampling circuit
//! ([`lpiqe`]), runs it on an emulated noisy device ([`noise`]) and decodes
//! the measured ancilla statistics back into pixels. A calibrated phase
//! distortion unraveling table ([`pdu`]) corrects the systematic part of the
//! distortion. [`metrics`] scores reconstructions and [`dataset`] produces
//! the paired datasets consumed by a downstream image-to-image translator.

pub mod dataset;
pub mod error;
pub mod image;
pub mod interp;
pub mod lpiqe;
pub mod metrics;
pub mod noise;
pub mod pdu;
pub mod report;
pub mod rng;
pub mod special;
pub mod statevec;

pub use error::{Error, Result};
pub use image::GrayImage;
