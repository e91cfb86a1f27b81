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

//! One-dimensional interpolation through calibration knots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    /// Piecewise cubic Hermite with Fritsch–Carlson limited slopes.
    #[default]
    MonotoneCubic,
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interpolation::Linear => "linear",
            Interpolation::MonotoneCubic => "monotone-cubic",
        })
    }
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Interpolation::Linear),
            "monotone-cubic" => Ok(Interpolation::MonotoneCubic),
            other => Err(Error::Parse(format!("unknown interpolation `{other}`"))),
        }
    }
}

/// Interpolant over strictly increasing abscissae. Queries outside the knot
/// range take the value of the nearest end knot.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Option<Vec<f64>>,
}

impl Interpolant {
    pub fn new(kind: Interpolation, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Size(format!(
                "{} abscissae, {} ordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: xs.len(),
            });
        }
        if let Some(i) = xs
            .windows(2)
            .position(|w| w[0] >= w[1] || !w[0].is_finite())
        {
            return Err(Error::Argument(format!(
                "abscissae not strictly increasing at {i}: {} then {}",
                xs[i],
                xs[i + 1]
            )));
        }
        let slopes = match kind {
            Interpolation::Linear => None,
            Interpolation::MonotoneCubic => Some(fritsch_carlson_slopes(&xs, &ys)),
        };
        Ok(Interpolant { xs, ys, slopes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first knot strictly greater than x; x lies in [xs[i], xs[i+1])
        let upper = self.xs.partition_point(|&k| k <= x);
        let i = upper - 1;
        if x == self.xs[i] {
            return self.ys[i];
        }
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        match &self.slopes {
            None => y0 + t * (y1 - y0),
            Some(m) => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * y0 + h10 * h * m[i] + h01 * y1 + h11 * h * m[i + 1]
            }
        }
    }
}

/// Tangents that keep each cubic segment monotone between its knots.
fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let secants: Vec<f64> = (0..n - 1)
        .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for k in 1..n - 1 {
        let (a, b) = (secants[k - 1], secants[k]);
        m[k] = if a * b <= 0.0 { 0.0 } else { (a + b) / 2.0 };
    }
    for (k, &d) in secants.iter().enumerate() {
        if d == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let alpha = m[k] / d;
        let beta = m[k + 1] / d;
        let radius = alpha * alpha + beta * beta;
        if radius > 9.0 {
            let tau = 3.0 / radius.sqrt();
            m[k] = tau * alpha * d;
            m[k + 1] = tau * beta * d;
        }
    }
    m
}
