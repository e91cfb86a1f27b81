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

//! Image comparison statistics.
//!
//! MSE and error spread are computed on pixels scaled to `[0, 1]`. The
//! per-image error spread is a population standard deviation; the `sigma`
//! in `mse +/- n*sigma` coverage statistics is a sample standard deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::special;

fn normalized(img: &GrayImage) -> impl Iterator<Item = f64> + '_ {
    img.pixels().iter().map(|&v| f64::from(v) / 255.0)
}

/// Pearson's r over flattened pixels and its two-sided t-test p-value.
pub fn pearson(a: &GrayImage, b: &GrayImage) -> Result<(f64, f64)> {
    a.same_dims(b)?;
    let n = a.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let constant = |img: &GrayImage| img.pixels().iter().all(|&v| v == img.pixels()[0]);
    if constant(a) {
        return Err(Error::UndefinedCorrelation("first"));
    }
    if constant(b) {
        return Err(Error::UndefinedCorrelation("second"));
    }
    let mean = |img: &GrayImage| normalized(img).sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in normalized(a).zip(normalized(b)) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let r = (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        special::student_t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok((r, p))
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_dims(b)?;
    let sum: f64 = normalized(a)
        .zip(normalized(b))
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// Population standard deviation of the signed differences `b - a`.
pub fn err_stdev(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_dims(b)?;
    let diffs: Vec<f64> = normalized(a)
        .zip(normalized(b))
        .map(|(x, y)| y - x)
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
    Ok(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub pearson_r: f64,
    pub p_value: f64,
    pub mse: f64,
    pub err_stdev: f64,
}

impl ImageMetrics {
    /// Compares a `candidate` reconstruction against its `reference`.
    pub fn compute(reference: &GrayImage, candidate: &GrayImage) -> Result<Self> {
        let (pearson_r, p_value) = pearson(reference, candidate)?;
        Ok(ImageMetrics {
            pearson_r,
            p_value,
            mse: mse(reference, candidate)?,
            err_stdev: err_stdev(reference, candidate)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Summary {
        let n = values.clone().count() as f64;
        let min = values.clone().fold(f64::INFINITY, f64::min);
        let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
        // rounding can push the mean a hair outside [min, max]
        let mean = (values.sum::<f64>() / n).clamp(min, max);
        Summary { min, mean, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub count: usize,
    pub pearson_r: Summary,
    pub p_value: Summary,
    pub mse: Summary,
    pub err_stdev: Summary,
}

pub fn aggregate(samples: &[ImageMetrics]) -> Result<AggregateReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let col = |f: fn(&ImageMetrics) -> f64| Summary::of(samples.iter().map(f));
    Ok(AggregateReport {
        count: samples.len(),
        pearson_r: col(|m| m.pearson_r),
        p_value: col(|m| m.p_value),
        mse: col(|m| m.mse),
        err_stdev: col(|m| m.err_stdev),
    })
}

fn mean_and_sample_sd(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Fraction of `values` inside `mean +/- n * sigma`, bounds inclusive.
pub fn sigma_coverage(values: &[f64], n: f64) -> Result<f64> {
    let (mean, sd) = mean_and_sample_sd(values)?;
    if n.is_nan() || n < 0.0 {
        return Err(Error::Argument(format!("n = {n} must be non-negative")));
    }
    let inside = values
        .iter()
        .filter(|v| (*v - mean).abs() <= n * sd)
        .count();
    Ok(inside as f64 / values.len() as f64)
}

/// Smallest `n >= 0` (bisection to 1e-4) whose coverage reaches `target`.
pub fn coverage_to_n(values: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Argument(format!("target {target} outside (0, 1]")));
    }
    let (mean, sd) = mean_and_sample_sd(values)?;
    if sigma_coverage(values, 0.0)? >= target {
        return Ok(0.0);
    }
    // sd > 0 here, otherwise every value equals the mean
    let mut hi = values
        .iter()
        .map(|v| (v - mean).abs() / sd)
        .fold(0.0, f64::max);
    while sigma_coverage(values, hi)? < target {
        hi = hi * 2.0 + f64::EPSILON;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if sigma_coverage(values, mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
