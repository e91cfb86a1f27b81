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

//! CSV and SVG report emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{AggregateReport, ImageMetrics, Summary};

/// One line of the per-image metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub id: String,
    pub stage: String,
    pub pearson_r: f64,
    pub p_value: f64,
    pub mse: f64,
    pub err_stdev: f64,
}

impl MetricsRow {
    pub fn new(id: &str, stage: &str, m: &ImageMetrics) -> Self {
        MetricsRow {
            id: id.to_owned(),
            stage: stage.to_owned(),
            pearson_r: m.pearson_r,
            p_value: m.p_value,
            mse: m.mse,
            err_stdev: m.err_stdev,
        }
    }

    pub fn metrics(&self) -> ImageMetrics {
        ImageMetrics {
            pearson_r: self.pearson_r,
            p_value: self.p_value,
            mse: self.mse,
            err_stdev: self.err_stdev,
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_metrics_csv(path: impl AsRef<Path>, rows: &[MetricsRow]) -> Result<()> {
    let mut writer = csv_writer(path.as_ref())?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

pub fn summary_rows(report: &AggregateReport) -> Vec<SummaryRow> {
    let row = |metric: &str, s: &Summary| SummaryRow {
        metric: metric.to_owned(),
        min: s.min,
        mean: s.mean,
        max: s.max,
    };
    vec![
        row("pearson_r", &report.pearson_r),
        row("mse", &report.mse),
        row("err_stdev", &report.err_stdev),
        row("p_value", &report.p_value),
    ]
}

/// Writes the min/mean/max table, one row per metric.
pub fn write_summary_csv(path: impl AsRef<Path>, report: &AggregateReport) -> Result<()> {
    let mut writer = csv_writer(path.as_ref())?;
    for row in summary_rows(report) {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Plain-text table in the min/mean/max layout.
pub fn format_summary(report: &AggregateReport) -> String {
    let mut out = format!(
        "{:<18}{:>12}{:>12}{:>12}   (n = {})\n",
        "", "min", "mean", "max", report.count
    );
    let labels = [
        ("Pearson's R", &report.pearson_r),
        ("Mean square error", &report.mse),
        ("Std dev of error", &report.err_stdev),
    ];
    for (label, s) in labels {
        let _ = writeln!(
            out,
            "{label:<18}{:>12.5}{:>12.5}{:>12.5}",
            s.min, s.mean, s.max
        );
    }
    out
}

const SERIES_COLORS: [&str; 4] = ["#d1495b", "#00798c", "#edae49", "#30638e"];

/// Line chart of per-image values, one polyline per series.
pub fn line_chart_svg(title: &str, y_label: &str, series: &[(&str, &[f64])]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    let len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let y_max = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let x_at = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / (len.max(2) - 1) as f64;
    let y_at = |v: f64| H - PAD - (H - 2.0 * PAD) * v / y_max;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{y_max:.4}</text>"#,
        PAD - 4.0,
        PAD + 4.0
    );
    for (k, (name, values)) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_at(i), y_at(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 16.0 * k as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::aggregate;

    fn sample(mse: f64) -> ImageMetrics {
        ImageMetrics {
            pearson_r: 0.9,
            p_value: 1e-30,
            mse,
            err_stdev: 0.1,
        }
    }

    #[test]
    fn metrics_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows = vec![
            MetricsRow::new("img_00000", "raw", &sample(0.1)),
            MetricsRow::new("img_00001", "raw", &sample(1.0 / 3.0)),
        ];
        write_metrics_csv(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("id,stage,pearson_r,p_value,mse,err_stdev\n"));
        assert_eq!(read_metrics_csv(&path).unwrap(), rows);
    }

    #[test]
    fn summary_has_min_mean_max_per_metric() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let report = aggregate(&[sample(0.1), sample(0.3)]).unwrap();
        write_summary_csv(&path, &report).unwrap();
        let rows = read_summary_csv(&path).unwrap();
        let metrics: Vec<&str> = rows.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(metrics, ["pearson_r", "mse", "err_stdev", "p_value"]);
        assert_eq!(rows[1].min, 0.1);
        assert_eq!(rows[1].max, 0.3);
        assert!(fs::read_to_string(&path)
            .unwrap()
            .starts_with("metric,min,mean,max\n"));
    }

    #[test]
    fn summary_text_uses_table_labels() {
        let report = AggregateReport {
            count: 631,
            pearson_r: Summary {
                min: 0.72075,
                mean: 0.96135,
                max: 0.99993,
            },
            p_value: Summary {
                min: 0.0,
                mean: 0.0,
                max: 0.0,
            },
            mse: Summary {
                min: 0.00003,
                mean: 0.00885,
                max: 0.06843,
            },
            err_stdev: Summary {
                min: 0.00484,
                mean: 0.04444,
                max: 0.24108,
            },
        };
        let text = format_summary(&report);
        assert!(text.contains("Pearson's R"));
        assert!(text.contains("0.72075     0.96135     0.99993"));
        assert!(text.contains("(n = 631)"));
    }

    #[test]
    fn chart_contains_one_polyline_per_series() {
        let svg = line_chart_svg(
            "MSE <before/after>",
            "mse",
            &[("before", &[0.2, 0.3]), ("after", &[0.01, 0.02])],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("&lt;before/after&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
