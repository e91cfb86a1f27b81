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

//! 8-bit grayscale rasters and their binary PGM (P5) form.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major `width x height` raster of 8-bit intensities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size(format!("image dimensions {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Size(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }

    /// Serializes as `P5\n<w> <h>\n255\n` followed by the raw raster.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut header = HeaderReader { bytes, pos: 0 };
        if header.bytes.get(..2) != Some(b"P5") {
            return Err(Error::Parse("not a binary PGM (missing P5 magic)".into()));
        }
        header.pos = 2;
        let width = header.next_number("width")?;
        let height = header.next_number("height")?;
        let maxval = header.next_number("maxval")?;
        if maxval != 255 {
            return Err(Error::Parse(format!(
                "unsupported maxval {maxval}, expected 255"
            )));
        }
        // exactly one whitespace byte separates the header from the raster
        match header.bytes.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => header.pos += 1,
            _ => return Err(Error::Parse("missing whitespace after maxval".into())),
        }
        let raster = &bytes[header.pos..];
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parse("image dimensions overflow".into()))?;
        if raster.len() < expected {
            return Err(Error::Parse(format!(
                "truncated raster: {} of {expected} bytes",
                raster.len()
            )));
        }
        if raster.len() > expected {
            return Err(Error::Parse(format!(
                "{} trailing bytes after raster",
                raster.len() - expected
            )));
        }
        GrayImage::new(width, height, raster.to_vec()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        GrayImage::from_pgm_bytes(&bytes).map_err(|e| e.in_file(path))
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm_bytes()).map_err(|e| Error::io(path, e))
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<usize> {
        let start = self.pos;
        self.skip_separators();
        if self.pos == start {
            return Err(Error::Parse(format!("expected whitespace before {what}")));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = &self.bytes[digits_start..self.pos];
        if digits.is_empty() {
            return Err(Error::Parse(format!("missing {what}")));
        }
        std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::Parse(format!("invalid {what}")))
    }
}
