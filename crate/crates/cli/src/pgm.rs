//! Binary PGM (`P5`) import and export, 8- or 16-bit.

use std::fs;
use std::path::Path;

use csmri_core::{RealImage, Shape};

use crate::error::{CliError, Result};

/// Parse a `P5` image and normalize by its maxval to `[0, 1]`.
pub fn decode(bytes: &[u8]) -> std::result::Result<RealImage, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<&[u8], String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(&bytes[start..pos])
    };
    if token()? != b"P5" {
        return Err("not a binary PGM (P5)".into());
    }
    let mut number = |what: &str| -> std::result::Result<usize, String> {
        let t = token()?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what}"))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let n = width * height;
    let raster = bytes.get(start..).unwrap_or(&[]);
    if raster.len() < n * depth {
        return Err(format!("raster has {} bytes, expected {}", raster.len(), n * depth));
    }
    let scale = maxval as f64;
    let data = (0..n)
        .map(|i| {
            let v = if depth == 1 {
                raster[i] as f64
            } else {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
            };
            (v / scale).min(1.0)
        })
        .collect();
    RealImage::new(Shape::new(height, width), data).map_err(|e| e.to_string())
}

/// 16-bit `P5`; values are clamped to `[0, 1]` first.
pub fn encode(img: &RealImage) -> Vec<u8> {
    let s = img.shape();
    let mut out = format!("P5\n{} {}\n65535\n", s.width, s.height).into_bytes();
    for &v in img.data() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn read(path: &Path) -> Result<RealImage> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|r| CliError::format(path, r))
}

pub fn write(img: &RealImage, path: &Path) -> Result<()> {
    fs::write(path, encode(img)).map_err(|e| CliError::io(path, e))
}
