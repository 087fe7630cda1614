//! Analytic test images.

use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::types::{RealImage, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhantomKind {
    #[default]
    SheppLogan,
    Blocks,
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhantomKind::SheppLogan => "shepp-logan",
            PhantomKind::Blocks => "blocks",
        })
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shepp-logan" => Ok(PhantomKind::SheppLogan),
            "blocks" => Ok(PhantomKind::Blocks),
            other => Err(Error::Config(alloc::format!("unknown phantom `{other}`"))),
        }
    }
}

/// One ellipse: additive intensity, semi-axes, center, rotation in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

const fn e(intensity: f64, a: f64, b: f64, x0: f64, y0: f64, phi_deg: f64) -> Ellipse {
    Ellipse { intensity, a, b, x0, y0, phi_deg }
}

/// Modified Shepp-Logan table (higher-contrast intensities).
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    e(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    e(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    e(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    e(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    e(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    e(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    e(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    e(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    e(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    e(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.x0, y - self.y0);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u * u) / (self.a * self.a) + (v * v) / (self.b * self.b) <= 1.0
    }
}

/// Sum of ellipse intensities at normalized coordinates in `[-1, 1]²`.
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    SHEPP_LOGAN
        .iter()
        .filter(|e| e.contains(x, y))
        .map(|e| e.intensity)
        .sum()
}

/// Deterministic phantom of side `size` (a power of two, at least 32) with
/// values in `[0, 1]`.
pub fn phantom(size: usize, kind: PhantomKind) -> Result<RealImage> {
    if size < 32 || !size.is_power_of_two() {
        return Err(Error::Config(alloc::format!(
            "phantom size must be a power of two >= 32, got {size}"
        )));
    }
    let half = size as f64 / 2.0;
    match kind {
        PhantomKind::SheppLogan => RealImage::from_fn(Shape::square(size), |i, j| {
            let x = (j as f64 - half) / half;
            let y = (half - i as f64) / half;
            shepp_logan_value(x, y).clamp(0.0, 1.0)
        }),
        PhantomKind::Blocks => {
            // (top, left, bottom, right) as fractions of the side, and value
            const BLOCKS: [(f64, f64, f64, f64, f64); 5] = [
                (0.125, 0.125, 0.875, 0.875, 0.25),
                (0.1875, 0.1875, 0.5, 0.4375, 1.0),
                (0.25, 0.5625, 0.4375, 0.8125, 0.6),
                (0.5625, 0.25, 0.8125, 0.5, 0.75),
                (0.625, 0.625, 0.75, 0.75, 0.0),
            ];
            let n = size as f64;
            RealImage::from_fn(Shape::square(size), |i, j| {
                let (r, c) = (i as f64 / n, j as f64 / n);
                BLOCKS
                    .iter()
                    .rev()
                    .find(|b| r >= b.0 && c >= b.1 && r < b.2 && c < b.3)
                    .map_or(0.0, |b| b.4)
            })
        }
    }
}
