//! Orthonormal multi-level 2-D discrete wavelet transform with periodic
//! boundaries. Coefficients use the Mallat layout: after each level the
//! approximation band occupies the top-left quadrant of the active block.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{ComplexImage, Domain, Shape, SparseCode};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveletFamily {
    Haar,
    /// Four-tap Daubechies filter (two vanishing moments).
    #[default]
    Daubechies4,
}

impl WaveletFamily {
    fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletFamily::Haar => {
                let s = core::f64::consts::FRAC_1_SQRT_2;
                alloc::vec![s, s]
            }
            WaveletFamily::Daubechies4 => {
                let r3 = 3f64.sqrt();
                let d = 4.0 * 2f64.sqrt();
                alloc::vec![(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d]
            }
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Daubechies4 => "db4",
        })
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletFamily::Haar),
            "db4" | "daubechies4" => Ok(WaveletFamily::Daubechies4),
            other => Err(Error::Config(alloc::format!("unknown wavelet family `{other}`"))),
        }
    }
}

/// Wavelet family and decomposition depth; the boundary is always periodic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Daubechies4,
            levels: 3,
        }
    }
}

impl WaveletSpec {
    pub fn new(family: WaveletFamily, levels: usize) -> Self {
        Self { family, levels }
    }

    pub fn max_levels(shape: Shape) -> usize {
        let m = shape.height.min(shape.width);
        if m == 0 {
            0
        } else {
            m.ilog2() as usize
        }
    }

    pub fn validate(&self, shape: Shape) -> Result<()> {
        shape.require_dyadic_square()?;
        let max = Self::max_levels(shape);
        if self.levels == 0 || self.levels > max {
            return Err(Error::InvalidLevels {
                levels: self.levels,
                shape,
                max,
            });
        }
        Ok(())
    }

    /// Depth clamped to what a grid supports; small test grids use this.
    pub fn clamped_to(&self, shape: Shape) -> Self {
        Self {
            family: self.family,
            levels: self.levels.min(Self::max_levels(shape)).max(1),
        }
    }

    fn filters(&self) -> Filters {
        let low = self.family.lowpass();
        let n = low.len();
        let high = (0..n)
            .map(|t| {
                let s = if t % 2 == 0 { 1.0 } else { -1.0 };
                s * low[n - 1 - t]
            })
            .collect();
        Filters { low, high }
    }
}

struct Filters {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl Filters {
    fn analyze_1d(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = input.len();
        let half = n / 2;
        for k in 0..half {
            let mut a = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for (t, (&l, &h)) in self.low.iter().zip(&self.high).enumerate() {
                let x = input[(2 * k + t) % n];
                a += x * l;
                d += x * h;
            }
            out[k] = a;
            out[half + k] = d;
        }
    }

    fn synthesize_1d(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = input.len();
        let half = n / 2;
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for k in 0..half {
            let a = input[k];
            let d = input[half + k];
            for (t, (&l, &h)) in self.low.iter().zip(&self.high).enumerate() {
                out[(2 * k + t) % n] += a * l + d * h;
            }
        }
    }
}

/// Apply a 1-D transform to every row then every column of the top-left
/// `n × n` block (or the reverse order for synthesis).
fn block_pass(
    data: &mut [Complex64],
    width: usize,
    n: usize,
    op: impl Fn(&[Complex64], &mut [Complex64]),
    rows_first: bool,
) {
    let mut line = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut rows = |data: &mut [Complex64]| {
        for r in 0..n {
            line.copy_from_slice(&data[r * width..r * width + n]);
            op(&line, &mut out);
            data[r * width..r * width + n].copy_from_slice(&out);
        }
    };
    let mut line_c = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut out_c = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut cols = |data: &mut [Complex64]| {
        for c in 0..n {
            for r in 0..n {
                line_c[r] = data[r * width + c];
            }
            op(&line_c, &mut out_c);
            for r in 0..n {
                data[r * width + c] = out_c[r];
            }
        }
    };
    if rows_first {
        rows(data);
        cols(data);
    } else {
        cols(data);
        rows(data);
    }
}

/// Raw analysis; the spec must already be validated for `shape`.
pub(crate) fn analyze_raw(spec: &WaveletSpec, shape: Shape, data: &[Complex64]) -> Vec<Complex64> {
    let filters = spec.filters();
    let mut buf = data.to_vec();
    let mut n = shape.width;
    for _ in 0..spec.levels {
        block_pass(&mut buf, shape.width, n, |i, o| filters.analyze_1d(i, o), true);
        n /= 2;
    }
    buf
}

pub(crate) fn synthesize_raw(spec: &WaveletSpec, shape: Shape, data: &[Complex64]) -> Vec<Complex64> {
    let filters = spec.filters();
    let mut buf = data.to_vec();
    for level in (0..spec.levels).rev() {
        let n = shape.width >> level;
        block_pass(&mut buf, shape.width, n, |i, o| filters.synthesize_1d(i, o), false);
    }
    buf
}

/// `α = Aᵀ x`
pub fn wavelet_analyze(x: &ComplexImage, spec: &WaveletSpec) -> Result<SparseCode> {
    x.require_domain(Domain::Image)?;
    spec.validate(x.shape())?;
    Ok(SparseCode::from_parts(
        x.shape(),
        analyze_raw(spec, x.shape(), x.data()),
    ))
}

/// `x = A α`
pub fn wavelet_synthesize(code: &SparseCode, spec: &WaveletSpec) -> Result<ComplexImage> {
    spec.validate(code.shape())?;
    Ok(ComplexImage::from_parts(
        code.shape(),
        synthesize_raw(spec, code.shape(), code.data()),
        Domain::Image,
    ))
}
