//! Domain types shared by every stage of the reconstruction.
//!
//! All grids are row-major `height × width`. Constructors reject non-finite
//! data, so downstream code may assume every entry is a finite `f64`.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// Grid dimensions in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub const fn square(size: usize) -> Self {
        Self::new(size, size)
    }

    pub const fn len(&self) -> usize {
        self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Transforms only operate on power-of-two square grids.
    pub fn require_dyadic_square(&self) -> Result<()> {
        if self.height == self.width && self.height.is_power_of_two() {
            Ok(())
        } else {
            Err(Error::NotDyadicSquare(*self))
        }
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyShape)
        } else {
            Ok(())
        }
    }

    pub fn ensure_same(&self, other: Shape) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: *self,
                right: other,
            })
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// Which side of the Fourier transform a complex grid lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Image,
    KSpace,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Image => f.write_str("image"),
            Domain::KSpace => f.write_str("k-space"),
        }
    }
}

fn check_len(shape: Shape, len: usize) -> Result<()> {
    shape.require_nonempty()?;
    if shape.len() != len {
        return Err(Error::LengthMismatch { shape, len });
    }
    Ok(())
}

/// Real-valued image, e.g. a magnitude image or a ground-truth phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    shape: Shape,
    data: Vec<f64>,
}

impl RealImage {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        check_len(shape, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "real image",
                index,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Result<Self> {
        Self::new(shape, alloc::vec![0.0; shape.len()])
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(shape.len());
        for row in 0..shape.height {
            for col in 0..shape.width {
                data.push(f(row, col));
            }
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.shape.width + col]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm(&self) -> f64 {
        linalg::real_norm(&self.data)
    }

    /// Lift into a complex image-domain grid with zero imaginary part.
    pub fn to_complex(&self) -> ComplexImage {
        ComplexImage {
            shape: self.shape,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            domain: Domain::Image,
        }
    }
}

/// Complex grid in either the image or the k-space domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    shape: Shape,
    data: Vec<Complex64>,
    domain: Domain,
}

impl ComplexImage {
    pub fn new(shape: Shape, data: Vec<Complex64>, domain: Domain) -> Result<Self> {
        check_len(shape, data.len())?;
        if let Some(index) = linalg::first_non_finite(&data) {
            return Err(Error::NonFinite {
                what: "complex image",
                index,
            });
        }
        Ok(Self {
            shape,
            data,
            domain,
        })
    }

    pub fn zeros(shape: Shape, domain: Domain) -> Result<Self> {
        Self::new(shape, alloc::vec![Complex64::new(0.0, 0.0); shape.len()], domain)
    }

    /// Build without validation; used internally where finiteness follows
    /// from finite inputs and bounded linear operators.
    pub(crate) fn from_parts(shape: Shape, data: Vec<Complex64>, domain: Domain) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Self {
            shape,
            data,
            domain,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.shape.width + col]
    }

    pub fn require_domain(&self, expected: Domain) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(Error::WrongDomain {
                expected,
                got: self.domain,
            })
        }
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.data)
    }

    /// Pixelwise modulus.
    pub fn magnitude(&self) -> RealImage {
        RealImage {
            shape: self.shape,
            data: self.data.iter().map(|c| c.norm()).collect(),
        }
    }
}

/// Wavelet coefficients of an image, laid out on the image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    shape: Shape,
    data: Vec<Complex64>,
}

impl SparseCode {
    pub fn new(shape: Shape, data: Vec<Complex64>) -> Result<Self> {
        check_len(shape, data.len())?;
        if let Some(index) = linalg::first_non_finite(&data) {
            return Err(Error::NonFinite {
                what: "sparse code",
                index,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            data: alloc::vec![Complex64::new(0.0, 0.0); shape.len()],
        }
    }

    pub(crate) fn from_parts(shape: Shape, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Self { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.data)
    }

    /// Real inner product `Re ⟨self, other⟩` treating C^N as R^{2N}.
    pub fn dot(&self, other: &SparseCode) -> f64 {
        linalg::dot_re(&self.data, &other.data)
    }

    pub fn distance(&self, other: &SparseCode) -> f64 {
        linalg::distance(&self.data, &other.data)
    }

    /// `self + scale * other`
    pub fn add_scaled(&self, scale: f64, other: &SparseCode) -> SparseCode {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b * scale)
            .collect();
        SparseCode::from_parts(self.shape, data)
    }

    pub fn sub(&self, other: &SparseCode) -> SparseCode {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> SparseCode {
        SparseCode::from_parts(self.shape, self.data.iter().map(|a| a * s).collect())
    }

    pub fn is_finite(&self) -> bool {
        linalg::first_non_finite(&self.data).is_none()
    }
}

/// Binary k-space acquisition pattern (the operator P).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    shape: Shape,
    indicator: Vec<bool>,
    count: usize,
}

impl SamplingMask {
    /// A mask must sample at least one location so that its ratio is in (0, 1].
    pub fn new(shape: Shape, indicator: Vec<bool>) -> Result<Self> {
        check_len(shape, indicator.len())?;
        let count = indicator.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::RatioOutOfRange(0.0));
        }
        Ok(Self {
            shape,
            indicator,
            count,
        })
    }

    pub fn full(shape: Shape) -> Result<Self> {
        Self::new(shape, alloc::vec![true; shape.len()])
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn is_sampled(&self, row: usize, col: usize) -> bool {
        self.indicator[row * self.shape.width + col]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Fraction of sampled locations.
    pub fn ratio(&self) -> f64 {
        self.count as f64 / self.shape.len() as f64
    }

    /// The k-space center, where the DC coefficient lands after centering.
    pub fn center(&self) -> (usize, usize) {
        (self.shape.height / 2, self.shape.width / 2)
    }
}

/// Check that an image and a mask live on the same grid.
pub fn validate_shapes(image: &ComplexImage, mask: &SamplingMask) -> Result<()> {
    image.shape().ensure_same(mask.shape())
}
