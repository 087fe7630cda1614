//! Linear operators of the acquisition model `y = P F A α`.
//!
//! * `F`: centered unitary 2-D DFT ([`fft_centered`] / [`ifft_centered`])
//! * `A`: orthonormal wavelet synthesis ([`wavelet_synthesize`]), `Aᵀ` its analysis
//! * `P`: 0/1 diagonal sampling ([`sample`]), self-adjoint
//!
//! Each factor is non-expansive, so `‖PFA‖₂ ≤ 1`.

mod fft;
mod wavelet;

use alloc::vec::Vec;

use num_complex::Complex64;

pub use fft::{fft_centered, ifft_centered};
pub use wavelet::{wavelet_analyze, wavelet_synthesize, WaveletFamily, WaveletSpec};

pub(crate) use fft::{centered_2d, Direction};
pub(crate) use wavelet::{analyze_raw, synthesize_raw};

use crate::error::Result;
use crate::types::{ComplexImage, Domain, SamplingMask, Shape, SparseCode};

/// Zero every k-space entry the mask does not acquire.
pub fn sample(k: &ComplexImage, mask: &SamplingMask) -> Result<ComplexImage> {
    k.require_domain(Domain::KSpace)?;
    k.shape().ensure_same(mask.shape())?;
    Ok(ComplexImage::from_parts(
        k.shape(),
        sample_raw(mask, k.data()),
        Domain::KSpace,
    ))
}

pub(crate) fn sample_raw(mask: &SamplingMask, data: &[Complex64]) -> Vec<Complex64> {
    data.iter()
        .zip(mask.indicator())
        .map(|(&v, &keep)| if keep { v } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// `F A α` on raw buffers.
pub(crate) fn code_to_kspace(spec: &WaveletSpec, shape: Shape, code: &[Complex64]) -> Vec<Complex64> {
    centered_2d(shape, &synthesize_raw(spec, shape, code), Direction::Forward)
}

/// `Aᵀ Fᴴ k` on raw buffers.
pub(crate) fn kspace_to_code(spec: &WaveletSpec, shape: Shape, k: &[Complex64]) -> Vec<Complex64> {
    analyze_raw(spec, shape, &centered_2d(shape, k, Direction::Inverse))
}

/// `P F A α`
pub fn forward_operator(
    alpha: &SparseCode,
    mask: &SamplingMask,
    spec: &WaveletSpec,
) -> Result<ComplexImage> {
    let shape = alpha.shape();
    shape.ensure_same(mask.shape())?;
    spec.validate(shape)?;
    let k = code_to_kspace(spec, shape, alpha.data());
    Ok(ComplexImage::from_parts(
        shape,
        sample_raw(mask, &k),
        Domain::KSpace,
    ))
}

/// `Aᵀ Fᴴ Pᵀ y`, the adjoint of [`forward_operator`].
pub fn adjoint_operator(
    y: &ComplexImage,
    mask: &SamplingMask,
    spec: &WaveletSpec,
) -> Result<SparseCode> {
    y.require_domain(Domain::KSpace)?;
    let shape = y.shape();
    shape.ensure_same(mask.shape())?;
    spec.validate(shape)?;
    let k = sample_raw(mask, y.data());
    Ok(SparseCode::from_parts(shape, kspace_to_code(spec, shape, &k)))
}

/// Inverse FFT of the zero-filled observation.
pub fn zero_filled(y: &ComplexImage, mask: &SamplingMask) -> Result<ComplexImage> {
    ifft_centered(&sample(y, mask)?)
}
