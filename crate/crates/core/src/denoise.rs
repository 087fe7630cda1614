//! Image-domain denoisers plugged into the `𝒩` stage.
//!
//! Trained networks are out of scope; the built-ins are classical filters
//! plus an adversarial one that returns pure noise, used to exercise the
//! optimality check.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::transforms::{analyze_raw, synthesize_raw, WaveletSpec};
use crate::types::{ComplexImage, Domain, Shape};

/// Where in the outer loop a denoiser is being called.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DenoiseContext {
    pub iteration: usize,
    pub max_iters: usize,
}

/// An image-to-image map. Implementations must return a finite image of
/// the same shape; [`crate::pipeline::denoise`] enforces this.
pub trait Denoiser: Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage>;
}

impl<D: Denoiser + ?Sized> Denoiser for Box<D> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage> {
        (**self).apply(img, ctx)
    }
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage> {
        (**self).apply(img, ctx)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Denoiser for Identity {
    fn name(&self) -> &str {
        "identity"
    }
    fn apply(&self, img: &ComplexImage, _: &DenoiseContext) -> Result<ComplexImage> {
        Ok(img.clone())
    }
}

/// Periodic separable Gaussian blur; the kernel is truncated at `⌈3σ⌉` and
/// renormalized to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBlur {
    sigma: f64,
    kernel: Vec<f64>,
}

impl GaussianBlur {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(alloc::format!("blur sigma must be >= 0, got {sigma}")));
        }
        let radius = (3.0 * sigma).ceil() as usize;
        let mut kernel: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                if sigma == 0.0 {
                    1.0
                } else {
                    (-d * d / (2.0 * sigma * sigma)).exp()
                }
            })
            .collect();
        let sum: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);
        Ok(Self { sigma, kernel })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The normalized 1-D kernel, centered at index `len / 2`.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    fn blur_1d(&self, line: &[Complex64], out: &mut [Complex64]) {
        let n = line.len() as isize;
        let r = (self.kernel.len() / 2) as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &k) in self.kernel.iter().enumerate() {
                let j = (i as isize + t as isize - r).rem_euclid(n) as usize;
                acc += line[j] * k;
            }
            *o = acc;
        }
    }
}

impl Denoiser for GaussianBlur {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn apply(&self, img: &ComplexImage, _: &DenoiseContext) -> Result<ComplexImage> {
        let Shape { height, width } = img.shape();
        let mut data = img.data().to_vec();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); width.max(height)];
        for r in 0..height {
            let row = &mut data[r * width..(r + 1) * width];
            self.blur_1d(row, &mut out[..width]);
            row.copy_from_slice(&out[..width]);
        }
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); height];
        for c in 0..width {
            for r in 0..height {
                col[r] = data[r * width + c];
            }
            self.blur_1d(&col, &mut out[..height]);
            for r in 0..height {
                data[r * width + c] = out[r];
            }
        }
        ComplexImage::new(img.shape(), data, img.domain())
    }
}

/// Threshold that falls linearly from `start` at the first iteration to
/// `end` at the last, in image intensity units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    pub start: f64,
    pub end: f64,
}

impl NoiseSchedule {
    pub fn at(&self, ctx: &DenoiseContext) -> f64 {
        if ctx.max_iters <= 1 {
            return self.start;
        }
        let t = (ctx.iteration.min(ctx.max_iters - 1)) as f64 / (ctx.max_iters - 1) as f64;
        self.start + (self.end - self.start) * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    Scheduled(NoiseSchedule),
}

/// Complex soft-thresholding of the wavelet detail bands; the coarse
/// approximation band is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletShrink {
    spec: WaveletSpec,
    threshold: Threshold,
}

impl WaveletShrink {
    pub fn new(spec: WaveletSpec, threshold: Threshold) -> Result<Self> {
        let check = |t: f64| {
            if t.is_finite() && t >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(alloc::format!("wavelet threshold must be >= 0, got {t}")))
            }
        };
        match threshold {
            Threshold::Fixed(t) => check(t)?,
            Threshold::Scheduled(s) => {
                check(s.start)?;
                check(s.end)?;
            }
        }
        Ok(Self { spec, threshold })
    }

    pub fn threshold_at(&self, ctx: &DenoiseContext) -> f64 {
        match self.threshold {
            Threshold::Fixed(t) => t,
            Threshold::Scheduled(s) => s.at(ctx),
        }
    }
}

impl Denoiser for WaveletShrink {
    fn name(&self) -> &str {
        "wavelet"
    }

    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage> {
        let shape = img.shape();
        let spec = self.spec.clamped_to(shape);
        spec.validate(shape)?;
        let t = self.threshold_at(ctx);
        if t == 0.0 {
            return Ok(img.clone());
        }
        let mut code = analyze_raw(&spec, shape, img.data());
        let coarse = shape.width >> spec.levels;
        for (i, c) in code.iter_mut().enumerate() {
            let (r, col) = (i / shape.width, i % shape.width);
            if r < coarse && col < coarse {
                continue;
            }
            let m = c.norm();
            *c = if m <= t {
                Complex64::new(0.0, 0.0)
            } else {
                *c * ((m - t) / m)
            };
        }
        ComplexImage::new(shape, synthesize_raw(&spec, shape, &code), img.domain())
    }
}

/// 3×3 median of the magnitude with periodic boundary; each pixel keeps
/// its own phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct MedianMagnitude;

impl Denoiser for MedianMagnitude {
    fn name(&self) -> &str {
        "median"
    }

    fn apply(&self, img: &ComplexImage, _: &DenoiseContext) -> Result<ComplexImage> {
        let Shape { height, width } = img.shape();
        let mag: Vec<f64> = img.data().iter().map(|c| c.norm()).collect();
        let mut data = Vec::with_capacity(mag.len());
        let mut window = [0.0f64; 9];
        for r in 0..height {
            for c in 0..width {
                let mut n = 0;
                for dr in [height - 1, 0, 1] {
                    for dc in [width - 1, 0, 1] {
                        window[n] = mag[((r + dr) % height) * width + (c + dc) % width];
                        n += 1;
                    }
                }
                window.sort_unstable_by(f64::total_cmp);
                let m = window[4];
                let v = img.data()[r * width + c];
                let vm = v.norm();
                data.push(if vm == 0.0 { Complex64::new(m, 0.0) } else { v * (m / vm) });
            }
        }
        ComplexImage::new(img.shape(), data, img.domain())
    }
}

/// Adversarial denoiser: ignores its input structure and returns complex
/// Gaussian noise with the input's RMS, seeded by `(seed, iteration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomOutput {
    pub seed: u64,
}

impl Denoiser for RandomOutput {
    fn name(&self) -> &str {
        "random"
    }

    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ctx.iteration as u64);
        let n = img.shape().len();
        let rms = img.norm() / (n as f64).sqrt();
        let scale = if rms > 0.0 { rms } else { 1.0 } * core::f64::consts::FRAC_1_SQRT_2;
        let data = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * scale
            })
            .collect();
        ComplexImage::new(img.shape(), data, img.domain())
    }
}

/// Parameters for building a denoiser by name.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserParams {
    pub gaussian_sigma: f64,
    pub wavelet: WaveletSpec,
    pub threshold: Threshold,
    pub seed: u64,
}

impl Default for DenoiserParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 0.8,
            wavelet: WaveletSpec::default(),
            threshold: Threshold::Fixed(0.02),
            seed: 0,
        }
    }
}

pub const BUILTIN_DENOISERS: [&str; 5] = ["identity", "gaussian", "wavelet", "median", "random"];

pub fn denoiser_by_name(name: &str, params: &DenoiserParams) -> Result<Box<dyn Denoiser>> {
    Ok(match name {
        "identity" => Box::new(Identity),
        "gaussian" => Box::new(GaussianBlur::new(params.gaussian_sigma)?),
        "wavelet" => Box::new(WaveletShrink::new(params.wavelet, params.threshold)?),
        "median" => Box::new(MedianMagnitude),
        "random" => Box::new(RandomOutput { seed: params.seed }),
        other => return Err(Error::UnknownDenoiser(String::from(other))),
    })
}

/// Check the denoiser contract on an output.
pub(crate) fn check_contract(name: &str, input: &ComplexImage, out: &ComplexImage) -> Result<()> {
    let fail = |reason: String| Error::Denoiser {
        name: String::from(name),
        reason,
    };
    if out.shape() != input.shape() {
        return Err(fail(alloc::format!(
            "output shape {} differs from input shape {}",
            out.shape(),
            input.shape()
        )));
    }
    if out.domain() != Domain::Image {
        return Err(fail(alloc::format!("output in {} domain", out.domain())));
    }
    if let Some(i) = crate::linalg::first_non_finite(out.data()) {
        return Err(fail(alloc::format!("non-finite output at index {i}")));
    }
    Ok(())
}
