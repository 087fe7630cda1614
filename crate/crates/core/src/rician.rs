//! Rician noise: simulation, bias correction, and the alternating
//! reconstruction that separates the noisy magnitude `z` from the clean
//! image `x`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SolverConfig;
use crate::denoise::{DenoiseContext, Denoiser, Identity};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::pipeline::{denoise, prox_or_identity};
use crate::solver::{solve_objective, SolveResult, Variant};
use crate::types::{ComplexImage, Domain, RealImage, SamplingMask, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    sigma: f64,
    seed: u64,
}

impl RicianParams {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(alloc::format!("rician sigma must be > 0, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `x_n = √((x_c + n₁)² + n₂²)` with `n₁, n₂ ~ N(0, σ²)` drawn per pixel.
pub fn add_rician(x_c: &RealImage, params: RicianParams) -> Result<RealImage> {
    if let Some((index, &value)) = x_c.data().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeIntensity { index, value });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let data = x_c
        .data()
        .iter()
        .map(|&x| {
            let n1: f64 = StandardNormal.sample(&mut rng);
            let n2: f64 = StandardNormal.sample(&mut rng);
            let re = x + params.sigma * n1;
            let im = params.sigma * n2;
            (re * re + im * im).sqrt()
        })
        .collect();
    RealImage::new(x_c.shape(), data)
}

/// Two-stage classical Rician remover. Stage one estimates the squared
/// clean signal as `mean_w(x_n²) − 2σ²`, clamped at zero, where `mean_w`
/// is a periodic `w × w` box average (`w = 1` is pointwise). Stage two takes
/// the square root and runs an ordinary image denoiser.
pub struct RicianRemover {
    sigma: f64,
    window: usize,
    inner: Box<dyn Denoiser>,
}

impl core::fmt::Debug for RicianRemover {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RicianRemover")
            .field("sigma", &self.sigma)
            .field("window", &self.window)
            .field("inner", &self.inner.name())
            .finish()
    }
}

impl RicianRemover {
    pub fn new(sigma: f64, window: usize, inner: Box<dyn Denoiser>) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(alloc::format!("sigma must be >= 0, got {sigma}")));
        }
        if window == 0 || window.is_multiple_of(2) {
            return Err(Error::Config(alloc::format!("window must be odd, got {window}")));
        }
        Ok(Self { sigma, window, inner })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn stage_one(&self, mag: &[f64], shape: Shape) -> Vec<f64> {
        let squares: Vec<f64> = mag.iter().map(|m| m * m).collect();
        let mean = box_mean(&squares, shape, self.window);
        let bias = 2.0 * self.sigma * self.sigma;
        mean.iter().map(|s| (s - bias).max(0.0).sqrt()).collect()
    }

    /// Bias-corrected magnitude image.
    pub fn correct(&self, x_n: &RealImage) -> Result<RealImage> {
        let img = x_n.to_complex();
        let out = self.apply(&img, &DenoiseContext::default())?;
        RealImage::new(x_n.shape(), out.data().iter().map(|c| c.re).collect())
    }
}

impl Denoiser for RicianRemover {
    fn name(&self) -> &str {
        "rician"
    }

    /// Works on the magnitude; the result is real and nonnegative.
    fn apply(&self, img: &ComplexImage, ctx: &DenoiseContext) -> Result<ComplexImage> {
        let shape = img.shape();
        let mag: Vec<f64> = img.data().iter().map(|c| c.norm()).collect();
        let corrected = self.stage_one(&mag, shape);
        let stage = ComplexImage::new(
            shape,
            corrected.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            Domain::Image,
        )?;
        let out = denoise(&stage, self.inner.as_ref(), ctx)?;
        ComplexImage::new(
            shape,
            out.data().iter().map(|c| Complex64::new(c.re.max(0.0), 0.0)).collect(),
            Domain::Image,
        )
    }
}

/// Pointwise correction `√max(x_n² − 2σ², 0)` with no further denoising.
pub fn rician_bias_correct(x_n: &RealImage, sigma: f64) -> Result<RealImage> {
    RicianRemover::new(sigma, 1, Box::new(Identity))?.correct(x_n)
}

fn box_mean(data: &[f64], shape: Shape, window: usize) -> Vec<f64> {
    if window == 1 {
        return data.to_vec();
    }
    let Shape { height, width } = shape;
    let r = window / 2;
    let mut rows = alloc::vec![0.0; data.len()];
    for i in 0..height {
        for j in 0..width {
            rows[i * width + j] = (0..window)
                .map(|t| data[i * width + (j + width * window - r + t) % width])
                .sum::<f64>();
        }
    }
    let mut out = alloc::vec![0.0; data.len()];
    let area = (window * window) as f64;
    for i in 0..height {
        for j in 0..width {
            out[i * width + j] = (0..window)
                .map(|t| rows[((i + height * window - r + t) % height) * width + j])
                .sum::<f64>()
                / area;
        }
    }
    out
}

/// Settings for [`solve_rician`]. `lambda1` and `lambda2` are given for
/// intensities on a `[0, 255]` scale and rescaled internally to the scale
/// set by `intensity_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RicianSolverConfig {
    pub rho1: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub inner: SolverConfig,
    pub outer_iters: usize,
    /// Noise level of each quadrature component, in image units.
    pub sigma: f64,
    /// Intensity that corresponds to 255 on the 8-bit scale.
    pub intensity_max: f64,
}

impl Default for RicianSolverConfig {
    fn default() -> Self {
        Self {
            rho1: 0.01,
            lambda1: 1.0,
            lambda2: 1.0,
            inner: SolverConfig::default(),
            outer_iters: 3,
            sigma: 20.0 / 255.0,
            intensity_max: 1.0,
        }
    }
}

impl RicianSolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(alloc::format!("{name} must be positive, got {v}")))
            }
        };
        pos("rho1", self.rho1)?;
        pos("intensity_max", self.intensity_max)?;
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(alloc::format!("sigma must be >= 0, got {}", self.sigma)));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(alloc::format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.outer_iters == 0 {
            return Err(Error::Config("outer_iters must be positive".into()));
        }
        Ok(())
    }

    /// `λ` on the 8-bit scale mapped to the working scale: the quadratic
    /// term scales with `s²` and the penalty with `s^p`.
    pub fn effective_lambda(&self, lambda: f64) -> f64 {
        lambda * (self.intensity_max / 255.0).powf(2.0 - self.inner.p())
    }
}

/// Diagnostics for one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub outer: usize,
    /// `‖√(x² + 2σ²) − z‖`: distance between the magnitude the current
    /// image predicts under Rician noise and the z-step output.
    pub mismatch: f64,
    pub z_iterations: usize,
    pub z_converged: bool,
    pub z_final_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicianSolveResult {
    /// Final `x` and its code; `trace` is the last z-step's trace.
    pub solution: SolveResult,
    pub z: RealImage,
    pub outer: Vec<OuterRecord>,
}

/// Alternate a z-step (the full loop on the data term plus a coupling
/// `(ρ₁/2)‖z − |x^k|‖²`, penalty `λ₁`) with an x-step (Rician remover on
/// `z`, then one ℓp prox with `λ₂`). `denoiser` is the z-step's `𝒩`.
pub fn solve_rician(
    y: &ComplexImage,
    mask: &SamplingMask,
    cfg: &RicianSolverConfig,
    remover: &dyn Denoiser,
    denoiser: &dyn Denoiser,
) -> Result<RicianSolveResult> {
    cfg.validate()?;
    let shape = y.shape();
    let spec = cfg.inner.wavelet().clamped_to(shape);
    let lambda1 = cfg.effective_lambda(cfg.lambda1);
    let lambda2 = cfg.effective_lambda(cfg.lambda2);
    let base = Objective::new(y, mask, spec, lambda1, cfg.inner.p())?;
    let zcfg = cfg
        .inner
        .with_lipschitz(1.0 + cfg.rho1)?
        .with_lambda(lambda1)?;

    let mut alpha_z = base.zero_filled_code();
    let mut x = base.synthesize(&alpha_z);
    let mut outer = Vec::with_capacity(cfg.outer_iters);
    let mut last = None;
    let mut z_img = None;

    for t in 0..cfg.outer_iters {
        let s = magnitude_image(&x);
        let obj = base.clone().with_anchor(cfg.rho1, &s)?;
        let res = solve_objective(&obj, &zcfg, denoiser, Variant::Full, &alpha_z)?;
        alpha_z = res.alpha_star.clone();
        let z = magnitude_image(&res.x_star);

        let ctx = DenoiseContext {
            iteration: t,
            max_iters: cfg.outer_iters,
        };
        let r = denoise(&z, remover, &ctx)?;
        let alpha = prox_or_identity(base.analyze(&r), cfg.inner.eta2() * lambda2, cfg.inner.p())?;
        x = base.synthesize(&alpha);

        let two_s2 = 2.0 * cfg.sigma * cfg.sigma;
        let mismatch = x
            .data()
            .iter()
            .zip(z.data())
            .map(|(xv, zv)| ((xv.norm_sqr() + two_s2).sqrt() - zv.re).powi(2))
            .sum::<f64>()
            .sqrt();
        outer.push(OuterRecord {
            outer: t + 1,
            mismatch,
            z_iterations: res.iterations_used,
            z_converged: res.converged,
            z_final_phi: res.trace.final_phi(),
        });
        z_img = Some(z);
        last = Some(SolveResult {
            alpha_star: alpha,
            x_star: x.clone(),
            trace: res.trace,
            iterations_used: res.iterations_used,
            converged: res.converged,
        });
    }

    let z = z_img.expect("outer_iters > 0");
    Ok(RicianSolveResult {
        solution: last.expect("outer_iters > 0"),
        z: RealImage::new(shape, z.data().iter().map(|c| c.re).collect())?,
        outer,
    })
}

fn magnitude_image(x: &ComplexImage) -> ComplexImage {
    ComplexImage::new(
        x.shape(),
        x.data().iter().map(|c| Complex64::new(c.norm(), 0.0)).collect(),
        Domain::Image,
    )
    .expect("magnitudes of finite values are finite")
}
