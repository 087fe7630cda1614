//! The composite objective `Φ(α) = f(α) + g(α)` with
//!
//! ```text
//! f(α) = ½‖P F A α − y‖² [+ (w/2)‖A α − s‖²]
//! g(α) = λ Σᵢ |αᵢ|^p
//! ```
//!
//! The optional anchor term is the quadratic coupling used by the
//! Rician-robust z-subproblem. With unitary `F` and orthonormal `A`,
//! `∇f` is Lipschitz with constant `1 + w`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transforms::{
    analyze_raw, centered_2d, code_to_kspace, kspace_to_code, sample_raw, Direction, WaveletSpec,
};
use crate::types::{ComplexImage, Domain, SamplingMask, Shape, SparseCode};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
struct Anchor {
    weight: f64,
    /// `Aᵀ s`
    code: Vec<Complex64>,
    /// `F s`
    kspace: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    y: ComplexImage,
    mask: SamplingMask,
    spec: WaveletSpec,
    lambda: f64,
    p: f64,
    anchor: Option<Anchor>,
}

impl Objective {
    /// `y` is projected onto the mask, so unsampled entries are exactly zero.
    pub fn new(
        y: &ComplexImage,
        mask: &SamplingMask,
        spec: WaveletSpec,
        lambda: f64,
        p: f64,
    ) -> Result<Self> {
        y.require_domain(Domain::KSpace)?;
        y.shape().ensure_same(mask.shape())?;
        spec.validate(y.shape())?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(alloc::format!("lambda must be >= 0, got {lambda}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(alloc::format!("p must lie in (0, 1], got {p}")));
        }
        let projected = ComplexImage::from_parts(y.shape(), sample_raw(mask, y.data()), Domain::KSpace);
        Ok(Self {
            y: projected,
            mask: mask.clone(),
            spec,
            lambda,
            p,
            anchor: None,
        })
    }

    /// Add `(weight/2)‖Aα − target‖²` to the smooth part.
    pub fn with_anchor(mut self, weight: f64, target: &ComplexImage) -> Result<Self> {
        target.require_domain(Domain::Image)?;
        target.shape().ensure_same(self.shape())?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Config(alloc::format!("anchor weight must be > 0, got {weight}")));
        }
        let shape = self.shape();
        self.anchor = Some(Anchor {
            weight,
            code: analyze_raw(&self.spec, shape, target.data()),
            kspace: centered_2d(shape, target.data(), Direction::Forward),
        });
        Ok(self)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(alloc::format!("lambda must be >= 0, got {lambda}")));
        }
        let mut next = self.clone();
        next.lambda = lambda;
        Ok(next)
    }

    pub fn shape(&self) -> Shape {
        self.y.shape()
    }

    pub fn observation(&self) -> &ComplexImage {
        &self.y
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Lipschitz constant of `∇f` under unitary transforms.
    pub fn lipschitz(&self) -> f64 {
        1.0 + self.anchor.as_ref().map_or(0.0, |a| a.weight)
    }

    /// `f(0)`, the magnitude scale of the problem.
    pub fn scale(&self) -> f64 {
        let data = 0.5 * crate::linalg::norm_sqr(self.y.data());
        data + self
            .anchor
            .as_ref()
            .map_or(0.0, |a| 0.5 * a.weight * crate::linalg::norm_sqr(&a.code))
    }

    fn check_shape(&self, alpha: &SparseCode) -> Result<()> {
        alpha.shape().ensure_same(self.shape())
    }

    /// Sampled k-space residual `P F A α − y`.
    fn residual(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        let k = code_to_kspace(&self.spec, self.shape(), alpha);
        k.iter()
            .zip(self.mask.indicator())
            .zip(self.y.data())
            .map(|((&kv, &m), &yv)| if m { kv - yv } else { Complex64::new(0.0, 0.0) })
            .collect()
    }

    fn anchor_value(&self, alpha: &[Complex64]) -> f64 {
        self.anchor.as_ref().map_or(0.0, |a| {
            0.5 * a.weight * crate::linalg::distance(alpha, &a.code).powi(2)
        })
    }

    pub fn eval_f(&self, alpha: &SparseCode) -> Result<f64> {
        self.check_shape(alpha)?;
        Ok(self.f_raw(alpha.data()))
    }

    fn f_raw(&self, alpha: &[Complex64]) -> f64 {
        0.5 * crate::linalg::norm_sqr(&self.residual(alpha)) + self.anchor_value(alpha)
    }

    /// `∇f(α) = Aᵀ Fᴴ Pᵀ (P F A α − y) [+ w (α − Aᵀ s)]`
    pub fn grad_f(&self, alpha: &SparseCode) -> Result<SparseCode> {
        self.check_shape(alpha)?;
        Ok(self.f_and_grad(alpha).1)
    }

    /// Value and gradient of the smooth part from a single residual.
    pub fn f_and_grad(&self, alpha: &SparseCode) -> (f64, SparseCode) {
        let r = self.residual(alpha.data());
        let mut grad = kspace_to_code(&self.spec, self.shape(), &r);
        let mut value = 0.5 * crate::linalg::norm_sqr(&r);
        if let Some(a) = &self.anchor {
            for ((g, &x), &c) in grad.iter_mut().zip(alpha.data()).zip(&a.code) {
                *g += (x - c) * a.weight;
            }
            value += self.anchor_value(alpha.data());
        }
        (value, SparseCode::from_parts(self.shape(), grad))
    }

    /// `λ Σ |αᵢ|^p` with the complex modulus; `g(0) = 0`.
    pub fn eval_g(&self, alpha: &SparseCode) -> f64 {
        lp_penalty(alpha.data(), self.lambda, self.p)
    }

    pub fn eval_phi(&self, alpha: &SparseCode) -> Result<f64> {
        Ok(self.eval_f(alpha)? + self.eval_g(alpha))
    }

    /// Exact minimizer of `f(u) + (ρ/2)‖u − α‖²`. In k-space the normal
    /// matrix is diagonal: `P + w + ρ` per entry.
    pub fn fidelity_step(&self, alpha: &SparseCode, rho: f64) -> Result<SparseCode> {
        self.check_shape(alpha)?;
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Config(alloc::format!("rho must be > 0, got {rho}")));
        }
        let shape = self.shape();
        let mut k = code_to_kspace(&self.spec, shape, alpha.data());
        let (w, anchor_k) = match &self.anchor {
            Some(a) => (a.weight, Some(&a.kspace)),
            None => (0.0, None),
        };
        for (i, kv) in k.iter_mut().enumerate() {
            let sampled = self.mask.indicator()[i];
            let mut rhs = *kv * rho;
            let mut diag = rho + w;
            if sampled {
                rhs += self.y.data()[i];
                diag += 1.0;
            }
            if let Some(ak) = anchor_k {
                rhs += ak[i] * w;
            }
            *kv = rhs / diag;
        }
        Ok(SparseCode::from_parts(shape, kspace_to_code(&self.spec, shape, &k)))
    }

    /// `Aᵀ Fᴴ Pᵀ y`, the zero-filled starting point.
    pub fn zero_filled_code(&self) -> SparseCode {
        SparseCode::from_parts(
            self.shape(),
            kspace_to_code(&self.spec, self.shape(), self.y.data()),
        )
    }

    /// `A α`
    pub fn synthesize(&self, alpha: &SparseCode) -> ComplexImage {
        ComplexImage::from_parts(
            self.shape(),
            crate::transforms::synthesize_raw(&self.spec, self.shape(), alpha.data()),
            Domain::Image,
        )
    }

    /// `Aᵀ x`
    pub fn analyze(&self, x: &ComplexImage) -> SparseCode {
        SparseCode::from_parts(
            self.shape(),
            analyze_raw(&self.spec, self.shape(), x.data()),
        )
    }
}

pub fn lp_penalty(data: &[Complex64], lambda: f64, p: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    lambda
        * data
            .iter()
            .map(|c| {
                let m = c.norm();
                if m == 0.0 {
                    0.0
                } else {
                    m.powf(p)
                }
            })
            .sum::<f64>()
}
