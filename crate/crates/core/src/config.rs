//! Scalar hyperparameters of the reconstruction loop.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::transforms::WaveletSpec;

#[allow(unused_imports)]
use num_traits::Float;

/// Regularization weight used when none is given, for intensities in [0, 1].
pub const DEFAULT_LAMBDA: f64 = 2e-2;
/// Much weaker weight used by [`SolverConfig::brain_preset`].
pub const BRAIN_PRESET_LAMBDA: f64 = 1e-5;
/// Step sizes default to `1 / (STEP_DIVISOR · L_f)`.
pub const STEP_DIVISOR: f64 = 1.1;

/// Which inequality the optimality check tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckRule {
    /// `‖v − α^k‖ ≤ ε^k ‖β − α^k‖`; the form the descent proof relies on.
    #[default]
    Proposition,
    /// `‖v − β‖ ≤ ε^k ‖α^k − β‖`; kept for ablations, no descent guarantee.
    ErrorBound,
}

impl fmt::Display for CheckRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckRule::Proposition => "proposition",
            CheckRule::ErrorBound => "error-bound",
        })
    }
}

impl FromStr for CheckRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposition" => Ok(CheckRule::Proposition),
            "error-bound" => Ok(CheckRule::ErrorBound),
            other => Err(Error::Config(alloc::format!("unknown check rule `{other}`"))),
        }
    }
}

/// Validated solver settings. Build through [`SolverConfig::builder`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    lambda: f64,
    p: f64,
    rho: f64,
    momentum_rho: f64,
    eta1: f64,
    eta2: f64,
    lipschitz: f64,
    epsilon0: f64,
    epsilon_decay: f64,
    tol: f64,
    max_iters: usize,
    wavelet: WaveletSpec,
    check_rule: CheckRule,
    enforce_descent: bool,
}

/// Optional overrides; anything left unset takes its derived default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverConfigBuilder {
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub rho: Option<f64>,
    pub momentum_rho: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub lipschitz: Option<f64>,
    pub epsilon0: Option<f64>,
    pub epsilon_decay: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub wavelet: Option<WaveletSpec>,
    pub check_rule: Option<CheckRule>,
    pub enforce_descent: Option<bool>,
}

macro_rules! setter {
    ($name:ident, $ty:ty) => {
        pub fn $name(mut self, value: $ty) -> Self {
            self.$name = Some(value);
            self
        }
    };
}

impl SolverConfigBuilder {
    setter!(lambda, f64);
    setter!(p, f64);
    setter!(rho, f64);
    setter!(momentum_rho, f64);
    setter!(eta1, f64);
    setter!(eta2, f64);
    setter!(lipschitz, f64);
    setter!(epsilon0, f64);
    setter!(epsilon_decay, f64);
    setter!(tol, f64);
    setter!(max_iters, usize);
    setter!(wavelet, WaveletSpec);
    setter!(check_rule, CheckRule);
    setter!(enforce_descent, bool);

    pub fn build(&self) -> Result<SolverConfig> {
        let lipschitz = self.lipschitz.unwrap_or(1.0);
        positive("lipschitz", lipschitz)?;
        let rho = self.rho.unwrap_or(5.0);
        positive("rho", rho)?;
        let momentum_rho = self.momentum_rho.unwrap_or(rho);
        positive("momentum_rho", momentum_rho)?;
        let eta2 = self.eta2.unwrap_or(1.0 / (STEP_DIVISOR * lipschitz));
        // η₁ = 1/ρ cancels the |ρ − 1/η₁| term of C^k, leaving room for ε^k.
        let eta1 = self.eta1.unwrap_or_else(|| (1.0 / momentum_rho).min(eta2));
        positive("eta1", eta1)?;
        positive("eta2", eta2)?;
        let slack = 1.0 / (2.0 * eta1) - lipschitz / 2.0;
        let epsilon0 = match self.epsilon0 {
            Some(e) => e,
            None => {
                if slack <= 0.0 {
                    return Err(Error::Config(alloc::format!(
                        "1/(2·eta1) − L/2 = {slack} must be positive"
                    )));
                }
                // leaves C⁰ = 0.1 · (1/(2η₁) − L_f/2)
                0.9 * slack / (lipschitz + (momentum_rho - 1.0 / eta1).abs())
            }
        };
        let cfg = SolverConfig {
            lambda: self.lambda.unwrap_or(DEFAULT_LAMBDA),
            p: self.p.unwrap_or(0.8),
            rho,
            momentum_rho,
            eta1,
            eta2,
            lipschitz,
            epsilon0,
            epsilon_decay: self.epsilon_decay.unwrap_or(1.0),
            tol: self.tol.unwrap_or(1e-4),
            max_iters: self.max_iters.unwrap_or(50),
            wavelet: self.wavelet.unwrap_or_default(),
            check_rule: self.check_rule.unwrap_or_default(),
            enforce_descent: self.enforce_descent.unwrap_or(true),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(alloc::format!("{name} must be positive and finite, got {v}")))
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfigBuilder::default()
            .build()
            .expect("default solver configuration is valid")
    }
}

impl SolverConfig {
    pub fn builder() -> SolverConfigBuilder {
        SolverConfigBuilder::default()
    }

    /// ρ = 5, λ = 1e-5, p = 0.8 and η₂ = 1/1.1, for brain data on its
    /// native intensity scale.
    pub fn brain_preset() -> SolverConfigBuilder {
        SolverConfigBuilder::default()
            .lambda(BRAIN_PRESET_LAMBDA)
            .p(0.8)
            .rho(5.0)
            .eta2(1.0 / STEP_DIVISOR)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(alloc::format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Config(alloc::format!("p must lie in (0, 1], got {}", self.p)));
        }
        positive("epsilon0", self.epsilon0)?;
        positive("tol", self.tol)?;
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(Error::Config(alloc::format!(
                "epsilon_decay must lie in (0, 1], got {}",
                self.epsilon_decay
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if self.eta2 >= 1.0 / self.lipschitz {
            return Err(Error::Config(alloc::format!(
                "eta2 = {} must be below 1/L_f = {}",
                self.eta2,
                1.0 / self.lipschitz
            )));
        }
        if self.wavelet.levels == 0 {
            return Err(Error::Config("wavelet levels must be positive".into()));
        }
        // ε^k is non-increasing, so C^k ≥ C⁰ for every k.
        let c0 = self.c_k(0);
        if c0 <= 0.0 {
            return Err(Error::Config(alloc::format!(
                "descent constant C^0 = {c0} must be positive; lower epsilon0 or eta1"
            )));
        }
        Ok(())
    }

    /// Same settings for an objective with a different Lipschitz constant:
    /// step sizes scale by `L_old / L_new`, and ε⁰ shrinks if needed to keep C⁰ > 0.
    pub fn with_lipschitz(&self, lipschitz: f64) -> Result<Self> {
        positive("lipschitz", lipschitz)?;
        let ratio = self.lipschitz / lipschitz;
        let mut next = self.clone();
        next.lipschitz = lipschitz;
        next.eta1 = self.eta1 * ratio;
        next.eta2 = self.eta2 * ratio;
        let slack = 1.0 / (2.0 * next.eta1) - lipschitz / 2.0;
        let rule = 0.9 * slack / (lipschitz + (next.momentum_rho - 1.0 / next.eta1).abs());
        next.epsilon0 = self.epsilon0.min(rule);
        next.validate()?;
        Ok(next)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut next = self.clone();
        next.lambda = lambda;
        next.validate()?;
        Ok(next)
    }

    pub fn with_max_iters(&self, max_iters: usize) -> Result<Self> {
        let mut next = self.clone();
        next.max_iters = max_iters;
        next.validate()?;
        Ok(next)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn momentum_rho(&self) -> f64 {
        self.momentum_rho
    }
    pub fn eta1(&self) -> f64 {
        self.eta1
    }
    pub fn eta2(&self) -> f64 {
        self.eta2
    }
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }
    pub fn epsilon_decay(&self) -> f64 {
        self.epsilon_decay
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }
    pub fn max_iters(&self) -> usize {
        self.max_iters
    }
    pub fn wavelet(&self) -> WaveletSpec {
        self.wavelet
    }
    pub fn check_rule(&self) -> CheckRule {
        self.check_rule
    }
    pub fn enforce_descent(&self) -> bool {
        self.enforce_descent
    }

    /// `ε^k = ε⁰ · decay^k`
    pub fn epsilon(&self, k: usize) -> f64 {
        self.epsilon0 * self.epsilon_decay.powi(k.min(i32::MAX as usize) as i32)
    }

    /// `C^k = 1/(2η₁) − L_f/2 − (L_f + |ρ − 1/η₁|)·ε^k`
    pub fn c_k(&self, k: usize) -> f64 {
        self.descent_constant(self.epsilon(k))
    }

    pub fn descent_constant(&self, eps: f64) -> f64 {
        1.0 / (2.0 * self.eta1)
            - self.lipschitz / 2.0
            - (self.lipschitz + (self.momentum_rho - 1.0 / self.eta1).abs()) * eps
    }

    /// Coefficient `1/(2η₂) − L_f/2` of the prior-step descent bound.
    pub fn prior_descent_constant(&self) -> f64 {
        1.0 / (2.0 * self.eta2) - self.lipschitz / 2.0
    }
}
