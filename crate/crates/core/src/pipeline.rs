//! The four stage operators of one outer iteration: fidelity `ℱ`,
//! denoiser `𝒩`, optimality check `𝒞` and prior `𝒫`.

use crate::config::{CheckRule, SolverConfig};
use crate::denoise::{check_contract, DenoiseContext, Denoiser};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::proximal::{prox_lp, ProxParams};
use crate::types::{ComplexImage, Domain, SparseCode};

/// Result of the optimality check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    /// `w^{k+1}`: `beta` if accepted, else `α^k`.
    pub chosen: SparseCode,
    pub accepted: bool,
    pub beta: SparseCode,
    pub lhs: f64,
    pub rhs: f64,
    pub c_k: f64,
}

/// `α^{k+1}` together with the objective values the descent test used.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorOutcome {
    pub alpha: SparseCode,
    pub phi_w: f64,
    pub phi_alpha: f64,
    pub step_norm: f64,
}

/// Tolerance for descent inequalities: relative to the value compared
/// against, with a floor tied to the problem scale so exact zeros pass.
pub fn descent_slack(phi_ref: f64, obj: &Objective) -> f64 {
    1e-9 * phi_ref.abs() + 1e-14 * obj.scale()
}

/// `u^{k+1} = argmin_u f(u) + (ρ/2)‖u − α^k‖²`, solved in closed form.
pub fn fidelity_step(alpha_k: &SparseCode, obj: &Objective, rho: f64) -> Result<SparseCode> {
    obj.fidelity_step(alpha_k, rho)
}

/// Run a denoiser and enforce its contract.
pub fn denoise(u: &ComplexImage, denoiser: &dyn Denoiser, ctx: &DenoiseContext) -> Result<ComplexImage> {
    u.require_domain(Domain::Image)?;
    let out = denoiser.apply(u, ctx).map_err(|e| match e {
        Error::Denoiser { .. } => e,
        other => Error::Denoiser {
            name: denoiser.name().into(),
            reason: alloc::format!("{other}"),
        },
    })?;
    check_contract(denoiser.name(), u, &out)?;
    Ok(out)
}

/// `prox_{τ‖·‖_p}`; identity when `τ = 0`.
pub(crate) fn prox_or_identity(x: SparseCode, tau: f64, p: f64) -> Result<SparseCode> {
    if tau == 0.0 {
        Ok(x)
    } else {
        prox_lp(&x, ProxParams::new(tau, p)?)
    }
}

/// `β = prox_{η₁λ}(v − η₁(∇f(v) + ρ(v − α^k)))`
pub fn momentum_prox(
    v: &SparseCode,
    alpha_k: &SparseCode,
    cfg: &SolverConfig,
    obj: &Objective,
) -> Result<SparseCode> {
    v.shape().ensure_same(alpha_k.shape())?;
    let grad = obj.grad_f(v)?;
    let eta = cfg.eta1();
    let pull = grad.add_scaled(cfg.momentum_rho(), &v.sub(alpha_k));
    prox_or_identity(v.add_scaled(-eta, &pull), eta * obj.lambda(), obj.p())
}

/// Accept `β` only if the denoiser output stayed close to `α^k` relative
/// to the candidate step.
pub fn check(
    v: &SparseCode,
    beta: &SparseCode,
    alpha_k: &SparseCode,
    eps_k: f64,
    cfg: &SolverConfig,
) -> Result<CheckOutcome> {
    v.shape().ensure_same(alpha_k.shape())?;
    beta.shape().ensure_same(alpha_k.shape())?;
    if !(eps_k.is_finite() && eps_k > 0.0) {
        return Err(Error::Config(alloc::format!("epsilon must be > 0, got {eps_k}")));
    }
    let c_k = cfg.descent_constant(eps_k);
    if c_k <= 0.0 {
        return Err(Error::Config(alloc::format!(
            "descent constant {c_k} is not positive for epsilon {eps_k}"
        )));
    }
    let (lhs, rhs) = match cfg.check_rule() {
        CheckRule::Proposition => (v.distance(alpha_k), eps_k * beta.distance(alpha_k)),
        CheckRule::ErrorBound => (v.distance(beta), eps_k * alpha_k.distance(beta)),
    };
    let accepted = lhs <= rhs;
    Ok(CheckOutcome {
        chosen: if accepted { beta.clone() } else { alpha_k.clone() },
        accepted,
        beta: beta.clone(),
        lhs,
        rhs,
        c_k,
    })
}

/// `α^{k+1} = prox_{η₂λ}(w − η₂∇f(w))`
pub fn prior_step(w: &SparseCode, cfg: &SolverConfig, obj: &Objective) -> Result<SparseCode> {
    Ok(prior_step_traced(w, cfg, obj, 0)?.alpha)
}

/// [`prior_step`] that also reports `Φ(w)` and `Φ(α^{k+1})` and, when the
/// configuration asks for it, fails if the sufficient-decrease bound
/// `Φ(α^{k+1}) ≤ Φ(w) − (1/(2η₂) − L_f/2)‖α^{k+1} − w‖²` is violated.
pub fn prior_step_traced(
    w: &SparseCode,
    cfg: &SolverConfig,
    obj: &Objective,
    iteration: usize,
) -> Result<PriorOutcome> {
    w.shape().ensure_same(obj.shape())?;
    let eta = cfg.eta2();
    if eta * obj.lipschitz() >= 1.0 {
        return Err(Error::Config(alloc::format!(
            "eta2 = {eta} must be below 1/L_f = {}",
            1.0 / obj.lipschitz()
        )));
    }
    let (f_w, grad) = obj.f_and_grad(w);
    let phi_w = f_w + obj.eval_g(w);
    let alpha = prox_or_identity(w.add_scaled(-eta, &grad), eta * obj.lambda(), obj.p())?;
    let phi_alpha = obj.eval_phi(&alpha)?;
    let step_norm = alpha.distance(w);
    let bound = phi_w - (1.0 / (2.0 * eta) - obj.lipschitz() / 2.0) * step_norm * step_norm;
    if cfg.enforce_descent() && phi_alpha > bound + descent_slack(phi_w, obj) {
        return Err(Error::DescentViolation {
            iteration,
            stage: "prior",
            lhs: phi_alpha,
            rhs: bound,
        });
    }
    Ok(PriorOutcome {
        alpha,
        phi_w,
        phi_alpha,
        step_norm,
    })
}
