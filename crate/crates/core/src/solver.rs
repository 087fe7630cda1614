//! The outer reconstruction loop `u = ℱ(α^k)`, `v = 𝒩(u)`, `w = 𝒞(v, α^k)`,
//! `α^{k+1} = 𝒫(w)`, its ablations, and the per-iteration trace.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use crate::config::SolverConfig;
use crate::denoise::{DenoiseContext, Denoiser};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::pipeline::{check, denoise, descent_slack, momentum_prox, prior_step_traced};
use crate::types::{ComplexImage, SamplingMask, SparseCode};

/// Stage compositions compared in the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Prior step only: plain nonconvex proximal gradient.
    P,
    /// Fidelity then denoiser, `α^{k+1} = Aᵀv`.
    FN,
    /// Fidelity, denoiser, prior; no check.
    FNP,
    #[default]
    Full,
}

/// Which stages a variant runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub fidelity: bool,
    pub denoise: bool,
    pub check: bool,
    pub prior: bool,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::P, Variant::FN, Variant::FNP, Variant::Full];

    pub fn stages(self) -> Stages {
        let (fidelity, denoise, check, prior) = match self {
            Variant::P => (false, false, false, true),
            Variant::FN => (true, true, false, false),
            Variant::FNP => (true, true, false, true),
            Variant::Full => (true, true, true, true),
        };
        Stages { fidelity, denoise, check, prior }
    }

    /// Variants whose objective is provably non-increasing.
    pub fn guarantees_descent(self) -> bool {
        matches!(self, Variant::P | Variant::Full)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::P => "P",
            Variant::FN => "FN",
            Variant::FNP => "FNP",
            Variant::Full => "full",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ablation_variant(s)
    }
}

pub fn ablation_variant(name: &str) -> Result<Variant> {
    match name {
        "P" | "p" => Ok(Variant::P),
        "FN" | "fn" => Ok(Variant::FN),
        "FNP" | "fnp" => Ok(Variant::FNP),
        "full" | "Full" | "FULL" => Ok(Variant::Full),
        other => Err(Error::UnknownVariant(String::from(other))),
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub k: usize,
    /// `Φ(α^k)` before the iteration.
    pub phi_prev: f64,
    /// `Φ(w^{k+1})`
    pub phi_w: f64,
    /// `Φ(α^{k+1})`
    pub phi: f64,
    /// Check decision; `None` for variants without a check.
    pub accepted: Option<bool>,
    /// `C^k`; `None` without a check.
    pub c_k: Option<f64>,
    /// `Φ(β^{k+1})` when the check accepted.
    pub phi_beta: Option<f64>,
    /// `‖β^{k+1} − α^k‖` when a check ran.
    pub beta_dist: Option<f64>,
    /// `‖α^{k+1} − w^{k+1}‖`
    pub step_norm: f64,
    /// `‖x^{k+1} − x^k‖ / ‖x^k‖`, or `‖x^{k+1}‖` when `x^k = 0`.
    pub rel_change: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterateTrace {
    pub initial_phi: f64,
    pub records: Vec<IterationRecord>,
}

impl IterateTrace {
    /// `Φ(α⁰), Φ(α¹), …`
    pub fn phi_values(&self) -> Vec<f64> {
        core::iter::once(self.initial_phi)
            .chain(self.records.iter().map(|r| r.phi))
            .collect()
    }

    pub fn final_phi(&self) -> f64 {
        self.records.last().map_or(self.initial_phi, |r| r.phi)
    }

    /// `Σ ‖α^{k+1} − w^{k+1}‖²`
    pub fn step_square_sum(&self) -> f64 {
        self.records.iter().map(|r| r.step_norm * r.step_norm).sum()
    }

    pub fn acceptance_count(&self) -> usize {
        self.records.iter().filter(|r| r.accepted == Some(true)).count()
    }

    /// CSV with header `k,phi,phi_w,accepted,step_norm,c_k,rel_change`.
    /// Row `k = 0` holds the initial objective; empty fields mean the
    /// stage did not run.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,phi,phi_w,accepted,step_norm,c_k,rel_change\n");
        let _ = writeln!(out, "0,{},,,,,", num(self.initial_phi));
        for r in &self.records {
            let accepted = match r.accepted {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            let c_k = r.c_k.map(num).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.k,
                num(r.phi),
                num(r.phi_w),
                accepted,
                num(r.step_norm),
                c_k,
                num(r.rel_change)
            );
        }
        out
    }
}

/// 17 significant digits, locale-free.
fn num(v: f64) -> String {
    alloc::format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub alpha_star: SparseCode,
    /// `A α*`
    pub x_star: ComplexImage,
    pub trace: IterateTrace,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Reconstruct from undersampled k-space, starting at the zero-filled image.
pub fn solve(
    y: &ComplexImage,
    mask: &SamplingMask,
    cfg: &SolverConfig,
    denoiser: &dyn Denoiser,
    variant: Variant,
) -> Result<SolveResult> {
    let spec = cfg.wavelet().clamped_to(y.shape());
    let obj = Objective::new(y, mask, spec, cfg.lambda(), cfg.p())?;
    let init = obj.zero_filled_code();
    solve_objective(&obj, cfg, denoiser, variant, &init)
}

/// Run the loop on an explicit objective from a given starting code.
/// `cfg`'s step sizes must suit `obj.lipschitz()`.
pub fn solve_objective(
    obj: &Objective,
    cfg: &SolverConfig,
    denoiser: &dyn Denoiser,
    variant: Variant,
    init: &SparseCode,
) -> Result<SolveResult> {
    init.shape().ensure_same(obj.shape())?;
    if (cfg.lipschitz() - obj.lipschitz()).abs() > 1e-12 * obj.lipschitz() {
        return Err(Error::Config(alloc::format!(
            "solver configured for L_f = {} but objective has L_f = {}",
            cfg.lipschitz(),
            obj.lipschitz()
        )));
    }
    let stages = variant.stages();
    let enforce = cfg.enforce_descent() && variant.guarantees_descent();
    if stages.check && cfg.c_k(0) <= 0.0 {
        return Err(Error::Config(alloc::format!("C^0 = {} must be positive", cfg.c_k(0))));
    }

    let mut alpha = init.clone();
    let mut phi_prev = obj.eval_phi(&alpha)?;
    let mut trace = IterateTrace {
        initial_phi: phi_prev,
        records: Vec::new(),
    };
    let mut converged = false;

    for k in 0..cfg.max_iters() {
        let ctx = DenoiseContext {
            iteration: k,
            max_iters: cfg.max_iters(),
        };
        let u = if stages.fidelity {
            obj.fidelity_step(&alpha, cfg.rho())?
        } else {
            alpha.clone()
        };
        let v = if stages.denoise {
            obj.analyze(&denoise(&obj.synthesize(&u), denoiser, &ctx)?)
        } else {
            u
        };

        let (mut accepted, mut c_k, mut phi_beta, mut beta_dist) = (None, None, None, None);
        let w = if stages.check {
            let beta = momentum_prox(&v, &alpha, cfg, obj)?;
            let outcome = check(&v, &beta, &alpha, cfg.epsilon(k), cfg)?;
            let dist = beta.distance(&alpha);
            beta_dist = Some(dist);
            c_k = Some(outcome.c_k);
            accepted = Some(outcome.accepted);
            if outcome.accepted {
                let pb = obj.eval_phi(&beta)?;
                phi_beta = Some(pb);
                let bound = phi_prev - outcome.c_k * dist * dist;
                if enforce && pb > bound + descent_slack(phi_prev, obj) {
                    return Err(Error::DescentViolation {
                        iteration: k + 1,
                        stage: "check",
                        lhs: pb,
                        rhs: bound,
                    });
                }
            }
            outcome.chosen
        } else {
            v
        };

        let (next, phi_w, phi, step_norm) = if stages.prior {
            let out = prior_step_traced(&w, cfg, obj, k + 1)?;
            (out.alpha, out.phi_w, out.phi_alpha, out.step_norm)
        } else {
            let phi_w = obj.eval_phi(&w)?;
            (w, phi_w, phi_w, 0.0)
        };
        if enforce && phi_w > phi_prev + descent_slack(phi_prev, obj) {
            return Err(Error::DescentViolation {
                iteration: k + 1,
                stage: "selection",
                lhs: phi_w,
                rhs: phi_prev,
            });
        }

        // A is orthonormal, so code-space distances equal image-space ones.
        let prev_norm = alpha.norm();
        let rel_change = if prev_norm > 0.0 {
            next.distance(&alpha) / prev_norm
        } else {
            next.norm()
        };
        trace.records.push(IterationRecord {
            k: k + 1,
            phi_prev,
            phi_w,
            phi,
            accepted,
            c_k,
            phi_beta,
            beta_dist,
            step_norm,
            rel_change,
        });
        alpha = next;
        phi_prev = phi;
        if rel_change <= cfg.tol() {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        x_star: obj.synthesize(&alpha),
        alpha_star: alpha,
        iterations_used: trace.records.len(),
        trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::{GaussianBlur, Identity, RandomOutput};
    use crate::proximal::{prox_lp_complex, ProxParams};
    use crate::transforms::{adjoint_operator, fft_centered, forward_operator, WaveletSpec};
    use crate::types::{Domain, Shape};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_image(size: usize) -> ComplexImage {
        let shape = Shape::square(size);
        let data = (0..shape.len())
            .map(|i| {
                let (r, c) = ((i / size) as f64, (i % size) as f64);
                let d = ((r - size as f64 / 2.0).powi(2) + (c - size as f64 / 2.5).powi(2)).sqrt();
                Complex64::new(if d < size as f64 / 3.0 { 0.8 } else { 0.1 }, 0.0)
            })
            .collect();
        ComplexImage::new(shape, data, Domain::Image).unwrap()
    }

    fn random_mask(shape: Shape, ratio: f64, rng: &mut ChaCha8Rng) -> SamplingMask {
        let mut ind: Vec<bool> = (0..shape.len()).map(|_| rng.random_bool(ratio)).collect();
        ind[shape.height / 2 * shape.width + shape.width / 2] = true;
        SamplingMask::new(shape, ind).unwrap()
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(ablation_variant(&alloc::format!("{v}")).unwrap(), v);
        }
        assert!(matches!(ablation_variant("PN"), Err(Error::UnknownVariant(_))));
        assert_eq!(
            Variant::P.stages(),
            Stages { fidelity: false, denoise: false, check: false, prior: true }
        );
    }

    #[test]
    fn noiseless_full_sampling_recovers_image() {
        let x = smooth_image(32);
        let y = fft_centered(&x).unwrap();
        let mask = SamplingMask::full(x.shape()).unwrap();
        let cfg = SolverConfig::builder().lambda(1e-5).build().unwrap();
        let res = solve(&y, &mask, &cfg, &Identity, Variant::Full).unwrap();
        assert!(res.converged);
        let mse = crate::linalg::distance(res.x_star.data(), x.data()).powi(2) / x.shape().len() as f64;
        let psnr = 10.0 * (0.8f64 * 0.8 / mse).log10();
        assert!(psnr >= 60.0, "psnr {psnr}");
    }

    #[test]
    fn x_star_is_synthesis_of_alpha_star() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = smooth_image(32);
        let mask = random_mask(x.shape(), 0.3, &mut rng);
        let y = crate::transforms::sample(&fft_centered(&x).unwrap(), &mask).unwrap();
        let res = solve(&y, &mask, &SolverConfig::default(), &GaussianBlur::new(0.7).unwrap(), Variant::Full)
            .unwrap();
        let synth = crate::transforms::wavelet_synthesize(&res.alpha_star, &WaveletSpec::default()).unwrap();
        assert!(crate::linalg::distance(synth.data(), res.x_star.data()) < 1e-10);
        let phi = res.trace.phi_values();
        for pair in phi.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs());
        }
    }

    #[test]
    fn adversarial_denoiser_cannot_break_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = smooth_image(32);
        let mask = random_mask(x.shape(), 0.3, &mut rng);
        let y = crate::transforms::sample(&fft_centered(&x).unwrap(), &mask).unwrap();
        let cfg = SolverConfig::builder().tol(1e-12).build().unwrap();
        let res = solve(&y, &mask, &cfg, &RandomOutput { seed: 7 }, Variant::Full).unwrap();
        assert_eq!(res.iterations_used, 50);
        assert!(res.trace.acceptance_count() < 50);
        assert!(res.trace.final_phi() <= res.trace.initial_phi);
        for r in &res.trace.records {
            assert!(r.phi <= r.phi_w + 1e-9 * r.phi_w.abs());
            assert!(r.phi_w <= r.phi_prev + 1e-9 * r.phi_prev.abs());
        }
    }

    #[test]
    fn already_converged_input_gives_single_record() {
        let shape = Shape::square(16);
        let y = ComplexImage::zeros(shape, Domain::KSpace).unwrap();
        let mask = SamplingMask::full(shape).unwrap();
        let res = solve(&y, &mask, &SolverConfig::default(), &Identity, Variant::Full).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations_used, 1);
        assert_eq!(res.trace.records.len(), 1);
        assert_eq!(res.x_star.norm(), 0.0);
        assert_eq!(res.trace.to_csv().lines().count(), 3);
    }

    /// Proximal gradient written directly against the public operators.
    fn ista(y: &ComplexImage, mask: &SamplingMask, spec: &WaveletSpec, eta: f64, lambda: f64, p: f64, iters: usize) -> SparseCode {
        let mut alpha = adjoint_operator(y, mask, spec).unwrap();
        let params = ProxParams::new(eta * lambda, p).unwrap();
        for _ in 0..iters {
            let r = forward_operator(&alpha, mask, spec).unwrap();
            let resid: Vec<Complex64> = r.data().iter().zip(y.data()).map(|(a, b)| a - b).collect();
            let resid = ComplexImage::new(y.shape(), resid, Domain::KSpace).unwrap();
            let grad = adjoint_operator(&resid, mask, spec).unwrap();
            let data = alpha
                .data()
                .iter()
                .zip(grad.data())
                .map(|(&a, &g)| prox_lp_complex(a - g * eta, params).unwrap())
                .collect();
            alpha = SparseCode::new(y.shape(), data).unwrap();
        }
        alpha
    }

    #[test]
    fn prior_only_variant_is_proximal_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = smooth_image(16);
        let mask = random_mask(x.shape(), 0.4, &mut rng);
        let y = crate::transforms::sample(&fft_centered(&x).unwrap(), &mask).unwrap();
        let spec = WaveletSpec::default();
        for iters in 1..=8 {
            let cfg = SolverConfig::builder().lambda(0.01).tol(1e-300).max_iters(iters).build().unwrap();
            let res = solve(&y, &mask, &cfg, &Identity, Variant::P).unwrap();
            let want = ista(&y, &mask, &spec, cfg.eta2(), 0.01, 0.8, iters);
            assert!(res.alpha_star.distance(&want) <= 1e-10 * (1.0 + want.norm()), "iter {iters}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = smooth_image(16);
        let mask = random_mask(x.shape(), 0.4, &mut rng);
        let y = crate::transforms::sample(&fft_centered(&x).unwrap(), &mask).unwrap();
        let cfg = SolverConfig::builder().max_iters(5).tol(1e-300).build().unwrap();
        let res = solve(&y, &mask, &cfg, &Identity, Variant::Full).unwrap();
        let csv = res.trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,phi,phi_w,accepted,step_norm,c_k,rel_change");
        assert_eq!(lines.len(), res.iterations_used + 2);
        for (i, line) in lines[1..].iter().enumerate() {
            assert_eq!(line.split(',').count(), 7);
            assert!(line.starts_with(&alloc::format!("{i},")));
        }
        let phi: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(phi, res.trace.records[0].phi);
    }

    #[test]
    fn mismatched_lipschitz_is_rejected() {
        let shape = Shape::square(16);
        let y = ComplexImage::zeros(shape, Domain::KSpace).unwrap();
        let mask = SamplingMask::full(shape).unwrap();
        let target = ComplexImage::zeros(shape, Domain::Image).unwrap();
        let obj = Objective::new(&y, &mask, WaveletSpec::default(), 0.0, 0.8)
            .unwrap()
            .with_anchor(0.5, &target)
            .unwrap();
        let init = SparseCode::zeros(shape);
        let err = solve_objective(&obj, &SolverConfig::default(), &Identity, Variant::Full, &init);
        assert!(matches!(err, Err(Error::Config(_))));
        let cfg = SolverConfig::default().with_lipschitz(1.5).unwrap();
        assert!(solve_objective(&obj, &cfg, &Identity, Variant::Full, &init).is_ok());
    }
}
