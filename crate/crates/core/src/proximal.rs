//! Proximal operator of the weighted ℓp quasi-norm, `0 < p ≤ 1`:
//!
//! ```text
//! prox(v) = argmin_x  τ·|x|^p + ½|x − v|²
//! ```
//!
//! For `p < 1` the scalar problem on `x ≥ 0` is a generalized hard/soft
//! threshold. Below the critical value `τ*` the minimizer is zero; above it
//! the minimizer is the larger root of `x − v + τ·p·x^{p−1} = 0`. Complex
//! entries are handled by shrinking the modulus and keeping the phase.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::SparseCode;
#[allow(unused_imports)]
use num_traits::Float;

const MAX_ITERS: usize = 100;
const TOL: f64 = 1e-12;

/// Threshold weight `τ = η·λ` and exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    tau: f64,
    p: f64,
}

impl ProxParams {
    pub fn new(tau: f64, p: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Config(alloc::format!("prox weight must be > 0, got {tau}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(alloc::format!("p must lie in (0, 1], got {p}")));
        }
        Ok(Self { tau, p })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Critical input below which the prox returns zero.
    pub fn threshold(&self) -> f64 {
        let (tau, p) = (self.tau, self.p);
        if p == 1.0 {
            return tau;
        }
        let base = 2.0 * tau * (1.0 - p);
        base.powf(1.0 / (2.0 - p)) + tau * p * base.powf((p - 1.0) / (2.0 - p))
    }

    /// Scalar objective `τ·x^p + ½(x − v)²`.
    pub fn objective(&self, x: f64, v: f64) -> f64 {
        self.tau * x.powf(self.p) + 0.5 * (x - v) * (x - v)
    }
}

/// Global minimizer of `τ·x^p + ½(x − v)²` over `x ≥ 0`, for `v ≥ 0`.
///
/// At `v = τ*` the prox is set-valued; zero is returned.
pub fn prox_lp_scalar(v: f64, params: ProxParams) -> Result<f64> {
    let ProxParams { tau, p } = params;
    if v <= 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok((v - tau).max(0.0));
    }
    if v <= params.threshold() {
        return Ok(0.0);
    }

    // h is convex and increasing right of `lower`, and h(v) > 0, so Newton
    // from v descends monotonically onto the larger root.
    let lower = (tau * p * (1.0 - p)).powf(1.0 / (2.0 - p));
    let h = |x: f64| x - v + tau * p * x.powf(p - 1.0);
    let dh = |x: f64| 1.0 + tau * p * (p - 1.0) * x.powf(p - 2.0);

    let (mut lo, mut hi) = (lower, v);
    let mut x = v;
    let mut root = None;
    for _ in 0..MAX_ITERS {
        let hx = h(x);
        if hx > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let slope = dh(x);
        let mut next = x - hx / slope;
        if !(slope > 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= TOL * x.max(1.0) {
            root = Some(next);
            break;
        }
        x = next;
    }
    let root = root.ok_or(Error::ProxNonConvergence { v, tau, p })?;

    if params.objective(root, v) < params.objective(0.0, v) {
        Ok(root)
    } else {
        Ok(0.0)
    }
}

/// Shrink a single complex coefficient: modulus through the scalar prox,
/// phase unchanged.
pub fn prox_lp_complex(v: Complex64, params: ProxParams) -> Result<Complex64> {
    let m = v.norm();
    if m == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = prox_lp_scalar(m, params)?;
    Ok(if s == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        v * (s / m)
    })
}

/// Entrywise complex prox of a whole code.
pub fn prox_lp(v: &SparseCode, params: ProxParams) -> Result<SparseCode> {
    let data = v
        .data()
        .iter()
        .map(|&c| prox_lp_complex(c, params))
        .collect::<Result<_>>()?;
    Ok(SparseCode::from_parts(v.shape(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Shape;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive grid argmin on [0, v] with the given step.
    fn dense_grid_argmin(v: f64, tau: f64, p: f64, step: f64) -> f64 {
        let n = (v / step).floor() as usize;
        let mut best = (0.0, 0.5 * v * v);
        for k in 0..=n {
            let x = k as f64 * step;
            let f = tau * x.powf(p) + 0.5 * (x - v) * (x - v);
            if f < best.1 {
                best = (x, f);
            }
        }
        best.0
    }

    #[test]
    fn golden_value_p08() {
        // argmin of 0.5·x^0.8 + ½(x−2)² over a 1e-6 grid on [0, 2]
        let golden = 1.637574;
        let x = prox_lp_scalar(2.0, ProxParams::new(0.5, 0.8).unwrap()).unwrap();
        assert!((x - golden).abs() < 1e-4, "{x}");
    }

    #[test]
    fn convex_limit_is_soft_threshold() {
        let params = ProxParams::new(1.0, 1.0).unwrap();
        assert_eq!(prox_lp_scalar(3.0, params).unwrap(), 2.0);
        assert_eq!(prox_lp_scalar(0.5, params).unwrap(), 0.0);
    }

    #[test]
    fn zero_input_gives_zero() {
        for p in [0.3, 0.8, 1.0] {
            assert_eq!(prox_lp_scalar(0.0, ProxParams::new(0.7, p).unwrap()).unwrap(), 0.0);
        }
        let z = SparseCode::zeros(Shape::square(4));
        assert_eq!(prox_lp(&z, ProxParams::new(1.0, 0.5).unwrap()).unwrap(), z);
    }

    #[test]
    fn threshold_is_tied_to_zero() {
        let params = ProxParams::new(0.5, 0.8).unwrap();
        let t = params.threshold();
        assert_eq!(prox_lp_scalar(t, params).unwrap(), 0.0);
        assert!(prox_lp_scalar(t * (1.0 + 1e-6), params).unwrap() > 0.0);
        // objective values at 0 and at the nonzero branch coincide at τ*
        let x = prox_lp_scalar(t * (1.0 + 1e-9), params).unwrap();
        assert!((params.objective(x, t) - params.objective(0.0, t)).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_grid_on_small_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let p = rng.random_range(0.3..0.95);
            let tau = rng.random_range(0.01..1.0);
            let v = rng.random_range(0.0..2.0);
            let params = ProxParams::new(tau, p).unwrap();
            let got = prox_lp_scalar(v, params).unwrap();
            let want = dense_grid_argmin(v, tau, p, 1e-6);
            assert!((got - want).abs() < 1e-4, "v={v} tau={tau} p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn real_positive_entries_match_scalar() {
        let params = ProxParams::new(0.4, 0.7).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| i as f64 * 0.25).collect();
        let code = SparseCode::new(
            Shape::square(4),
            vals.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .unwrap();
        let out = prox_lp(&code, params).unwrap();
        for (o, &v) in out.data().iter().zip(&vals) {
            assert!((o.re - prox_lp_scalar(v, params).unwrap()).abs() <= 1e-15 * v.max(1.0));
            assert_eq!(o.im, 0.0);
        }
    }

    #[test]
    fn stochastic_optimality_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let params = ProxParams::new(0.3, 0.6).unwrap();
        let v: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let out: Vec<Complex64> = v.iter().map(|&c| prox_lp_complex(c, params).unwrap()).collect();
        let objective = |x: &[Complex64]| -> f64 {
            x.iter()
                .zip(&v)
                .map(|(a, b)| params.tau() * a.norm().powf(params.p()) + 0.5 * (a - b).norm_sqr())
                .sum()
        };
        let best = objective(&out);
        for _ in 0..10_000 {
            let scale = rng.random_range(1e-4..1.0);
            let cand: Vec<Complex64> = out
                .iter()
                .map(|&c| {
                    c + Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
                })
                .collect();
            assert!(best <= objective(&cand) + 1e-12);
        }
    }

    #[test]
    fn monotone_in_v() {
        for &(tau, p) in &[(0.5, 0.8), (2.0, 0.3), (0.01, 0.95)] {
            let params = ProxParams::new(tau, p).unwrap();
            let mut prev = 0.0;
            for k in 0..4000 {
                let v = k as f64 * 0.005;
                let x = prox_lp_scalar(v, params).unwrap();
                assert!(x >= prev, "tau={tau} p={p} v={v}");
                prev = x;
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProxParams::new(0.0, 0.5).is_err());
        assert!(ProxParams::new(1.0, 0.0).is_err());
        assert!(ProxParams::new(1.0, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn shrinks_and_preserves_phase(
            re in -50.0f64..50.0, im in -50.0f64..50.0,
            tau in 1e-3f64..10.0, p in 0.3f64..1.0,
        ) {
            let v = Complex64::new(re, im);
            let params = ProxParams::new(tau, p).unwrap();
            let out = prox_lp_complex(v, params).unwrap();
            prop_assert!(out.norm() <= v.norm());
            if out.norm() > 0.0 {
                prop_assert!((out.arg() - v.arg()).abs() < 1e-12);
            }
            let s = prox_lp_scalar(v.norm(), params).unwrap();
            prop_assert!(s >= 0.0 && s <= v.norm());
        }
    }
}
