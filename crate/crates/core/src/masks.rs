//! Undersampling patterns: Cartesian rows, radial spokes, and
//! variable-density Gaussian. All are deterministic under their seed.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{SamplingMask, Shape};

/// Fraction of the Cartesian row budget spent on the central band.
pub const CARTESIAN_CENTER_FRACTION: f64 = 0.32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskKind {
    Cartesian,
    #[default]
    Radial,
    Gaussian,
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskKind::Cartesian => "cartesian",
            MaskKind::Radial => "radial",
            MaskKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(MaskKind::Cartesian),
            "radial" => Ok(MaskKind::Radial),
            "gaussian" => Ok(MaskKind::Gaussian),
            other => Err(Error::Config(alloc::format!("unknown mask kind `{other}`"))),
        }
    }
}

pub fn make_mask(kind: MaskKind, h: usize, w: usize, ratio: f64, seed: u64) -> Result<SamplingMask> {
    match kind {
        MaskKind::Cartesian => cartesian_mask(h, w, ratio, seed),
        MaskKind::Radial => radial_mask(h, w, ratio, seed),
        MaskKind::Gaussian => gaussian_mask(h, w, ratio, seed),
    }
}

fn validate(h: usize, w: usize, ratio: f64) -> Result<Shape> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::RatioOutOfRange(ratio));
    }
    let shape = Shape::new(h, w);
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    Ok(shape)
}

/// Whole phase-encode rows: a centered band plus uniformly drawn rows.
pub fn cartesian_mask(h: usize, w: usize, ratio: f64, seed: u64) -> Result<SamplingMask> {
    let shape = validate(h, w, ratio)?;
    if ratio == 1.0 {
        return SamplingMask::full(shape);
    }
    let total = ((ratio * h as f64).floor() as usize).max(1);
    let band = ((CARTESIAN_CENTER_FRACTION * ratio * h as f64).ceil() as usize).clamp(1, total);
    let start = h / 2 - band / 2;
    let mut rows = alloc::vec![false; h];
    rows[start..start + band].iter_mut().for_each(|r| *r = true);
    let rest: Vec<usize> = (0..h).filter(|&r| !rows[r]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in rand::seq::index::sample(&mut rng, rest.len(), total - band) {
        rows[rest[i]] = true;
    }
    let indicator = (0..shape.len()).map(|i| rows[i / w]).collect();
    SamplingMask::new(shape, indicator)
}

fn bresenham(r0: isize, c0: isize, r1: isize, c1: isize, mut plot: impl FnMut(isize, isize)) {
    let (dr, dc) = ((r1 - r0).abs(), -(c1 - c0).abs());
    let (sr, sc) = (if r0 < r1 { 1 } else { -1 }, if c0 < c1 { 1 } else { -1 });
    let (mut r, mut c, mut err) = (r0, c0, dr + dc);
    loop {
        plot(r, c);
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dc {
            err += dc;
            r += sr;
        }
        if e2 <= dr {
            err += dr;
            c += sc;
        }
    }
}

/// `n` full spokes through the k-space center at angles `offset + πj/n`.
/// Angle 0 is the center row.
pub fn radial_mask_spokes(h: usize, w: usize, n: usize, offset: f64) -> Result<SamplingMask> {
    let shape = Shape::new(h, w);
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    let (cr, cc) = ((h / 2) as f64, (w / 2) as f64);
    let mut ind = alloc::vec![false; shape.len()];
    ind[(h / 2) * w + w / 2] = true;
    for j in 0..n {
        let theta = offset + core::f64::consts::PI * j as f64 / n as f64;
        for dir in [theta, theta + core::f64::consts::PI] {
            // image rows grow downward, so a positive angle moves up
            let (dr, dc) = (-dir.sin(), dir.cos());
            let tr = if dr > 1e-12 {
                (h as f64 - 1.0 - cr) / dr
            } else if dr < -1e-12 {
                -cr / dr
            } else {
                f64::INFINITY
            };
            let tc = if dc > 1e-12 {
                (w as f64 - 1.0 - cc) / dc
            } else if dc < -1e-12 {
                -cc / dc
            } else {
                f64::INFINITY
            };
            let t = tr.min(tc);
            let r1 = (cr + t * dr).round() as isize;
            let c1 = (cc + t * dc).round() as isize;
            bresenham(cr as isize, cc as isize, r1, c1, |r, c| {
                if (0..h as isize).contains(&r) && (0..w as isize).contains(&c) {
                    ind[r as usize * w + c as usize] = true;
                }
            });
        }
    }
    SamplingMask::new(shape, ind)
}

/// Radial spokes with a seeded angular offset; the spoke count is chosen
/// to bring the sampled fraction as close to `ratio` as the grid allows.
pub fn radial_mask(h: usize, w: usize, ratio: f64, seed: u64) -> Result<SamplingMask> {
    let shape = validate(h, w, ratio)?;
    if ratio == 1.0 {
        return SamplingMask::full(shape);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit: f64 = rng.random_range(0.0..1.0);
    let build = |n: usize| radial_mask_spokes(h, w, n, unit * core::f64::consts::PI / n as f64);
    // Coverage grows with n up to rasterization jitter, so bisect and then
    // look at the neighbours.
    let (mut lo, mut hi) = (1usize, 4 * (h + w));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if build(mid)?.ratio() < ratio {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let mut best: Option<SamplingMask> = None;
    for n in lo.saturating_sub(3).max(1)..=lo + 3 {
        let m = build(n)?;
        let better = best
            .as_ref()
            .is_none_or(|b| (m.ratio() - ratio).abs() < (b.ratio() - ratio).abs());
        if better {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one spoke count tried"))
}

/// Variable-density random mask with exactly `⌊ratio·h·w⌋` samples drawn
/// with probability `∝ exp(−r²/(2s²))` around the k-space center.
pub fn gaussian_mask(h: usize, w: usize, ratio: f64, seed: u64) -> Result<SamplingMask> {
    let shape = validate(h, w, ratio)?;
    let n = shape.len();
    let k = ((ratio * n as f64).floor() as usize).max(1);
    if k >= n {
        return SamplingMask::full(shape);
    }
    let (cr, cc) = ((h / 2) as f64, (w / 2) as f64);
    let r2: Vec<f64> = (0..n)
        .map(|i| ((i / w) as f64 - cr).powi(2) + ((i % w) as f64 - cc).powi(2))
        .collect();
    let expected = |s: f64| r2.iter().map(|&d| (-d / (2.0 * s * s)).exp()).sum::<f64>();
    let target = ratio * n as f64;
    let (mut lo, mut hi) = (1e-3, (h.max(w) as f64) * 8.0);
    while expected(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);

    // Weighted sampling without replacement: keep the k largest ln(u)/p.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize)> = r2
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let p = (-d / (2.0 * s * s)).exp();
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            (u.ln() / p, i)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut ind = alloc::vec![false; n];
    keyed[..k].iter().for_each(|&(_, i)| ind[i] = true);
    let dc = (h / 2) * w + w / 2;
    if !ind[dc] {
        ind[keyed[k - 1].1] = false;
        ind[dc] = true;
    }
    SamplingMask::new(shape, ind)
}
