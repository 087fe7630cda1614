//! Centered, unitary 2-D DFT on power-of-two square grids.
//!
//! `F = shift ∘ DFT ∘ shift / √(HW)`, so the DC coefficient sits at
//! `(H/2, W/2)` and `‖F x‖ = ‖x‖`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::types::{ComplexImage, Domain, Shape};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

struct Radix2 {
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize, direction: Direction) -> Self {
        let sign = match direction {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        // Each twiddle from its own sin/cos; a recurrence drifts past 1e-12 at n=128.
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = sign * 2.0 * PI * k as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Self { twiddles }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Circular shift by half the grid in both axes (fftshift == ifftshift for even sizes).
fn half_roll(shape: Shape, data: &[Complex64]) -> Vec<Complex64> {
    let (h, w) = (shape.height, shape.width);
    let (sh, sw) = (h / 2, w / 2);
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..h {
        let dst_r = (r + sh) % h;
        for c in 0..w {
            out[dst_r * w + (c + sw) % w] = data[r * w + c];
        }
    }
    out
}

/// Raw centered unitary transform; callers guarantee a dyadic square shape.
pub(crate) fn centered_2d(shape: Shape, data: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let (h, w) = (shape.height, shape.width);
    let mut buf = half_roll(shape, data);
    let row_plan = Radix2::new(w, direction);
    for row in buf.chunks_exact_mut(w) {
        row_plan.run(row);
    }
    let col_plan = Radix2::new(h, direction);
    let mut column = alloc::vec![Complex64::new(0.0, 0.0); h];
    for c in 0..w {
        for r in 0..h {
            column[r] = buf[r * w + c];
        }
        col_plan.run(&mut column);
        for r in 0..h {
            buf[r * w + c] = column[r];
        }
    }
    let scale = 1.0 / (shape.len() as f64).sqrt();
    let mut out = half_roll(shape, &buf);
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Image → k-space.
pub fn fft_centered(img: &ComplexImage) -> Result<ComplexImage> {
    img.require_domain(Domain::Image)?;
    img.shape().require_dyadic_square()?;
    let data = centered_2d(img.shape(), img.data(), Direction::Forward);
    Ok(ComplexImage::from_parts(img.shape(), data, Domain::KSpace))
}

/// K-space → image; the adjoint (and inverse) of [`fft_centered`].
pub fn ifft_centered(k: &ComplexImage) -> Result<ComplexImage> {
    k.require_domain(Domain::KSpace)?;
    k.shape().require_dyadic_square()?;
    let data = centered_2d(k.shape(), k.data(), Direction::Inverse);
    Ok(ComplexImage::from_parts(k.shape(), data, Domain::Image))
}
