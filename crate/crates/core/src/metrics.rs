//! Image quality metrics. Complex reconstructions should be reduced with
//! [`ComplexImage::magnitude`](crate::ComplexImage::magnitude) first.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::real_norm;
use crate::types::RealImage;

/// Reported in place of +∞ for identical images.
pub const PSNR_CAP: f64 = 99.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    pub db: f64,
    /// True when the images were identical and `db` is [`PSNR_CAP`].
    pub capped: bool,
}

pub fn mse(a: &RealImage, b: &RealImage) -> Result<f64> {
    a.shape().ensure_same(b.shape())?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.shape().len() as f64)
}

/// `10·log10(peak² / mse)`; `peak` defaults to the maximum of `reference`.
pub fn psnr(reference: &RealImage, rec: &RealImage, peak: Option<f64>) -> Result<Psnr> {
    let peak = peak.unwrap_or_else(|| reference.max());
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::Config(alloc::format!("PSNR peak must be > 0, got {peak}")));
    }
    let m = mse(reference, rec)?;
    if m == 0.0 {
        return Ok(Psnr { db: PSNR_CAP, capped: true });
    }
    Ok(Psnr {
        db: 10.0 * (peak * peak / m).log10(),
        capped: false,
    })
}

/// `‖rec − ref‖ / ‖ref‖`
pub fn rlne(reference: &RealImage, rec: &RealImage) -> Result<f64> {
    reference.shape().ensure_same(rec.shape())?;
    let denom = reference.norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: alloc::vec::Vec<f64> = rec.data().iter().zip(reference.data()).map(|(a, b)| a - b).collect();
    Ok(real_norm(&diff) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Shape;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant(v: f64) -> RealImage {
        RealImage::new(Shape::square(4), alloc::vec![v; 16]).unwrap()
    }

    fn random(seed: u64) -> RealImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealImage::new(Shape::new(8, 16), (0..128).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&constant(0.3), &constant(0.3)).unwrap(), 0.0);
        assert_eq!(mse(&constant(0.0), &constant(1.0)).unwrap(), 1.0);
        let (a, b) = (random(1), random(2));
        let mut direct = 0.0;
        for i in 0..8 {
            for j in 0..16 {
                direct += (a.get(i, j) - b.get(i, j)).powi(2);
            }
        }
        assert!((mse(&a, &b).unwrap() - direct / 128.0).abs() < 1e-12);
        assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        assert!(mse(&a, &constant(0.0)).is_err());
    }

    #[test]
    fn psnr_closed_form() {
        // mse = 1 and peak = 255 give 20·log10(255) dB
        let p = psnr(&constant(0.0), &constant(1.0), Some(255.0)).unwrap();
        assert!((p.db - 48.1308).abs() < 1e-4);
        assert!(!p.capped);
        let same = psnr(&random(3), &random(3), None).unwrap();
        assert!(same.capped && same.db == PSNR_CAP);
    }

    #[test]
    fn halving_mse_adds_three_db() {
        let a = constant(0.0);
        let p1 = psnr(&a, &constant(1.0), Some(1.0)).unwrap().db;
        let p2 = psnr(&a, &constant(0.5f64.sqrt()), Some(1.0)).unwrap().db;
        assert!((p2 - p1 - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn psnr_default_peak_is_reference_max() {
        let (a, b) = (random(4), random(5));
        assert_eq!(psnr(&a, &b, None).unwrap(), psnr(&a, &b, Some(a.max())).unwrap());
        assert!(psnr(&RealImage::zeros(b.shape()).unwrap(), &b, None).is_err());
        assert!(psnr(&a, &b, Some(-1.0)).is_err());
    }

    #[test]
    fn rlne_cases() {
        let a = random(6);
        assert_eq!(rlne(&a, &a).unwrap(), 0.0);
        let doubled = RealImage::new(a.shape(), a.data().iter().map(|v| 2.0 * v).collect()).unwrap();
        assert!((rlne(&a, &doubled).unwrap() - 1.0).abs() < 1e-15);
        let b = random(7);
        let num: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = a.data().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((rlne(&a, &b).unwrap() - num / den).abs() < 1e-12);
        assert!(matches!(rlne(&constant(0.0), &constant(1.0)), Err(Error::ZeroReference)));
    }

    proptest! {
        #[test]
        fn psnr_decreases_with_mse(e1 in 1e-6f64..1.0, e2 in 1e-6f64..1.0) {
            prop_assume!(e1 != e2);
            let r = constant(0.0);
            let p1 = psnr(&r, &constant(e1), Some(1.0)).unwrap().db;
            let p2 = psnr(&r, &constant(e2), Some(1.0)).unwrap().db;
            prop_assert_eq!(e1 < e2, p1 > p2);
        }

        #[test]
        fn rlne_of_perturbation(seed in 0u64..1000, scale in 1e-3f64..10.0) {
            let r = random(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
            let delta: Vec<f64> = (0..128).map(|_| rng.random_range(-scale..scale)).collect();
            let rec = RealImage::new(r.shape(), r.data().iter().zip(&delta).map(|(a, d)| a + d).collect()).unwrap();
            let dn = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            let got = rlne(&r, &rec).unwrap();
            prop_assert!((got - dn / r.norm()).abs() <= 1e-12 * (1.0 + got));
        }
    }
}
