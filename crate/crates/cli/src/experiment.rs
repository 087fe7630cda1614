//! The operations behind the subcommands, independent of argument parsing.

use std::path::Path;

use csmri_core::denoise::{denoiser_by_name, Denoiser, Identity, Threshold, WaveletShrink};
use csmri_core::masks::make_mask;
use csmri_core::metrics::{psnr, rlne};
use csmri_core::phantom::phantom;
use csmri_core::rician::{add_rician, solve_rician, RicianParams, RicianRemover};
use csmri_core::solver::{solve, Variant};
use csmri_core::transforms::{fft_centered, sample, zero_filled};
use csmri_core::{ComplexImage, Domain, RealImage, SamplingMask};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::{pgm, rimg::RawImageFile};

fn is_pgm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// `.pgm` files through the PGM codec, anything else as `RIMG` (complex
/// payloads reduced to magnitude).
pub fn load_image(path: &Path) -> Result<RealImage> {
    if is_pgm(path) {
        pgm::read(path)
    } else {
        RawImageFile::read(path)?.to_real()
    }
}

pub fn save_image(img: &RealImage, path: &Path) -> Result<()> {
    if is_pgm(path) {
        pgm::write(img, path)
    } else {
        RawImageFile::from_real(img).write(path)
    }
}

/// `P F x`, with Rician noise applied to `x` first when requested.
pub fn corrupt(x: &RealImage, mask: &SamplingMask, rician: Option<RicianParams>) -> Result<ComplexImage> {
    x.shape().ensure_same(mask.shape())?;
    let noisy = match rician {
        Some(params) => add_rician(x, params)?,
        None => x.clone(),
    };
    Ok(sample(&fft_centered(&noisy.to_complex())?, mask)?)
}

pub fn build_denoiser(cfg: &ExperimentConfig) -> Result<Box<dyn Denoiser>> {
    Ok(denoiser_by_name(&cfg.denoiser, &cfg.denoiser_params)?)
}

pub fn build_remover(cfg: &ExperimentConfig, sigma: f64) -> Result<RicianRemover> {
    let inner: Box<dyn Denoiser> = match cfg.rician_inner.as_str() {
        "identity" => Box::new(Identity),
        _ => Box::new(WaveletShrink::new(cfg.solver.wavelet(), Threshold::Fixed(sigma))?),
    };
    Ok(RicianRemover::new(sigma, cfg.rician_window, inner)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub image: ComplexImage,
    pub trace_csv: String,
    pub iterations_used: usize,
    pub converged: bool,
}

/// The plain loop, or the Rician alternation when `rician_sigma` is given.
/// For the latter the trace is that of the final z-step.
pub fn reconstruct(
    y: &ComplexImage,
    mask: &SamplingMask,
    cfg: &ExperimentConfig,
    variant: Variant,
    rician_sigma: Option<f64>,
) -> Result<Reconstruction> {
    let denoiser = build_denoiser(cfg)?;
    let res = match rician_sigma {
        None => solve(y, mask, &cfg.solver, denoiser.as_ref(), variant)?,
        Some(sigma) => {
            let mut rc = cfg.rician.clone();
            rc.sigma = sigma;
            let remover = build_remover(cfg, sigma)?;
            solve_rician(y, mask, &rc, &remover, denoiser.as_ref())?.solution
        }
    };
    Ok(Reconstruction {
        trace_csv: res.trace.to_csv(),
        image: res.x_star,
        iterations_used: res.iterations_used,
        converged: res.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub truth: RealImage,
    pub mask: SamplingMask,
    pub y: ComplexImage,
}

/// Phantom, mask and k-space data described by `cfg`. Noise uses `cfg.seed`.
pub fn synthetic_problem(cfg: &ExperimentConfig) -> Result<Synthetic> {
    let truth = phantom(cfg.size, cfg.phantom)?;
    let mask = make_mask(cfg.mask_kind, cfg.size, cfg.size, cfg.mask_ratio, cfg.mask_seed)?;
    let noise = (cfg.noise_sigma > 0.0)
        .then(|| RicianParams::new(cfg.noise_sigma, cfg.seed))
        .transpose()?;
    let y = corrupt(&truth, &mask, noise)?;
    Ok(Synthetic { truth, mask, y })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub psnr: f64,
    pub rlne: f64,
}

pub fn score(truth: &RealImage, rec: &RealImage) -> Result<Scores> {
    Ok(Scores {
        psnr: psnr(truth, rec, None)?.db,
        rlne: rlne(truth, rec)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub recon: Reconstruction,
    pub zero_filled: Scores,
    pub scores: Scores,
}

/// Build the synthetic problem and reconstruct it. With noise enabled the
/// Rician path is used at the same σ.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let p = synthetic_problem(cfg)?;
    let zf = zero_filled(&p.y, &p.mask)?.magnitude();
    let sigma = (cfg.noise_sigma > 0.0).then_some(cfg.noise_sigma);
    let recon = reconstruct(&p.y, &p.mask, cfg, cfg.variant, sigma)?;
    Ok(ExperimentOutcome {
        zero_filled: score(&p.truth, &zf)?,
        scores: score(&p.truth, &recon.image.magnitude())?,
        recon,
    })
}

pub fn kspace_from_file(path: &Path) -> Result<ComplexImage> {
    RawImageFile::read(path)?.to_complex(Domain::KSpace)
}
