//! `key = value` experiment files. Blank lines and `#` comments are
//! ignored; unknown or repeated keys are errors. Omitted keys keep their
//! defaults, and every value is validated by the module that owns it.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use csmri_core::denoise::{DenoiserParams, NoiseSchedule, Threshold};
use csmri_core::masks::MaskKind;
use csmri_core::phantom::PhantomKind;
use csmri_core::rician::RicianSolverConfig;
use csmri_core::solver::Variant;
use csmri_core::transforms::{WaveletFamily, WaveletSpec};
use csmri_core::{CheckRule, SolverConfig, SolverConfigBuilder};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    /// `inner` always equals `solver`.
    pub rician: RicianSolverConfig,
    /// Box window of the Rician remover's moment estimate.
    pub rician_window: usize,
    /// Inner denoiser of the Rician remover: `wavelet` (threshold σ) or `identity`.
    pub rician_inner: String,
    pub mask_kind: MaskKind,
    pub mask_ratio: f64,
    pub mask_seed: u64,
    pub denoiser: String,
    pub denoiser_params: DenoiserParams,
    pub variant: Variant,
    pub seed: u64,
    // synthetic problems (`batch`)
    pub phantom: PhantomKind,
    pub size: usize,
    /// Rician noise added before sampling; 0 disables it.
    pub noise_sigma: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_pairs(std::iter::empty()).expect("defaults are valid")
    }
}

const KEYS: &[&str] = &[
    "lambda",
    "p",
    "rho",
    "momentum_rho",
    "eta1",
    "eta2",
    "lipschitz",
    "epsilon0",
    "epsilon_decay",
    "tol",
    "max_iters",
    "wavelet",
    "wavelet_levels",
    "check_rule",
    "enforce_descent",
    "rician_rho1",
    "rician_lambda1",
    "rician_lambda2",
    "rician_outer_iters",
    "rician_sigma",
    "rician_intensity_max",
    "rician_window",
    "rician_inner",
    "mask",
    "mask_ratio",
    "mask_seed",
    "denoiser",
    "denoiser_sigma",
    "denoiser_threshold",
    "denoiser_schedule",
    "variant",
    "seed",
    "phantom",
    "size",
    "noise_sigma",
];

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config {
        line,
        reason: format!("invalid value `{value}` for `{key}`"),
    })
}

fn parse_core<T: FromStr<Err = csmri_core::Error>>(line: usize, value: &str) -> Result<T> {
    value.parse().map_err(|e: csmri_core::Error| CliError::Config {
        line,
        reason: e.to_string(),
    })
}

impl ExperimentConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        text.parse()
    }

    /// `(line, key, value)` triples; line numbers are only used in messages.
    fn from_pairs<'a>(pairs: impl Iterator<Item = (usize, &'a str, &'a str)>) -> Result<Self> {
        let mut b = SolverConfigBuilder::default();
        let mut family = WaveletSpec::default().family;
        let mut levels = WaveletSpec::default().levels;
        let mut rician = RicianSolverConfig::default();
        let mut rician_window = 1usize;
        let mut rician_inner = String::from("wavelet");
        let (mut mask_kind, mut mask_ratio, mut mask_seed) = (MaskKind::Radial, 0.3f64, None);
        let mut denoiser = String::from("wavelet");
        let mut dp = DenoiserParams::default();
        let (mut fixed, mut schedule) = (None, None);
        let mut variant = Variant::Full;
        let mut seed = 0u64;
        let (mut phantom, mut size, mut noise_sigma) = (PhantomKind::SheppLogan, 64, 0.0f64);
        let mut last_line = 0;

        for (line, key, value) in pairs {
            last_line = line;
            match key {
                "lambda" => b.lambda = Some(parse(line, key, value)?),
                "p" => b.p = Some(parse(line, key, value)?),
                "rho" => b.rho = Some(parse(line, key, value)?),
                "momentum_rho" => b.momentum_rho = Some(parse(line, key, value)?),
                "eta1" => b.eta1 = Some(parse(line, key, value)?),
                "eta2" => b.eta2 = Some(parse(line, key, value)?),
                "lipschitz" => b.lipschitz = Some(parse(line, key, value)?),
                "epsilon0" => b.epsilon0 = Some(parse(line, key, value)?),
                "epsilon_decay" => b.epsilon_decay = Some(parse(line, key, value)?),
                "tol" => b.tol = Some(parse(line, key, value)?),
                "max_iters" => b.max_iters = Some(parse(line, key, value)?),
                "wavelet" => family = parse_core::<WaveletFamily>(line, value)?,
                "wavelet_levels" => levels = parse(line, key, value)?,
                "check_rule" => b.check_rule = Some(parse_core::<CheckRule>(line, value)?),
                "enforce_descent" => b.enforce_descent = Some(parse(line, key, value)?),
                "rician_rho1" => rician.rho1 = parse(line, key, value)?,
                "rician_lambda1" => rician.lambda1 = parse(line, key, value)?,
                "rician_lambda2" => rician.lambda2 = parse(line, key, value)?,
                "rician_outer_iters" => rician.outer_iters = parse(line, key, value)?,
                "rician_sigma" => rician.sigma = parse(line, key, value)?,
                "rician_intensity_max" => rician.intensity_max = parse(line, key, value)?,
                "rician_window" => rician_window = parse(line, key, value)?,
                "rician_inner" => {
                    if value != "wavelet" && value != "identity" {
                        return Err(CliError::Config {
                            line,
                            reason: format!("rician_inner must be `wavelet` or `identity`, got `{value}`"),
                        });
                    }
                    rician_inner = value.to_string();
                }
                "mask" => mask_kind = parse_core(line, value)?,
                "mask_ratio" => mask_ratio = parse(line, key, value)?,
                "mask_seed" => mask_seed = Some(parse(line, key, value)?),
                "denoiser" => denoiser = value.to_string(),
                "denoiser_sigma" => dp.gaussian_sigma = parse(line, key, value)?,
                "denoiser_threshold" => fixed = Some(parse::<f64>(line, key, value)?),
                "denoiser_schedule" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    let [start, end] = parts[..] else {
                        return Err(CliError::Config {
                            line,
                            reason: format!("denoiser_schedule expects `start,end`, got `{value}`"),
                        });
                    };
                    schedule = Some(NoiseSchedule {
                        start: parse(line, key, start)?,
                        end: parse(line, key, end)?,
                    });
                }
                "variant" => variant = parse_core(line, value)?,
                "seed" => seed = parse(line, key, value)?,
                "phantom" => phantom = parse_core(line, value)?,
                "size" => size = parse(line, key, value)?,
                "noise_sigma" => noise_sigma = parse(line, key, value)?,
                other => {
                    return Err(CliError::Config {
                        line,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let invalid = |e: csmri_core::Error| CliError::Config {
            line: last_line,
            reason: e.to_string(),
        };
        let wavelet = WaveletSpec::new(family, levels);
        b.wavelet = Some(wavelet);
        let solver = b.build().map_err(invalid)?;
        rician.inner = solver.clone();
        rician.validate().map_err(invalid)?;
        dp.wavelet = wavelet;
        dp.seed = seed;
        dp.threshold = match (fixed, schedule) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config {
                    line: last_line,
                    reason: "denoiser_threshold and denoiser_schedule are mutually exclusive".into(),
                })
            }
            (Some(t), None) => Threshold::Fixed(t),
            (None, Some(s)) => Threshold::Scheduled(s),
            (None, None) => dp.threshold,
        };
        // constructing the denoiser validates its parameters
        csmri_core::denoise::denoiser_by_name(&denoiser, &dp).map_err(invalid)?;
        if rician_window.is_multiple_of(2) {
            return Err(CliError::Config {
                line: last_line,
                reason: format!("rician_window must be odd, got {rician_window}"),
            });
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(CliError::Config {
                line: last_line,
                reason: format!("noise_sigma must be >= 0, got {noise_sigma}"),
            });
        }
        if !(mask_ratio > 0.0 && mask_ratio <= 1.0) {
            return Err(invalid(csmri_core::Error::RatioOutOfRange(mask_ratio)));
        }
        Ok(Self {
            solver,
            rician,
            rician_window,
            rician_inner,
            mask_kind,
            mask_ratio,
            mask_seed: mask_seed.unwrap_or(seed),
            denoiser,
            denoiser_params: dp,
            variant,
            seed,
            phantom,
            size,
            noise_sigma,
        })
    }
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config {
                    line,
                    reason: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config {
                    line,
                    reason: format!("unknown key `{key}`"),
                });
            }
            if !seen.insert(key) {
                return Err(CliError::Config {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            pairs.push((line, key, value));
        }
        Self::from_pairs(pairs.into_iter())
    }
}

/// Writes every key, so the output parses back to an equal config.
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.solver;
        let r = &self.rician;
        let dp = &self.denoiser_params;
        writeln!(f, "lambda = {:?}", s.lambda())?;
        writeln!(f, "p = {:?}", s.p())?;
        writeln!(f, "rho = {:?}", s.rho())?;
        writeln!(f, "momentum_rho = {:?}", s.momentum_rho())?;
        writeln!(f, "eta1 = {:?}", s.eta1())?;
        writeln!(f, "eta2 = {:?}", s.eta2())?;
        writeln!(f, "lipschitz = {:?}", s.lipschitz())?;
        writeln!(f, "epsilon0 = {:?}", s.epsilon0())?;
        writeln!(f, "epsilon_decay = {:?}", s.epsilon_decay())?;
        writeln!(f, "tol = {:?}", s.tol())?;
        writeln!(f, "max_iters = {}", s.max_iters())?;
        writeln!(f, "wavelet = {}", s.wavelet().family)?;
        writeln!(f, "wavelet_levels = {}", s.wavelet().levels)?;
        writeln!(f, "check_rule = {}", s.check_rule())?;
        writeln!(f, "enforce_descent = {}", s.enforce_descent())?;
        writeln!(f, "rician_rho1 = {:?}", r.rho1)?;
        writeln!(f, "rician_lambda1 = {:?}", r.lambda1)?;
        writeln!(f, "rician_lambda2 = {:?}", r.lambda2)?;
        writeln!(f, "rician_outer_iters = {}", r.outer_iters)?;
        writeln!(f, "rician_sigma = {:?}", r.sigma)?;
        writeln!(f, "rician_intensity_max = {:?}", r.intensity_max)?;
        writeln!(f, "rician_window = {}", self.rician_window)?;
        writeln!(f, "rician_inner = {}", self.rician_inner)?;
        writeln!(f, "mask = {}", self.mask_kind)?;
        writeln!(f, "mask_ratio = {:?}", self.mask_ratio)?;
        writeln!(f, "mask_seed = {}", self.mask_seed)?;
        writeln!(f, "denoiser = {}", self.denoiser)?;
        writeln!(f, "denoiser_sigma = {:?}", dp.gaussian_sigma)?;
        match dp.threshold {
            Threshold::Fixed(t) => writeln!(f, "denoiser_threshold = {t:?}")?,
            Threshold::Scheduled(s) => writeln!(f, "denoiser_schedule = {:?},{:?}", s.start, s.end)?,
        }
        writeln!(f, "variant = {}", self.variant)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "phantom = {}", self.phantom)?;
        writeln!(f, "size = {}", self.size)?;
        writeln!(f, "noise_sigma = {:?}", self.noise_sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: ExperimentConfig = "# nothing\n\n".parse().unwrap();
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.denoiser, "wavelet");
        assert_eq!(c.variant, Variant::Full);
    }

    #[test]
    fn values_reach_their_owners() {
        let c: ExperimentConfig = "lambda = 0.05  # stronger\nmax_iters=12\nwavelet = haar\nwavelet_levels = 4\n\
             mask = gaussian\nseed = 9\ndenoiser = gaussian\ndenoiser_sigma = 1.5\nvariant = FNP\n\
             denoiser_schedule = 0.2, 0.01\nrician_window = 3\n"
            .parse()
            .unwrap();
        assert_eq!(c.solver.lambda(), 0.05);
        assert_eq!(c.solver.max_iters(), 12);
        assert_eq!(c.solver.wavelet(), WaveletSpec::new(WaveletFamily::Haar, 4));
        assert_eq!(c.rician.inner, c.solver);
        assert_eq!(c.mask_kind, MaskKind::Gaussian);
        assert_eq!(c.mask_seed, 9);
        assert_eq!(c.denoiser_params.seed, 9);
        assert_eq!(c.denoiser_params.gaussian_sigma, 1.5);
        assert_eq!(c.variant, Variant::FNP);
        assert_eq!(
            c.denoiser_params.threshold,
            Threshold::Scheduled(NoiseSchedule { start: 0.2, end: 0.01 })
        );
        assert_eq!(c.rician_window, 3);
    }

    #[test]
    fn display_round_trips() {
        let c: ExperimentConfig = "lambda = 0.013\neta2 = 0.7\ndenoiser = median\nsize = 32\nnoise_sigma = 0.05\n"
            .parse()
            .unwrap();
        let back: ExperimentConfig = c.to_string().parse().unwrap();
        assert_eq!(back, c);
    }

    fn line_of(text: &str) -> Option<usize> {
        match text.parse::<ExperimentConfig>() {
            Err(CliError::Config { line, .. }) => Some(line),
            _ => None,
        }
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(line_of("lambda = 0.1\nlamda = 0.1\n"), Some(2));
        assert_eq!(line_of("p = 0.5\np = 0.6\n"), Some(2));
        assert_eq!(line_of("max_iters\n"), Some(1));
        assert_eq!(line_of("max_iters = lots\n"), Some(1));
        assert_eq!(line_of("wavelet = sym8\n"), Some(1));
        assert!(line_of("p = 1.5\n").is_some());
        assert!(line_of("lambda = -1\n").is_some());
        assert!(line_of("denoiser = bm3d\n").is_some());
        assert!(line_of("rician_window = 4\n").is_some());
        assert!(line_of("mask_ratio = 0\n").is_some());
        assert!(line_of("denoiser_threshold = 0.1\ndenoiser_schedule = 0.1,0.01\n").is_some());
    }
}
