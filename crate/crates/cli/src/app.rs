//! Argument parsing and subcommand dispatch.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use csmri_core::masks::{make_mask, MaskKind};
use csmri_core::metrics::{mse, psnr, rlne};
use csmri_core::phantom::{phantom, PhantomKind};
use csmri_core::rician::{add_rician, RicianParams};
use csmri_core::solver::Variant;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{self, Reconstruction};
use crate::rimg::RawImageFile;

/// Exit status when the iteration budget ran out before the tolerance was met.
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "csmri", version, about = "Compressed-sensing MRI reconstruction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an analytic test image.
    Phantom {
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value = "shepp-logan")]
        kind: PhantomKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a sampling mask as a 0/1 real image.
    Mask {
        #[arg(long, default_value = "radial")]
        kind: MaskKind,
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        size: usize,
        /// Defaults to `size`.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Undersampled k-space of an image, optionally with Rician noise.
    Corrupt {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rician_sigma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reconstruct from k-space. Exits 2 if the iteration budget ran out.
    Recon {
        #[command(flatten)]
        io: ReconIo,
        /// Ignored on the Rician path, which always runs the full loop.
        #[arg(long)]
        variant: Option<Variant>,
        /// Switch to the Rician pipeline at this noise level.
        #[arg(long)]
        rician_sigma: Option<f64>,
    },
    /// Add Rician noise to a magnitude image.
    RicianSim {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rician-aware reconstruction. Exits 2 if the last z-step did not converge.
    RicianRecon {
        #[command(flatten)]
        io: ReconIo,
        #[arg(long)]
        sigma: f64,
    },
    /// Compare an image with a reference.
    Metrics {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Defaults to the reference maximum.
        #[arg(long)]
        peak: Option<f64>,
    },
    /// Run synthetic experiments in parallel, one per config file.
    Batch {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Debug, Args)]
struct ReconIo {
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    denoiser: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: PathBuf,
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn finish(rec: &Reconstruction, io: &ReconIo) -> Result<i32> {
    RawImageFile::from_complex(&rec.image).write(&io.out)?;
    write_text(&io.trace, &rec.trace_csv)?;
    Ok(if rec.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn recon(io: &ReconIo, variant: Option<Variant>, sigma: Option<f64>) -> Result<i32> {
    let mut cfg = ExperimentConfig::read(&io.config)?;
    cfg.denoiser = io.denoiser.clone();
    experiment::build_denoiser(&cfg)?;
    let y = experiment::kspace_from_file(&io.y)?;
    let mask = RawImageFile::read(&io.mask)?.to_mask()?;
    let variant = variant.unwrap_or(cfg.variant);
    let rec = experiment::reconstruct(&y, &mask, &cfg, variant, sigma)?;
    finish(&rec, io)
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Phantom { size, kind, out } => {
            experiment::save_image(&phantom(size, kind)?, &out)?;
        }
        Command::Mask {
            kind,
            ratio,
            size,
            width,
            seed,
            out,
        } => {
            let m = make_mask(kind, size, width.unwrap_or(size), ratio, seed)?;
            RawImageFile::from_mask(&m).write(&out)?;
        }
        Command::Corrupt {
            image,
            mask,
            out,
            rician_sigma,
            seed,
        } => {
            let x = experiment::load_image(&image)?;
            let m = RawImageFile::read(&mask)?.to_mask()?;
            let params = rician_sigma.map(|s| RicianParams::new(s, seed)).transpose()?;
            let y = experiment::corrupt(&x, &m, params)?;
            RawImageFile::from_complex(&y).write(&out)?;
        }
        Command::Recon {
            io,
            variant,
            rician_sigma,
        } => return recon(&io, variant, rician_sigma),
        Command::RicianSim { image, sigma, seed, out } => {
            let x = experiment::load_image(&image)?;
            let noisy = add_rician(&x, RicianParams::new(sigma, seed)?)?;
            experiment::save_image(&noisy, &out)?;
        }
        Command::RicianRecon { io, sigma } => return recon(&io, None, Some(sigma)),
        Command::Metrics { reference, image, peak } => {
            let r = experiment::load_image(&reference)?;
            let x = experiment::load_image(&image)?;
            let p = psnr(&r, &x, peak)?;
            let io_err = |e| CliError::io("<stdout>", e);
            writeln!(stdout, "mse={:.16e}", mse(&r, &x)?).map_err(io_err)?;
            writeln!(stdout, "psnr_db={:.16e}", p.db).map_err(io_err)?;
            writeln!(stdout, "psnr_capped={}", p.capped).map_err(io_err)?;
            writeln!(stdout, "rlne={:.16e}", rlne(&r, &x)?).map_err(io_err)?;
        }
        Command::Batch {
            configs,
            out_dir,
            threads,
        } => return batch(&configs, &out_dir, threads, stdout),
    }
    Ok(0)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into())
}

/// Per config `<stem>.rimg` and `<stem>.trace.csv`, plus `summary.csv` in
/// input order. Results do not depend on the thread count.
fn batch(configs: &[PathBuf], out_dir: &Path, threads: usize, stdout: &mut dyn Write) -> Result<i32> {
    let mut names = HashSet::new();
    for c in configs {
        if !names.insert(stem(c)) {
            return Err(CliError::Usage(format!("duplicate experiment name `{}`", stem(c))));
        }
    }
    let parsed = configs
        .iter()
        .map(|c| ExperimentConfig::read(c))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcomes: Vec<Result<experiment::ExperimentOutcome>> =
        pool.install(|| parsed.par_iter().map(experiment::run_experiment).collect());

    let mut summary = String::from("name,iterations,converged,zero_filled_psnr,psnr,rlne\n");
    for (path, outcome) in configs.iter().zip(outcomes) {
        let name = stem(path);
        let o = outcome?;
        RawImageFile::from_complex(&o.recon.image).write(&out_dir.join(format!("{name}.rimg")))?;
        write_text(&out_dir.join(format!("{name}.trace.csv")), &o.recon.trace_csv)?;
        summary.push_str(&format!(
            "{name},{},{},{:.16e},{:.16e},{:.16e}\n",
            o.recon.iterations_used, o.recon.converged, o.zero_filled.psnr, o.scores.psnr, o.scores.rlne
        ));
    }
    write_text(&out_dir.join("summary.csv"), &summary)?;
    stdout
        .write_all(summary.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(0)
}
