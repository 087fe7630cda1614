use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use csmri::experiment::load_image;
use csmri::{Payload, RawImageFile};
use csmri_core::metrics::psnr;
use csmri_core::phantom::{phantom, PhantomKind};
use proptest::prelude::*;

fn csmri(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_csmri")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, stdout, stderr) = csmri(args);
    assert_eq!(code, 0, "{args:?}: {stderr}");
    stdout
}

struct Work(tempfile::TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.s(name)
    }
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn missing_y_is_a_usage_error() {
    let (code, _, stderr) = csmri(&[
        "recon", "--mask", "m", "--config", "c", "--denoiser", "identity", "--out", "o", "--trace", "t",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("--y"), "{stderr}");
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn help_exits_zero_and_unknown_subcommand_fails() {
    assert_eq!(csmri(&["--help"]).0, 0);
    assert_eq!(csmri(&["reconstruct"]).0, 1);
}

#[test]
fn noiseless_full_mask_reconstruction() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    ok(&["mask", "--kind", "cartesian", "--ratio", "1", "--size", "32", "--out", &w.s("m.rimg")]);
    ok(&["corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m.rimg"), "--out", &w.s("y.rimg")]);
    let cfg = w.write("c.cfg", "lambda = 1e-5\n");
    let (code, _, stderr) = csmri(&[
        "recon", "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &cfg,
        "--denoiser", "identity", "--out", &w.s("r.rimg"), "--trace", &w.s("t.csv"),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let rec = load_image(&w.path("r.rimg")).unwrap();
    let p = psnr(&phantom(32, PhantomKind::SheppLogan).unwrap(), &rec, None).unwrap();
    assert!(p.db >= 60.0, "{}", p.db);
    assert!(RawImageFile::read(&w.path("r.rimg")).unwrap().is_complex());
}

#[test]
fn budget_exhaustion_exits_two_with_full_trace() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    ok(&["mask", "--ratio", "0.3", "--size", "32", "--seed", "3", "--out", &w.s("m.rimg")]);
    ok(&["corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m.rimg"), "--out", &w.s("y.rimg")]);
    let cfg = w.write("c.cfg", "max_iters = 5\ntol = 1e-12\n");
    for variant in ["P", "FN", "FNP", "full"] {
        let (code, _, stderr) = csmri(&[
            "recon", "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &cfg,
            "--denoiser", "gaussian", "--variant", variant, "--out", &w.s("r.rimg"), "--trace", &w.s("t.csv"),
        ]);
        assert_eq!(code, 2, "{variant}: {stderr}");
        assert_eq!(data_rows(&w.path("t.csv")), 6, "{variant}");
    }
}

#[test]
fn trace_rows_match_iterations_on_convergence() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    ok(&["mask", "--ratio", "0.5", "--size", "32", "--out", &w.s("m.rimg")]);
    ok(&["corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m.rimg"), "--out", &w.s("y.rimg")]);
    let cfg = w.write("c.cfg", "tol = 1e-2\nmax_iters = 200\n");
    let (code, _, stderr) = csmri(&[
        "recon", "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &cfg,
        "--denoiser", "identity", "--out", &w.s("r.rimg"), "--trace", &w.s("t.csv"),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let text = fs::read_to_string(w.path("t.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let last_k: usize = rows.last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(rows.len(), last_k + 1);
    assert!(last_k < 200);
}

#[test]
fn bad_inputs_exit_one() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    ok(&["mask", "--ratio", "0.3", "--size", "64", "--out", &w.s("m64.rimg")]);
    let (code, _, stderr) = csmri(&["corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m64.rimg"), "--out", &w.s("y")]);
    assert_eq!(code, 1);
    assert!(stderr.contains("dimension mismatch"), "{stderr}");
    assert_eq!(csmri(&["phantom", "--size", "48", "--out", &w.s("p")]).0, 1);
    assert_eq!(csmri(&["mask", "--ratio", "1.5", "--size", "32", "--out", &w.s("p")]).0, 1);
    let cfg = w.write("bad.cfg", "lambda = 1\nbogus = 2\n");
    ok(&["mask", "--ratio", "0.3", "--size", "32", "--out", &w.s("m.rimg")]);
    ok(&["corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m.rimg"), "--out", &w.s("y.rimg")]);
    let (code, _, stderr) = csmri(&[
        "recon", "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &cfg,
        "--denoiser", "identity", "--out", &w.s("r"), "--trace", &w.s("t"),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 2") && stderr.contains("bogus"), "{stderr}");
    let good = w.write("good.cfg", "");
    let (code, _, stderr) = csmri(&[
        "recon", "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &good,
        "--denoiser", "bm3d", "--out", &w.s("r"), "--trace", &w.s("t"),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("bm3d"), "{stderr}");
    fs::write(w.path("junk.rimg"), b"RIMX").unwrap();
    assert_eq!(csmri(&["metrics", "--reference", &w.s("x.rimg"), "--image", &w.s("junk.rimg")]).0, 1);
}

#[test]
fn metrics_output() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    let out = ok(&["metrics", "--reference", &w.s("x.rimg"), "--image", &w.s("x.rimg")]);
    assert!(out.contains("mse=0.0000000000000000e0"), "{out}");
    assert!(out.contains("psnr_capped=true"), "{out}");
    assert!(out.contains("rlne=0.0000000000000000e0"), "{out}");
}

#[test]
fn pgm_import_matches_rimg() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--kind", "blocks", "--out", &w.s("x.pgm")]);
    ok(&["phantom", "--size", "32", "--kind", "blocks", "--out", &w.s("x.rimg")]);
    let out = ok(&["metrics", "--reference", &w.s("x.rimg"), "--image", &w.s("x.pgm")]);
    let psnr: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("psnr_db="))
        .unwrap()
        .parse()
        .unwrap();
    // 16-bit quantization
    assert!(psnr > 90.0, "{psnr}");
}

#[test]
fn rician_commands() {
    let w = Work::new();
    ok(&["phantom", "--size", "32", "--out", &w.s("x.rimg")]);
    ok(&["rician-sim", "--image", &w.s("x.rimg"), "--sigma", "0.05", "--seed", "4", "--out", &w.s("n.rimg")]);
    let noisy = load_image(&w.path("n.rimg")).unwrap();
    assert!(noisy.min() >= 0.0);
    ok(&["mask", "--ratio", "0.3", "--size", "32", "--out", &w.s("m.rimg")]);
    ok(&[
        "corrupt", "--image", &w.s("x.rimg"), "--mask", &w.s("m.rimg"), "--rician-sigma", "0.05",
        "--seed", "4", "--out", &w.s("y.rimg"),
    ]);
    let cfg = w.write("c.cfg", "max_iters = 10\nrician_outer_iters = 2\n");
    let args = |sub: &str| -> Vec<String> {
        let mut a: Vec<String> = [sub, "--y", &w.s("y.rimg"), "--mask", &w.s("m.rimg"), "--config", &cfg,
            "--denoiser", "wavelet", "--out", &w.s(&format!("{sub}.rimg")), "--trace", &w.s(&format!("{sub}.csv"))]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if sub == "recon" {
            a.extend(["--rician-sigma".into(), "0.05".into()]);
        } else {
            a.extend(["--sigma".into(), "0.05".into()]);
        }
        a
    };
    let a1 = args("recon");
    let a2 = args("rician-recon");
    let (c1, _, e1) = csmri(&a1.iter().map(String::as_str).collect::<Vec<_>>());
    let (c2, _, e2) = csmri(&a2.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(c1 == 0 || c1 == 2, "{e1}");
    assert_eq!(c1, c2, "{e2}");
    assert_eq!(fs::read(w.path("recon.rimg")).unwrap(), fs::read(w.path("rician-recon.rimg")).unwrap());
    assert_eq!(fs::read(w.path("recon.csv")).unwrap(), fs::read(w.path("rician-recon.csv")).unwrap());
}

#[test]
fn batch_is_independent_of_thread_count() {
    let w = Work::new();
    let mut cfgs = Vec::new();
    for (i, body) in [
        "size = 32\nmask = cartesian\ndenoiser = gaussian\nmax_iters = 8\n",
        "size = 32\nmask = gaussian\ndenoiser = random\nseed = 5\nmax_iters = 8\n",
        "size = 32\nnoise_sigma = 0.03\nmax_iters = 5\nrician_outer_iters = 2\n",
        "size = 64\nvariant = FNP\ndenoiser = median\nmax_iters = 4\n",
    ]
    .iter()
    .enumerate()
    {
        cfgs.push(w.write(&format!("e{i}.cfg"), body));
    }
    let run = |dir: &str, threads: &str| {
        let mut a = vec!["batch", "--out-dir", dir, "--threads", threads, "--config"];
        a.extend(cfgs.iter().map(String::as_str));
        ok(&a)
    };
    let s1 = run(&w.s("one"), "1");
    let s4 = run(&w.s("four"), "4");
    assert_eq!(s1, s4);
    assert_eq!(s1.lines().count(), 5);
    assert!(s1.lines().nth(1).unwrap().starts_with("e0,8,"));
    for name in ["summary.csv", "e0.rimg", "e1.trace.csv", "e2.rimg", "e3.trace.csv"] {
        assert_eq!(
            fs::read(w.path("one").join(name)).unwrap(),
            fs::read(w.path("four").join(name)).unwrap(),
            "{name}"
        );
    }
    let dup = w.write("sub_e0.cfg", "");
    fs::create_dir(w.path("d")).unwrap();
    let moved = w.path("d").join("e0.cfg");
    fs::copy(&dup, &moved).unwrap();
    let (code, _, _) = csmri(&["batch", "--out-dir", &w.s("x"), "--config", &cfgs[0], moved.to_str().unwrap()]);
    assert_eq!(code, 1);
}

fn payload() -> impl Strategy<Value = RawImageFile> {
    (1u32..6, 1u32..6, any::<bool>()).prop_flat_map(|(h, w, complex)| {
        let n = (h * w) as usize;
        let bits = prop::collection::vec(any::<u32>(), if complex { 2 * n } else { n });
        bits.prop_map(move |b| {
            // arbitrary bit patterns, NaN payloads included
            let f: Vec<f32> = b.into_iter().map(f32::from_bits).collect();
            let payload = if complex {
                Payload::Complex(f.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
            } else {
                Payload::Real(f)
            };
            RawImageFile { height: h, width: w, payload }
        })
    })
}

proptest! {
    #[test]
    fn rimg_round_trip_is_bit_identical(file in payload()) {
        let bytes = file.to_bytes();
        let back = RawImageFile::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}
