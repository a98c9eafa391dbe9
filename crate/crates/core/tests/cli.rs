use std::path::Path;
use std::process::{Command, Output};

use tvdd::harness::experiment::{bundled_reference, prepare, run, ExperimentConfig, RunStatus, Task};
use tvdd::harness::io::{load_image, load_mask, quantize, save_image, save_mask, save_pgm, PgmEncoding};
use tvdd::harness::metrics::{format_psnr, psnr};
use tvdd::harness::noise::{add_gaussian, add_salt_pepper};
use tvdd::harness::synthetic::{bundled_sample, text_mask};
use tvdd::prelude::*;

fn tvdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvdd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["iter", "energy", "rel_gap", "psnr"]);
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn bundled_sample_file_matches_generator() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample64.pgm");
    assert_eq!(load_image(file).unwrap(), bundled_sample());
}

#[test]
fn pgm_and_png_round_trips_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let shape = GridShape::new(7, 9).unwrap();
    let u = ImageField::from_fn(shape, |i, j| ((i * 37 + j * 101) % 256) as f64 / 255.0);
    for (name, enc) in [("a.pgm", Some(PgmEncoding::Ascii)), ("b.pgm", Some(PgmEncoding::Binary)), ("c.png", None)] {
        let path = dir.path().join(name);
        match enc {
            Some(e) => save_pgm(&u, &path, e).unwrap(),
            None => save_image(&u, &path).unwrap(),
        }
        let back = load_image(&path).unwrap();
        assert_eq!(quantize(&back), quantize(&u));
        assert_eq!(back, u);
    }
}

#[test]
fn zero_image_loads_as_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.pgm");
    std::fs::write(&path, "P2\n3 2\n255\n0 0 0\n0 0 0\n").unwrap();
    assert_eq!(load_image(&path).unwrap(), ImageField::zeros(GridShape::new(2, 3).unwrap()));
}

#[test]
fn sixteen_bit_images_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deep.pgm");
    let mut bytes = b"P5\n2 1\n65535\n".to_vec();
    bytes.extend_from_slice(&[0x12, 0x34, 0xff, 0xff]);
    std::fs::write(&path, bytes).unwrap();
    let err = load_image(&path).unwrap_err().to_string();
    assert!(err.contains("16-bit"), "{err}");
}

#[test]
fn save_clamps_and_rounds_half_up() {
    let u = ImageField::new(GridShape::new(1, 4).unwrap(), vec![-0.2, 1.7, 0.5 / 255.0, 127.5 / 255.0]).unwrap();
    assert_eq!(quantize(&u), vec![0, 255, 1, 128]);
}

#[test]
fn masks_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mask = text_mask(GridShape::new(20, 30).unwrap(), 3);
    assert!(mask.count_missing() > 0);
    let path = dir.path().join("mask.png");
    save_mask(&mask, &path).unwrap();
    assert_eq!(load_mask(&path).unwrap(), mask);
}

#[test]
fn noise_counts_and_determinism() {
    let u = ImageField::constant(GridShape::new(10, 10).unwrap(), 0.5);
    let noisy = add_salt_pepper(&u, 0.2, 9).unwrap();
    let changed: Vec<f64> = noisy.values().iter().copied().filter(|&x| x != 0.5).collect();
    assert_eq!(changed.len(), 20);
    assert_eq!(changed.iter().filter(|&&x| x == 1.0).count(), 10);
    assert_eq!(noisy, add_salt_pepper(&u, 0.2, 9).unwrap());
    assert_eq!(add_salt_pepper(&u, 0.0, 9).unwrap(), u);

    let g = add_gaussian(&u, 0.25, 0.0, 1).unwrap();
    assert!(g.values().iter().all(|&x| x == 0.75));
    assert_eq!(add_gaussian(&u, 0.0, 0.05, 4).unwrap(), add_gaussian(&u, 0.0, 0.05, 4).unwrap());
}

#[test]
fn psnr_values() {
    let a = ImageField::constant(GridShape::new(4, 4).unwrap(), 0.3);
    assert_eq!(format_psnr(psnr(&a, &a)), "inf");
    let b = a.map(|x| x + 0.1);
    assert!((psnr(&b, &a) - 20.0).abs() < 1e-9);
}

#[test]
fn denoise_l1_reaches_bundled_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("restored.pgm");
    let o = tvdd(&[
        "denoise-l1",
        "--partition",
        "2x2",
        "--alpha",
        "1",
        "--reference-energy",
        "bundled",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.with_extension("json")).unwrap()).unwrap();
    for field in ["task", "seed", "partition", "outer_iters", "max_inner_iters", "final_energy", "psnr", "wall_time_sec"] {
        assert!(report.get(field).is_some(), "missing {field}");
    }
    assert_eq!(report["task"], "denoise-l1");
    assert_eq!(report["partition"], "2x2");
    let reference = bundled_reference("denoise-l1/alpha=1/salt-pepper=0.2/seed=0").unwrap().unwrap();
    let energy = report["final_energy"].as_f64().unwrap();
    assert!((energy - reference) / reference < 1e-4);

    let rows = read_rows(&out.with_extension("csv"));
    assert_eq!(rows.len() as u64, report["outer_iters"].as_u64().unwrap() + 1);
    assert_eq!(&rows[0][0], "0");
    assert!(load_image(&out).is_ok());
}

#[test]
fn invalid_mask_path_exits_with_one() {
    let o = tvdd(&["inpaint-l2", "--mask", "/nonexistent/mask.pgm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn bad_flags_are_rejected() {
    assert_ne!(tvdd(&["denoise-l2", "--partition", "two"]).status.code(), Some(0));
    assert_eq!(tvdd(&["denoise-l2", "--L", "1.5"]).status.code(), Some(1));
    assert_eq!(tvdd(&["segment", "--reference-energy", "abc"]).status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("trace.csv");
    let o = tvdd(&["denoise-l2", "--max-outer", "3", "--outer-tol", "1e-12", "--log", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read_rows(&log).len(), 4);
}

#[cfg(feature = "oracle")]
#[test]
fn verify_passes() {
    let o = tvdd(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 9);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn bench_sweeps_partitions() {
    let mut config = ExperimentConfig::new(Task::Bench);
    config.max_outer = 20;
    let outcome = run(&config).unwrap();
    let parts: Vec<&str> = outcome.reports.iter().map(|r| r.partition.as_str()).collect();
    assert_eq!(parts, ["1x1", "2x2", "4x4"]);
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4"].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.pgm"));
        let o = tvdd(&["inpaint-l1", "--partition", "3x2", "--threads", threads, "--seed", "5", "--output", out.to_str().unwrap()]);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(2));
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn inpainting_uses_a_mask_and_baseline_runs() {
    let mut config = ExperimentConfig::new(Task::InpaintL2);
    let problem = prepare(&config).unwrap();
    assert!(problem.mask.as_ref().unwrap().count_missing() > 0);
    config.baseline = true;
    config.max_outer = 50;
    let outcome = run(&config).unwrap();
    assert_eq!(outcome.reports[0].partition, "full");
    assert_eq!(outcome.status, RunStatus::BudgetExhausted);
}
