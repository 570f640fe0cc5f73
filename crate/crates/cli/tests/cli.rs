use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use facinv_core::generator::{binarize, load_generator};
use facinv_core::grid::{save_facies, save_real};
use facinv_core::seismic::ForwardModel;
use facinv_core::{FaciesGrid, GridDims, GridFormat, LatentVector, WellSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weights() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/toy_generator.facgen")
}

fn facinv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facinv")).args(args).current_dir(cwd).env_remove("FACINV_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let w = weights();
    let w = w.to_str().unwrap();
    for out in ["a", "b"] {
        let o = facinv(&["generate", "--weights", w, "--count", "1", "--seed", "7", "--output-dir", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/realization_0000.u8")).unwrap();
    assert_eq!(a.len(), 32 * 32 * 16);
    assert_eq!(a, fs::read(dir.path().join("b/realization_0000.u8")).unwrap());

    let o = facinv(&["generate", "--weights", w, "--count", "2", "--seed", "8", "--output-dir", "c"], dir.path());
    assert!(o.status.success());
    assert_ne!(a, fs::read(dir.path().join("c/realization_0000.u8")).unwrap());
}

#[test]
fn unknown_flag_is_a_usage_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let w = weights();
    let o = facinv(&["generate", "--weights", w.to_str().unwrap(), "--output-dir", "out", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn missing_input_and_bad_config_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = facinv(&["forward", "--input", "absent.u8", "--dims", "2,2,2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.u8"));

    fs::write(dir.path().join("bad.json"), "{\"weights\": ").unwrap();
    let o = facinv(&["invert", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim().lines().count(), 1);

    fs::write(dir.path().join("typo.json"), "{\"count\": 1, \"cuont\": 2}").unwrap();
    let o = facinv(&["generate", "--config", "typo.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(entries(dir.path()), vec!["bad.json", "typo.json"]);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({"weights": weights(), "count": 3, "seed": 1, "output_dir": "from_config"});
    fs::write(dir.path().join("gen.json"), config.to_string()).unwrap();
    let o = facinv(&["generate", "--config", "gen.json", "--count", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(entries(&dir.path().join("from_config")), vec!["realization_0000.u8"]);
}

#[test]
fn assess_self_comparison_passes() {
    let dir = tempfile::tempdir().unwrap();
    let dims = GridDims::new(12, 10, 6).unwrap();
    let ti = FaciesGrid::from_fn(dims, |i, j, k| ((i / 3 + j / 4 + k) % 2) as u8).unwrap();
    save_facies(&ti, dir.path().join("ti.u8"), GridFormat::RawU8).unwrap();
    let o = facinv(
        &[
            "assess",
            "--ti",
            "ti.u8",
            "--ti-dims",
            "12,10,6",
            "--realizations",
            "ti.u8",
            "--realization-dims",
            "12,10,6",
            "--patch-count",
            "4",
            "--max-lag",
            "5,5,3",
            "--strict",
            "--output-dir",
            "qa",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("qa/qa_report.txt")).unwrap();
    assert!(report.trim_end().ends_with("pass = true"));
    assert!(report.contains("variogram.max_abs_deviation = 0.000000"));
    assert!(report.contains("connectivity.max_abs_deviation = 0.000000"));
    let text = fs::read_to_string(dir.path().join("qa/variogram_facies1_x_reference.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("lag,mean,min,max"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn strict_assess_failure_exits_one_but_keeps_report() {
    let dir = tempfile::tempdir().unwrap();
    let dims = GridDims::new(12, 10, 6).unwrap();
    let ti = FaciesGrid::from_fn(dims, |i, _, _| (i % 2) as u8).unwrap();
    let flat = FaciesGrid::filled(dims, 1).unwrap();
    save_facies(&ti, dir.path().join("ti.u8"), GridFormat::RawU8).unwrap();
    save_facies(&flat, dir.path().join("flat.u8"), GridFormat::RawU8).unwrap();
    let args = [
        "assess",
        "--ti",
        "ti.u8",
        "--ti-dims",
        "12,10,6",
        "--realizations",
        "flat.u8",
        "--realization-dims",
        "12,10,6",
        "--patch-count",
        "2",
        "--output-dir",
    ];
    let mut strict = args.to_vec();
    strict.extend(["strict_out", "--strict"]);
    let o = facinv(&strict, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("strict_out/qa_report.txt").exists());
    let mut lax = args.to_vec();
    lax.push("lax_out");
    assert!(facinv(&lax, dir.path()).status.success());
}

#[test]
fn stats_without_curves_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = facinv(&["stats", "--output-dir", "s"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("s").exists());
}

#[test]
fn stats_writes_curves_and_proportions() {
    let dir = tempfile::tempdir().unwrap();
    let g = FaciesGrid::from_fn(GridDims::new(6, 5, 4).unwrap(), |i, j, _| ((i + j) % 3 == 0) as u8).unwrap();
    save_facies(&g, dir.path().join("g.gslib"), GridFormat::GslibAscii).unwrap();
    let o = facinv(
        &[
            "stats",
            "--inputs",
            "g.gslib",
            "--dims",
            "6x5x4",
            "--format",
            "gslib_ascii",
            "--neighborhood",
            "26",
            "--output-dir",
            "s",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let files = entries(&dir.path().join("s"));
    // 12 curves, 12 envelopes, proportions
    assert_eq!(files.len(), 25);
    let props = fs::read_to_string(dir.path().join("s/proportions.csv")).unwrap();
    assert_eq!(props.lines().count(), 3);
    // lags are clamped to the extent
    let z = fs::read_to_string(dir.path().join("s/grid000_variogram_facies1_z.csv")).unwrap();
    assert_eq!(z.lines().count(), 1 + 4);
}

#[test]
fn forward_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = FaciesGrid::from_fn(GridDims::new(3, 2, 20).unwrap(), |_, _, k| (k >= 10) as u8).unwrap();
    save_facies(&g, dir.path().join("g.u8"), GridFormat::RawU8).unwrap();
    let o = facinv(&["forward", "--input", "g.u8", "--dims", "3,2,20", "--output-dir", "f"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(entries(&dir.path().join("f")), vec!["impedance.f32", "seismic.f32", "wavelet.csv"]);
    assert_eq!(fs::metadata(dir.path().join("f/seismic.f32")).unwrap().len(), 3 * 2 * 20 * 4);
    let o =
        facinv(&["forward", "--input", "g.u8", "--dims", "3,2,20", "--output-format", "raw_u8", "--output-dir", "h"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("h").exists());
}

fn invert_fixture(dir: &Path, iterations: usize) {
    let net = load_generator(weights()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let truth = binarize(&net.generate(&LatentVector::sample_uniform(net.input_shape, &mut rng)).unwrap(), 0.0);
    let seismic = ForwardModel::standard(16).unwrap().seismic(&truth).unwrap();
    save_real(&seismic, dir.join("observed.f32"), GridFormat::RawF32).unwrap();
    fs::write(dir.join("wells.txt"), WellSet::from_columns(&truth, &[(4, 4), (28, 20)]).unwrap().to_text()).unwrap();
    let config = serde_json::json!({
        "weights": weights(),
        "observed": "observed.f32",
        "dims": [32, 32, 16],
        "wells": "wells.txt",
        "iterations": iterations,
        "chains": 2,
        "seed": 1,
        "output_dir": "inv"
    });
    fs::write(dir.join("invert.json"), config.to_string()).unwrap();
}

#[test]
fn invert_outputs_and_trace_rows() {
    let dir = tempfile::tempdir().unwrap();
    invert_fixture(dir.path(), 40);
    let o = facinv(&["invert", "--config", "invert.json", "--iterations", "25"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("inv");
    assert_eq!(
        entries(&out),
        vec![
            "chain_00_map.u8",
            "chain_00_probability.f32",
            "chain_00_trace.csv",
            "chain_01_map.u8",
            "chain_01_probability.f32",
            "chain_01_trace.csv",
            "config.json",
            "map.u8",
            "posterior_probability.f32",
            "posterior_sd.f32",
            "posterior_variance.f32",
            "summary.txt",
        ]
    );
    for c in 0..2 {
        let trace = fs::read_to_string(out.join(format!("chain_{c:02}_trace.csv"))).unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some("iteration,log_posterior,best_log_posterior,acceptance_rate,misfit_sd"));
        assert_eq!(lines.count(), 25 + 1);
    }
    let p = fs::read(out.join("posterior_probability.f32")).unwrap();
    assert_eq!(p.len(), 32 * 32 * 16 * 4);
    let saved: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(saved["iterations"], 25);
}

#[test]
fn invert_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    invert_fixture(dir.path(), 60);
    for (threads, out) in [("1", "one"), ("2", "two")] {
        let o = facinv(&["--threads", threads, "invert", "--config", "invert.json", "--output-dir", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names = entries(&dir.path().join("one"));
    assert_eq!(names, entries(&dir.path().join("two")));
    for name in names.iter().filter(|n| *n != "config.json") {
        assert_eq!(
            fs::read(dir.path().join("one").join(name)).unwrap(),
            fs::read(dir.path().join("two").join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn threads_env_fallback_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let w = weights();
    let o = Command::new(env!("CARGO_BIN_EXE_facinv"))
        .args(["generate", "--weights", w.to_str().unwrap(), "--output-dir", "g"])
        .current_dir(dir.path())
        .env("FACINV_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("g").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_facinv"))
        .args(["generate", "--weights", w.to_str().unwrap(), "--output-dir", "g"])
        .current_dir(dir.path())
        .env("FACINV_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}
