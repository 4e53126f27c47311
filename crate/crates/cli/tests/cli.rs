//! End-to-end runs of the `sawtooth` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sawtooth"));
    c.env_remove("SAWTOOTH_DEVICE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn noiseless_device_file(dir: &Path) -> String {
    let q = r#"{"t1_us": 1e12, "t2_us": 1e12, "readout_p01": 0.0, "readout_p10": 0.0}"#;
    let text = format!(
        r#"{{"name": "clean", "qubits": [{q}, {q}, {q}], "coupling": [[0, 1], [1, 2], [0, 2]],
            "err_1q": 0.0, "err_2q": 0.0, "dur_1q_ns": 35.0, "dur_2q_ns": 300.0, "readout_duration_ns": 0.0}}"#
    );
    let path = dir.join("clean.json");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn default_localize_reports_the_one_step_peak() {
    let o = run(&["localize"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("n=3 L=7 K=1.5"));
    assert!(out.lines().any(|l| l == "1\t0.829455"), "{out}");
}

#[test]
fn zero_steps_keeps_only_the_initial_delta() {
    let dir = TempDir::new().unwrap();
    let o = run(&["localize", "--steps", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("run.json"));
    let steps = v["per_step"].as_array().unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0]["peak"], 1.0);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["params"]["l"], 7);
    let csv = fs::read_to_string(dir.path().join("distributions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
}

#[test]
fn noisy_mode_needs_a_device() {
    let o = run(&["localize", "--mode", "noisy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--device"));
}

#[test]
fn invalid_config_leaves_no_files() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("out");
    let o = run(&["localize", "--m0", "9", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!target.exists());
    let o = run(&[
        "localize",
        "--mode",
        "noisy",
        "--device",
        "nowhere",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!target.exists());
    let o = run(&["localize", "--k", "0.3", "--T", "1", "--K", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_format_writes_single_file() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "localize",
        "--steps",
        "3",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, vec!["run.json".to_string()]);
    let v = read_json(&dir.path().join("run.json"));
    assert_eq!(v["analysis"]["msd"].as_array().unwrap().len(), 4);
    assert!(v["analysis"]["ell"].as_f64().unwrap() > 0.0);
}

#[test]
fn noisy_localize_echoes_the_device() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "localize",
        "--mode",
        "noisy",
        "--device",
        "lima",
        "--steps",
        "2",
        "--reps",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("run.json"));
    assert_eq!(v["config"]["device"]["model"]["name"], "lima");
    assert_eq!(v["config"]["repetitions"], 3);
    let w1 = v["per_step"][1]["expected_peak"].as_f64().unwrap();
    assert!(w1 > 0.56 && w1 < 0.83);
    assert_eq!(v["per_step"][1]["stderr"].as_array().unwrap().len(), 8);
    assert!(v["routing"]["swaps_per_step"][0].as_u64().unwrap() >= 1);
}

#[test]
fn verify_passes_and_catches_corruption() {
    let o = run(&["verify", "--n-min", "1", "--n-max", "3", "--trials", "10"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("max distance")).unwrap();
    let d: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(d < 1e-9);

    let o = run(&[
        "verify",
        "--n-min",
        "2",
        "--n-max",
        "2",
        "--trials",
        "3",
        "--corrupt-angle",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL n=2 K="), "{out}");
    assert!(out.contains(" L="));

    let o = run(&["verify", "--n-max", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_six_qubits_within_budget() {
    let start = std::time::Instant::now();
    let o = run(&["verify", "--n-min", "6", "--n-max", "6", "--trials", "1"]);
    assert!(o.status.success());
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn diffusion_ratio_and_zero_kick() {
    let dir = TempDir::new().unwrap();
    let o = run(&["diffusion", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v = read_json(&dir.path().join("summary.json"));
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.6..1.4).contains(&ratio));
    assert!(stdout(&o).contains("ratio="));
    let csv = fs::read_to_string(dir.path().join("diffusion.csv")).unwrap();
    assert!(csv.starts_with("t,msd,stderr\n0,0,0\n"));
    assert_eq!(csv.lines().count(), 52);

    let o = run(&[
        "diffusion",
        "--k",
        "0",
        "--T",
        "1",
        "--trajectories",
        "2000",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v = read_json(&dir.path().join("diffusion.json"));
    assert_eq!(v["D_fit"], 0.0);
    assert!(v["ratio"].is_null());

    let o = run(&["diffusion", "--trajectories", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundled_devices_table() {
    let o = run(&["devices"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let swaps = |name: &str| -> u32 {
        let line = out.lines().find(|l| l.starts_with(&format!("{name}\t"))).unwrap();
        line.split('\t').nth(2).unwrap().parse().unwrap()
    };
    assert_eq!(swaps("yorktown"), 0);
    for name in ["lima", "belem", "quito", "santiago", "athens"] {
        assert!(swaps(name) >= 1, "{name}");
    }
    // sorted by total error
    let dir = TempDir::new().unwrap();
    let o = run(&["devices", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v = read_json(&dir.path().join("devices.json"));
    let errs: Vec<f64> = v["devices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["e_tot"].as_f64().unwrap())
        .collect();
    assert_eq!(errs.len(), 6);
    assert!(errs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn device_directory_handling() {
    let empty = TempDir::new().unwrap();
    let o = run(&["devices", "--dir", empty.path().to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("no devices"));

    let dir = TempDir::new().unwrap();
    noiseless_device_file(dir.path());
    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let o = bin()
        .args(["devices"])
        .env("SAWTOOTH_DEVICE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("broken.json"));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("clean\t")).unwrap();
    assert_eq!(row.split('\t').nth(4).unwrap(), "0.000000");

    // a bare name resolves through the directory variable
    let o = bin()
        .args(["localize", "--mode", "noisy", "--device", "clean", "--reps", "2"])
        .env("SAWTOOTH_DEVICE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

fn sweep_rows(dir: &Path) -> Vec<Value> {
    read_json(&dir.join("sweep.json"))["points"].as_array().unwrap().clone()
}

#[test]
fn steps_sweep_on_clean_device_tracks_exact_peaks() {
    let tmp = TempDir::new().unwrap();
    let dev = noiseless_device_file(tmp.path());
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep",
        "--axis",
        "steps",
        "--values",
        "1,2,3,4,5,6",
        "--device",
        &dev,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let exact = [
        0.829_455_036_666_805_4,
        0.942_031_179_201_132_4,
        0.888_958_548_924_245_6,
        0.860_036_909_917_993_5,
        0.949_461_913_392_812_4,
        0.798_227_820_854_641_1,
    ];
    for (row, w) in sweep_rows(&out).iter().zip(exact) {
        assert!((row["expected"].as_f64().unwrap() - w).abs() < 1e-9);
        let se = (w * (1.0 - w) / 81920.0).sqrt();
        assert!((row["peak"].as_f64().unwrap() - w).abs() < 4.0 * se);
    }
}

#[test]
fn err_2q_sweep_is_monotone() {
    let out = TempDir::new().unwrap();
    let o = run(&[
        "sweep",
        "--axis",
        "err_2q",
        "--values",
        "0,0.01,0.02,0.05,0.1",
        "--device",
        "lima",
        "--reps",
        "2",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let peaks: Vec<f64> = sweep_rows(out.path())
        .iter()
        .map(|r| r["expected"].as_f64().unwrap())
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] <= w[0]), "{peaks:?}");
    let csv = fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("axis,value,steps,peak,stderr,expected,visible\nerr_2q,0,1,"));
}

#[test]
fn better_device_stays_visible_longer() {
    let visible_steps = |dev: &str| -> usize {
        let out = TempDir::new().unwrap();
        let o = run(&[
            "sweep",
            "--axis",
            "steps",
            "--values",
            "1,2,3,4,5,6",
            "--device",
            dev,
            "--out",
            out.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
        sweep_rows(out.path())
            .iter()
            .take_while(|r| r["visible"].as_bool().unwrap())
            .count()
    };
    assert!(visible_steps("lima") >= visible_steps("yorktown"));
}

#[test]
fn circuit_export_counts() {
    let dir = TempDir::new().unwrap();
    let o = run(&["circuit", "--device", "yorktown", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("H=6 P=6 CP=12 single-qubit=12 two-qubit=12"));
    let v = read_json(&dir.path().join("circuit.json"));
    assert_eq!(v["routed"]["swap_count"], 0);
    assert_eq!(v["circuit"]["gates"].as_array().unwrap().len(), 24);
    let gates = fs::read_to_string(dir.path().join("gates.csv")).unwrap();
    assert_eq!(gates.lines().count(), 25);
}

#[test]
fn config_file_supplies_values_and_flags_override_them() {
    let dir = TempDir::new().unwrap();
    noiseless_device_file(dir.path());
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{"n": 3, "L": 7, "K": 1.5, "steps": 2, "mode": "noisy", "device": "clean.json",
            "shots": 500, "repetitions": 2, "seed": 4, "format": "json"}"#,
    )
    .unwrap();
    let out = dir.path().join("a");
    let o = run(&[
        "localize",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out.join("run.json"));
    let c = &v["config"];
    assert_eq!(c["steps"], 2);
    assert_eq!(c["shots"], 500);
    assert_eq!(c["repetitions"], 2);
    assert_eq!(c["seed"], 9);
    assert_eq!(c["mode"], "noisy");
    assert!(c["config_file"].as_str().unwrap().ends_with("exp.json"));
    assert!(c["device"]["source"].as_str().unwrap().ends_with("clean.json"));
    assert!(!out.join("peaks.csv").exists());
    let expected = v["per_step"][1]["expected_peak"].as_f64().unwrap();
    assert!((expected - 0.829_455_036_666_805_4).abs() < 1e-9);

    // --K on the command line replaces the file's map parameters
    let o = run(&[
        "localize",
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "noiseless",
        "--K",
        "0",
        "--L",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "2\t1.000000"), "{}", stdout(&o));
}

#[test]
fn bad_config_files_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("typo.json", r#"{"stepz": 3}"#),
        ("mixed.json", r#"{"K": 1.5, "k": 0.2, "T": 1.0}"#),
        ("half.json", r#"{"k": 0.2}"#),
        ("broken.json", "{"),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let o = run(&["localize", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
    }
    let o = run(&[
        "localize",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
