use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fnls_core::snapshot::{load_snapshot, save_snapshot};
use fnls_core::{Complex64, SpectralField, TorusGrid};

fn fnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fnls")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PLANE_WAVE: &str = r#"
[equation]
s = 1.0
points = 32

[nonlinearity]
kind = "power"
gamma = 2.0

[initial_data]
kind = "plane_wave"
amplitude = [2.0, 0.0]
k = [1]

[solver]
j = 3
total_time = 0.1
quadrature = "gauss_legendre"
quad_nodes = 4
"#;

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("reports/summary.json")).unwrap()).unwrap()
}

#[test]
fn plane_wave_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "pw.toml", PLANE_WAVE);
    let out = tmp.path().join("run");
    let o = fnls(&["simulate", "--config", &cfg, "--output-dir", out.to_str().unwrap(), "--snapshot-every", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "config.toml", "timeline.csv", "norms.csv", "reports/summary.json", "reports/picard.jsonl"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let s = summary(&out);
    assert!(s["exact_error"].as_f64().unwrap() < 1e-6, "{s}");
    assert_eq!(s["stop"]["reason"], "completed");
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 5); // states 0, 3, 6, 9 and the last of 11
    let timeline = fs::read_to_string(out.join("timeline.csv")).unwrap();
    assert!(timeline.starts_with("t,mass,energy,h_j_norm,inf_bound,eta_times_inf\n"));
    assert_eq!(timeline.lines().count(), 12);
}

#[test]
fn reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[equation]
s = 1.0
points = 32

[nonlinearity]
kind = "log"

[initial_data]
kind = "perturbed_constant"
c0 = [2.0, 0.0]
eps = 0.1

[solver]
total_time = 0.05

[outputs]
diagnostics = "jsonl"

[constants]
seed = 42
"#;
    let cfg = write_config(tmp.path(), "p.toml", text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let o = fnls(&["simulate", "--config", &cfg, "--output-dir", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ma = fs::read(a.join("manifest.json")).unwrap();
    assert_eq!(ma, fs::read(b.join("manifest.json")).unwrap());
    assert!(a.join("timeline.jsonl").is_file());
    let m: serde_json::Value = serde_json::from_slice(&ma).unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);

    // a different seed changes the data and so the artifacts
    let cfg2 = write_config(tmp.path(), "q.toml", &text.replace("seed = 42", "seed = 43"));
    let c = tmp.path().join("c");
    assert_eq!(code(&fnls(&["simulate", "--config", &cfg2, "--output-dir", c.to_str().unwrap()])), 0);
    assert_ne!(ma, fs::read(c.join("manifest.json")).unwrap());
}

#[test]
fn config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let bad = write_config(tmp.path(), "bad.toml", &PLANE_WAVE.replace("points = 32", "points = = 32"));
    let o = fnls(&["simulate", "--config", &bad, "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let text = PLANE_WAVE
        .replace("kind = \"power\"\ngamma = 2.0", "kind = \"inverse_power\"\nnu = 1.0")
        .replace("amplitude = [2.0, 0.0]", "amplitude = [0.0, 0.0]")
        .replace("j = 3", "j = 1\nuse_certified_t = true");
    let o = fnls(&["simulate", "--config", &write_config(tmp.path(), "v.toml", &text), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("non-vanishing required") && err.contains("J > N/2 + s"), "{err}");
    assert!(!out.exists());

    let o = fnls(&["verify", "--checks", "no_such_check"]);
    assert_eq!(code(&o), 1);
}

/// `1 + 2iε cos(4x)` has infimum 1, which falls below half of it inside
/// one window of length 0.1 at s = 2.
fn dipping_field() -> SpectralField {
    let grid = TorusGrid::new(1, 32).unwrap();
    let mut f = SpectralField::constant(grid, Complex64::new(1.0, 0.0));
    f.set_coeff(&[4], Complex64::new(0.0, 0.3)).unwrap();
    f.set_coeff(&[-4], Complex64::new(0.0, 0.3)).unwrap();
    f
}

#[test]
fn non_vanishing_failures_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let snap = tmp.path().join("dip.fnls");
    save_snapshot(&snap, &dipping_field(), 2.0, 0.0).unwrap();
    let text = format!(
        r#"
[equation]
s = 2.0
points = 32

[nonlinearity]
kind = "inverse_power"
nu = 1.0

[initial_data]
kind = "from_snapshot"
path = "{}"

[solver]
j = 3
total_time = 0.1
max_window = 0.1
"#,
        snap.display()
    );
    let out = tmp.path().join("run");
    let o = fnls(&["simulate", "--config", &write_config(tmp.path(), "dip.toml", &text), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["stop"]["reason"], "membership");
    assert_eq!(s["stop"]["failure"]["condition"], "infimum_floor");
    assert!(s["min_eta_times_inf"].as_f64().unwrap() >= 0.5);

    let zero = PLANE_WAVE
        .replace("kind = \"power\"\ngamma = 2.0", "kind = \"log\"")
        .replace("amplitude = [2.0, 0.0]", "amplitude = [0.0, 0.0]\nallow_vanishing = true");
    let o = fnls(&["simulate", "--config", &write_config(tmp.path(), "z.toml", &zero), "--output-dir", tmp.path().join("z").to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn picard_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = PLANE_WAVE.replace("j = 3", "j = 3\npicard_max_iters = 1");
    let out = tmp.path().join("run");
    let o = fnls(&["simulate", "--config", &write_config(tmp.path(), "p.toml", &text), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&out)["stop"]["reason"], "picard_non_convergence");
}

#[test]
fn io_failures_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let o = fnls(&["simulate", "--config", missing.to_str().unwrap(), "--output-dir", "x"]);
    assert_eq!(code(&o), 4);

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(tmp.path(), "pw.toml", PLANE_WAVE);
    let o = fnls(&["simulate", "--config", &cfg, "--output-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 4);

    let o = fnls(&["inspect-snapshot", blocker.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn sweep_over_s() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "pw.toml", PLANE_WAVE);
    let sw = write_config(tmp.path(), "sweep.toml", "max_parallel = 2\n[axes]\ns = [0.5, 1.0, 2.0]\n");
    let out = tmp.path().join("sweep");
    let o = fnls(&["sweep", "--config", &cfg, "--sweep", &sw, "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        let d = out.join(format!("run_{i:03}"));
        assert!(d.join("manifest.json").is_file());
        assert!(summary(&d)["exact_error"].as_f64().unwrap() < 1e-6);
    }
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",completed,0,true")), "{csv}");

    // a 2x2 sweep with one inapplicable axis value still records every run
    let sw = write_config(tmp.path(), "s2.toml", "[axes]\ns = [1.0, 2.0]\npoints = [16, 15]\n");
    let out2 = tmp.path().join("sweep2");
    let o = fnls(&["sweep", "--config", &cfg, "--sweep", &sw, "--output-dir", out2.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out2.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.lines().filter(|l| l.ends_with(",1,false")).count(), 2, "{csv}");
    assert!(out2.join("run_001/error.txt").is_file());
}

#[test]
fn snapshot_round_trip_and_inspect() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "pw.toml", PLANE_WAVE);
    let out = tmp.path().join("run");
    assert_eq!(code(&fnls(&["simulate", "--config", &cfg, "--output-dir", out.to_str().unwrap()])), 0);
    let last = out.join("snapshots/state_000010.fnls");
    let snap = load_snapshot(&last).unwrap();
    assert!((snap.t - 0.1).abs() < 1e-15);
    let copy = tmp.path().join("copy.fnls");
    save_snapshot(&copy, &snap.field, snap.s, snap.t).unwrap();
    assert_eq!(fs::read(&copy).unwrap(), fs::read(&last).unwrap());
    assert_eq!(load_snapshot(&copy).unwrap().field, snap.field);

    let o = fnls(&["inspect-snapshot", last.to_str().unwrap(), "--j", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("points            32"), "{text}");
    assert!(text.contains("h3_spectral"), "{text}");
}

#[test]
fn verify_and_estimate_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v.jsonl");
    let o = fnls(&["verify", "--seed", "3", "--checks", "k_constant,norm_sandwich", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let first = fs::read(&out).unwrap();
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&first)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l["pass"] == true));
    fnls(&["verify", "--seed", "3", "--checks", "k_constant,norm_sandwich", "--output", out.to_str().unwrap()]);
    assert_eq!(fs::read(&out).unwrap(), first);

    let text = PLANE_WAVE
        .replace("kind = \"plane_wave\"\namplitude = [2.0, 0.0]\nk = [1]", "kind = \"perturbed_constant\"\nc0 = [2.0, 0.0]\neps = 0.1")
        .replace("kind = \"power\"\ngamma = 2.0", "kind = \"log\"");
    let o = fnls(&["estimate-window", "--config", &write_config(tmp.path(), "e.toml", &text), "--fit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8_lossy(&o.stdout);
    for key in ["T_contraction", "g1", "k_constant", "[configured]", "[fitted]"] {
        assert!(report.contains(key), "{report}");
    }
}
