use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const CONVERSION: &str = r#"
process = "sfg"

[constants]
k1 = 10.0
k2 = 1.0

[profile]
kind = "linear"
slope = 3.0
center = 3.0

[span]
start = 0.0
end = 6.0
samples = 121
"#;

fn twm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twm-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn manifest(dir: &Path, stem: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{stem}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CONVERSION);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = twm(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["run_simulate.csv", "run.manifest.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let m = manifest(&a, "run");
    assert!(m["summary"]["final_efficiency"].as_f64().unwrap() > 0.9);
    assert!(m["derived"]["m"].as_f64().unwrap() - 0.1 < 1e-15);
}

#[test]
fn manifest_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CONVERSION);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(
        twm(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    let again = a.join("run.manifest.json");
    let o = twm(&[
        "simulate",
        "--config",
        again.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(a.join("run_simulate.csv")).unwrap(),
        fs::read(b.join("run_simulate.csv")).unwrap()
    );
    assert_eq!(manifest(&a, "run"), manifest(&b, "run"));
}

#[test]
fn figure_four_writes_two_tables() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = twm(&["figure", "4", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csvs: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 2, "{csvs:?}");
    assert_eq!(manifest(tmp.path(), "fig4")["command"], "figure 4");
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let bad = write_config(tmp.path(), "bad.toml", "process = \"sfg\"\nwhat = 1\n");
    let o = twm(&["simulate", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let backwards = write_config(
        tmp.path(),
        "b.toml",
        &CONVERSION.replace("end = 6.0", "end = -1.0"),
    );
    let o = twm(&[
        "simulate",
        "--config",
        &backwards,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = twm(&["simulate", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn integrator_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    // A huge seed blows up the amplifier faster than the step floor allows.
    let cfg = CONVERSION
        .replace("\"sfg\"", "\"opa\"")
        .replace(
            "[constants]\nk1 = 10.0\nk2 = 1.0",
            "[initial]\nintensities = [0.0, 1e6, 1e6]",
        )
        .replace("end = 6.0", "end = 1000.0")
        .replace("slope = 3.0", "slope = 0.0");
    let cfg = write_config(tmp.path(), "c.toml", &cfg);
    let o = twm(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
        "--tol",
        "1e-14,1e-300",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn unreachable_branch_exits_4() {
    let tmp = TempDir::new().unwrap();
    // Second harmonic: the branch only exists for dGamma < 2.
    let cfg = CONVERSION
        .replace("\"sfg\"", "\"shg\"")
        .replace("k1 = 10.0", "k1 = 1.0")
        .replace("center = 3.0", "center = 0.0")
        .replace("start = 0.0", "start = 1.0");
    let cfg = write_config(tmp.path(), "c.toml", &cfg);
    let o = twm(&[
        "trajectory",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let lin = r#"
[profile]
kind = "constant"
value = 0.5

[span]
start = 0.0
end = 1.0

[linear]
kind = "opa"
coupling = 1.0
"#;
    let cfg = write_config(tmp.path(), "l.toml", lin);
    let o = twm(&[
        "linear",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn elliptic_table_limits() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    for (m, stem) in [("0", "m0"), ("1", "m1")] {
        let o = twm(&[
            "elliptic-table",
            "--m",
            m,
            "--u-min",
            "0.1",
            "--u-max",
            "2",
            "--step",
            "0.1",
            "--out",
            out,
            "--stem",
            stem,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let rows = |stem: &str| -> Vec<Vec<f64>> {
        fs::read_to_string(tmp.path().join(format!("{stem}_elliptic.csv")))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(4).map(|c| c.parse().unwrap()).collect())
            .collect()
    };
    for r in rows("m0") {
        assert!((r[1] - r[0].sin()).abs() < 1e-14 && (r[3] - 1.0).abs() < 1e-14);
    }
    for r in rows("m1") {
        assert!((r[1] - r[0].tanh()).abs() < 1e-14);
        assert!((r[2] - 1.0 / r[0].cosh()).abs() < 1e-14);
    }
}

#[test]
fn single_rate_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CONVERSION);
    let out = tmp.path().to_str().unwrap();
    assert!(twm(&["simulate", "--config", &cfg, "--out", out])
        .status
        .success());
    let o = twm(&[
        "sweep", "--config", &cfg, "--out", out, "--rates", "3", "--stem", "sw",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("sw_sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let sweep_eff: f64 = row[1].parse().unwrap();
    let sim_eff = manifest(tmp.path(), "run")["summary"]["final_efficiency"]
        .as_f64()
        .unwrap();
    assert_eq!(sweep_eff, sim_eff);
}

#[test]
fn sweep_records_row_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CONVERSION);
    let o = twm(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
        "--rates",
        "1,3,1e9",
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("run_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(!csv.lines().last().unwrap().ends_with(','), "{csv}");
}

#[test]
fn json_format() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CONVERSION);
    let o = twm(&[
        "trajectory",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("run_trajectory.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 121);
    assert!(rows[0]["u_s"].is_number());
}
