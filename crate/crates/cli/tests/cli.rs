use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdma-sim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir.join("manifest.json"))).unwrap()
}

#[test]
fn single_with_defaults_writes_one_row_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["single", "--trials", "10"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("out");
    let results = read(dir.join("results.csv"));
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(
        lines[0],
        "swept_value,policy,sigma_s_dB,mean_rate,mean_rate_se,tx_capacity,cell_edge_mean,denial_fraction,n_trials"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("4,rate,0,"));
    assert!(lines[1].ends_with(",10"));

    // every listed output exists and matches its checksum
    let m = manifest(&dir);
    assert_eq!(m["master_seed"], 1);
    assert_eq!(m["config"]["n_trials"], 10);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs
        .iter()
        .map(|o| o["file"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["config.toml", "results.csv", "ccdf.csv"]);
    for o in outputs {
        let bytes = std::fs::read(dir.join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"], bytes.len());
        assert_eq!(
            o["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
}

#[test]
fn sweep_emits_ccdf_curves_per_policy_and_load() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--km-list",
        "4,12",
        "--policy",
        "both",
        "--sigma-s",
        "8",
        "--trials",
        "4",
    ];
    let out = run(tmp.path(), &args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("out");
    assert_eq!(read(dir.join("results.csv")).lines().count(), 1 + 4);

    let ccdf = read(dir.join("ccdf.csv"));
    let mut curves = std::collections::BTreeMap::<(String, String), Vec<f64>>::new();
    for line in ccdf.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        curves
            .entry((f[0].to_string(), f[1].to_string()))
            .or_default()
            .push(f[3].parse().unwrap());
    }
    let keys: Vec<_> = curves.keys().cloned().collect();
    let expect = |p: &str, k: &str| (p.to_string(), k.to_string());
    assert_eq!(
        keys,
        [
            expect("power", "12"),
            expect("power", "4"),
            expect("rate", "12"),
            expect("rate", "4")
        ]
    );
    for values in curves.values() {
        assert_eq!(values.len(), 201);
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
        assert!(values[0] <= 1.0 && *values.last().unwrap() >= 0.0);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--km-list",
        "2,4",
        "--policy",
        "both",
        "--trials",
        "3",
        "--seed",
        "77",
    ];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    for file in ["results.csv", "ccdf.csv", "config.toml"] {
        assert_eq!(
            std::fs::read(a.path().join("out").join(file)).unwrap(),
            std::fs::read(b.path().join("out").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn echoed_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run(
        tmp.path(),
        &[
            "single", "--trials", "3", "--alpha", "3.7", "--seed", "5", "--out", "a",
        ],
    );
    assert!(first.status.success());
    let again = run(
        tmp.path(),
        &["single", "--config", "a/config.toml", "--out", "b"],
    );
    assert!(
        again.status.success(),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(
        read(tmp.path().join("a/results.csv")),
        read(tmp.path().join("b/results.csv"))
    );
    assert_eq!(manifest(&tmp.path().join("b"))["config"]["alpha"], 3.7);
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.cfg"),
        "alpha = 4\nn_trials = 2\nsigma_s_dB = 8\n",
    )
    .unwrap();
    let out = run(
        tmp.path(),
        &["single", "--config", "c.cfg", "--alpha", "3.5"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = manifest(&tmp.path().join("out"));
    assert_eq!(m["config"]["alpha"], 3.5);
    assert_eq!(m["config"]["n_trials"], 2);
    assert_eq!(m["config"]["sigma_s_dB"], serde_json::json!([8.0]));
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.cfg"), "sigma_s_dB = -1\n").unwrap();
    let out = run(tmp.path(), &["single", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_s_dB"));

    std::fs::write(tmp.path().join("unknown.cfg"), "gamma = 3\n").unwrap();
    let out = run(tmp.path(), &["single", "--config", "unknown.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`gamma`"));

    let out = run(tmp.path(), &["single", "--trials", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_trials"));

    let out = run(tmp.path(), &["single", "--policy", "greedy"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out/results.csv").exists());
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["single", "--config", "nope.cfg"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn infeasible_placement_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // 200 stations 0.6 apart do not fit on a radius-2 disk
    std::fs::write(
        tmp.path().join("dense.cfg"),
        "M = 200\nr_bs = 0.6\nkm_list = 1\nn_trials = 2\n",
    )
    .unwrap();
    let out = run(tmp.path(), &["single", "--config", "dense.cfg"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn snapshot_lists_stations_then_mobiles() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["snapshot", "--km-list", "4", "--links"]);
    assert!(out.status.success());
    let dir = tmp.path().join("out");
    let text = read(dir.join("snapshot.csv"));
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(text.lines().next().unwrap(), "kind,index,x,y,serving");
    assert_eq!(rows.len(), 50 + 200);
    assert!(rows[..50].iter().all(|r| r[0] == "bs"));
    assert!(rows[50..].iter().all(|r| r[0] == "mobile"));
    for r in &rows {
        let (x, y): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(x.hypot(y) <= 2.0);
        let serving: usize = r[4].parse().unwrap();
        assert!(serving <= 50);
    }
    assert_eq!(read(dir.join("links.csv")).lines().count(), 1 + 50 * 200);
}

#[test]
fn validate_reports_the_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["validate", "--contexts", "8", "--draws", "20000"],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("8/8 contexts"), "{stdout}");
    assert!(stdout.contains("PASS"));
    let csv = read(tmp.path().join("out/validate.csv"));
    assert_eq!(csv.lines().count(), 9);
}
