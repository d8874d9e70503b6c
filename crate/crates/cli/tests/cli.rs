use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: [&str; 4] = ["--set", "params.n_cavities=101", "--set", "params.n_qubits=12"];

fn simulate(task: &str, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg(task)
        .args(extra)
        .arg("--out")
        .arg(out)
        .env("KERR_LATTICE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    std::iter::once(header).chain(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect())).collect()
}

#[test]
fn spectrum_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate("spectrum", dir.path(), &SMALL);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows[0], ["index", "E_minus_E0b"]);
    assert_eq!(rows.len() - 1, 66);
    let m = manifest(dir.path());
    assert_eq!(m["basis"]["dim"], 66);
    assert_eq!(m["basis"]["pair_dim"], 12 * 11 / 2);
    assert_eq!(m["config"]["params"]["n_qubits"], 12);
    assert_eq!(m["config"]["task"], "spectrum");
    assert_eq!(m["param_hash"].as_str().unwrap().len(), 64);
    assert!(m["max_residual"].as_f64().unwrap() < 1e-10);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [&SMALL[..], &["--set", "times.stop=500", "--set", "snapshots=[100]"]].concat();
    for d in [&a, &b] {
        assert!(simulate("dynamics", d.path(), &args).status.success());
    }
    for f in ["dynamics.csv", "corr_t100.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_is_merged_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{ "schema_version": 1, "params": { "n_cavities": 61, "n_qubits": 6 }, "model": "full", "eigen_count": 4 }"#).unwrap();
    let out = dir.path().join("out");
    let o = simulate("correlations", &out, &["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["basis"]["kind"], "FullTruncated");
    assert_eq!(m["basis"]["dim"], 15 + 6 * 61 + 61);
    let frac = m["summary"]["states"][0]["photonic_fraction"].as_f64().unwrap();
    let pair = m["summary"]["states"][0]["pair_weight"].as_f64().unwrap();
    assert!((frac + pair - 1.0).abs() < 1e-10);

    fs::write(&cfg, r#"{ "params": { "n_cavities": 61 }, "surprise": true }"#).unwrap();
    assert_eq!(simulate("spectrum", &out, &["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |task: &str, extra: &[&str]| simulate(task, dir.path(), extra).status.code();
    assert_eq!(code("spectrum", &["--set", "params.bogus=1"]), Some(2));
    assert_eq!(code("spectrum", &["--set", "schema_version=7"]), Some(2));
    assert_eq!(code("spectrum", &["--set", "params.n_cavities=500"]), Some(2));
    assert_eq!(code("figure", &["--figure", "99"]), Some(2));
    assert_eq!(code("spectrum", &["--set", "params.u=-0.2"]), Some(3));
    let narrow = [&SMALL[..], &["--set", "variational.bracket=[1.0,1.5]", "--set", "variational.drift_extra_qubits=0"]].concat();
    assert_eq!(code("variational", &narrow), Some(4));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(["spectrum", "--out"])
        .arg(dir.path())
        .env("KERR_LATTICE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn validate_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate("validate", dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("validate.csv"));
    assert_eq!(rows[0], ["check", "value", "tolerance", "pass"]);
    assert_eq!(rows.len() - 1, 7);
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
    assert_eq!(manifest(dir.path())["summary"]["failed"], 0);
}

#[test]
fn sweep_moves_points_into_place() {
    let dir = tempfile::tempdir().unwrap();
    let args = [&SMALL[..], &["--set", "sweep.values=[-0.15,-0.05,-0.01]"]].concat();
    let o = simulate("sweep", dir.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows[0], ["delta", "E0", "E0_single", "E0_first_order"]);
    assert_eq!(rows.len(), 4);
    for i in 0..3 {
        let point = dir.path().join(format!("point_{i:03}"));
        assert!(point.join("spectrum.csv").exists() && point.join("point.json").exists());
    }
    assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().contains(".tmp")));
    // ground state binds more strongly than its first-order estimate
    for r in &rows[1..] {
        let (e0, pert): (f64, f64) = (r[1].parse().unwrap(), r[3].parse().unwrap());
        assert!(e0 <= pert + 1e-12);
    }
    assert_eq!(simulate("sweep", dir.path(), &["--set", "sweep.parameter=nope"]).status.code(), Some(2));
}

#[test]
fn figure_series() {
    let dir = tempfile::tempdir().unwrap();
    let run = |id: &str, extra: &[&str]| {
        let args = [&SMALL[..], &["--figure", id], extra].concat();
        let o = simulate("figure", dir.path(), &args);
        assert!(o.status.success(), "{id}: {}", String::from_utf8_lossy(&o.stderr));
    };
    run("3", &["--set", "sweep.count=5"]);
    let fig3 = csv_rows(&dir.path().join("fig3.csv"));
    assert_eq!(fig3[0], ["delta", "W0", "L0"]);
    assert_eq!(fig3.len(), 6);

    run("4", &[]);
    let fig4 = csv_rows(&dir.path().join("fig4.csv"));
    // all r ≤ 9 pairs of 12 qubits: 11 + 10 + … + 3
    let corner: usize = (3..=11).sum();
    assert_eq!(fig4.len() - 1, corner * corner);

    run("9b", &["--set", "times.stop=200"]);
    let fig9 = csv_rows(&dir.path().join("fig9b.csv"));
    assert_eq!(fig9[0], ["t", "P_alpha1", "P_alpha6", "P_alpha21"]);
    assert_eq!(fig9.len() - 1, 21);

    run("7b", &[]);
    assert_eq!(csv_rows(&dir.path().join("fig7b.csv"))[0], ["alpha", "P_full", "P_spin", "P_single"]);
}
