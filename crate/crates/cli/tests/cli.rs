use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pluripot::io::read_potential;
use pluripot::ModelSpec;
use serde_json::Value;

const MODEL: &str = r#"{"dim":1,"degree":1,"half_width":20.0,"cells":2048}"#;

fn run(cmd: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join(format!("{cmd}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_pluripot"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .env_remove("PLURIPOT_THREADS")
        .output()
        .unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn stderr_line(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn solve_ma_fs_returns_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve-ma", &format!(r#"{{"model":{MODEL},"measure":{{"kind":"fs"}}}}"#), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let model = ModelSpec::new(1, 1, 20.0, 2048).build().unwrap();
    let text = fs::read_to_string(dir.path().join("out/potential.txt")).unwrap();
    let psi = read_potential(&model, &text).unwrap();
    assert!(psi.sup_distance(&model.reference()) < 1e-10);
    let report = json(dir.path(), "energy.json");
    assert!(report["result"]["E"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn solve_ma_gaussian_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"model":{MODEL},"measure":{{"kind":"gaussian","mean":0.0,"sd":1.0}}}}"#);
    let out = run("solve-ma", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let csv = fs::read_to_string(dir.path().join("out/residual.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let residual: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(residual < 1e-6, "{residual}");
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve-ma", r#"{"model": {"dim": 1,"#, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_line(&out);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    let unknown = format!(r#"{{"model":{MODEL},"measure":{{"kind":"fs"}},"colour":1}}"#);
    assert_eq!(run("solve-ma", &unknown, dir.path()).status.code(), Some(1));
    let bad_model = r#"{"model":{"dim":1,"degree":1,"half_width":20.0,"cells":2048,"x":0},"measure":{"kind":"fs"}}"#;
    assert_eq!(run("solve-ma", bad_model, dir.path()).status.code(), Some(1));
}

#[test]
fn missing_config_and_bad_threads_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pluripot"))
        .args(["report", "--config", "/nonexistent.json", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, format!(r#"{{"model":{MODEL},"measure":{{"kind":"fs"}}}}"#)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pluripot"))
        .args(["logenergy", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("PLURIPOT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_pluripot")).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_convergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"model":{MODEL},"measure":{{"kind":"gaussian","mean":0.0,"sd":1.0}},"solver":{{"method":"ascent","max_iter":1}}}}"#
    );
    let out = run("solve-ma", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr_line(&out));
}

#[test]
fn balanced_fs_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model":{"dim":1,"degree":1,"half_width":30.0,"cells":2048},"setting":"mu","measure":{"kind":"fs_nodal"},"ks":[2,4,8]}"#;
    let out = run("balanced", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let sweep = json(dir.path(), "sweep.json");
    let rows = sweep["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["sup_gap_to_limit"].as_f64().unwrap() <= 1e-8, "{r}");
    }
    for k in [2, 4, 8] {
        assert!(dir.path().join(format!("out/trace_k{k:03}.csv")).exists());
    }
}

#[test]
fn balanced_bump_gap_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"model":{MODEL},"setting":"mu","measure":{{"kind":"bump","center":0.5,"width":3.0}},"ks":[2,4,8,16,32]}}"#
    );
    let out = run("balanced", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let sweep = json(dir.path(), "sweep.json");
    let gaps: Vec<f64> = sweep["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["sup_gap_to_limit"].as_f64().unwrap())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    for r in sweep["result"]["rows"].as_array().unwrap() {
        let ratio = r["j_ratio"].as_f64().unwrap();
        assert!(ratio.is_finite() && ratio > 0.0, "{r}");
    }
}

#[test]
fn balanced_rejects_bad_k_lists_and_settings() {
    let dir = tempfile::tempdir().unwrap();
    for ks in ["[]", "[4,2]", "[0,2]"] {
        let cfg = format!(r#"{{"model":{MODEL},"setting":"mu","measure":{{"kind":"fs"}},"ks":{ks}}}"#);
        assert_eq!(run("balanced", &cfg, dir.path()).status.code(), Some(1), "{ks}");
    }
    let cfg = format!(r#"{{"model":{MODEL},"setting":"plus","ks":[2]}}"#);
    assert_eq!(run("balanced", &cfg, dir.path()).status.code(), Some(1));
}

#[test]
fn capacity_of_unit_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"model":{MODEL},"sets":[{{"kind":"disk","radius":1.0}},{{"kind":"window"}}]}}"#);
    let out = run("capacity", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let rep = json(dir.path(), "capacity.json");
    let t = rep["result"][0]["T_alex"].as_f64().unwrap();
    assert!((t - 0.5f64.sqrt()).abs() < 1e-4, "{t}");
    assert!((rep["result"][1]["Cap"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn logenergy_of_reference_volume() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("logenergy", &format!(r#"{{"model":{MODEL},"measure":{{"kind":"fs"}}}}"#), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let i = json(dir.path(), "logenergy.json")["result"]["I"].as_f64().unwrap();
    assert!((i + 0.5).abs() < 1e-4, "{i}");
}

#[test]
fn ke_on_anticanonical_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model":{"dim":1,"degree":2,"half_width":20.0,"cells":2048},"random_init":true}"#;
    let out = run("ke", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let ke = json(dir.path(), "ke.json");
    assert!(ke["result"]["residual"].as_f64().unwrap() < 1e-8);
    let slopes = &ke["result"]["slope_range"];
    assert!(slopes[0].as_f64().unwrap() >= -1e-12 && slopes[1].as_f64().unwrap() <= 2.0 + 1e-12, "{slopes}");
    assert_eq!(run("ke", &format!(r#"{{"model":{MODEL}}}"#), dir.path()).status.code(), Some(1));
}

#[test]
fn default_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("report", "{}", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr_line(&out));
    let rep = json(dir.path(), "report.json");
    assert_eq!(rep["result"]["passed"], Value::Bool(true));
    assert_eq!(rep["result"]["models"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_reproducible_and_headed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"model":{MODEL},"measure":{{"kind":"bump","center":0.0,"width":4.0}}}}"#);
    for d in [&a, &b] {
        assert_eq!(run("solve-ma", &cfg, d.path()).status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        let x = fs::read(a.path().join("out").join(&name)).unwrap();
        let y = fs::read(b.path().join("out").join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
        let text = String::from_utf8(x).unwrap();
        let first = text.lines().next().unwrap();
        if first.starts_with('{') {
            let v: Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["header"]["version"], env!("CARGO_PKG_VERSION"));
            assert_eq!(v["header"]["config_sha256"].as_str().unwrap().len(), 64);
        } else {
            assert!(first.starts_with("# ") && first.contains("config_sha256=") && first.contains("M=2048"), "{first}");
        }
    }
}
