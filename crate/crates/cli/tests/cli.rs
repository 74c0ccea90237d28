use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latpat"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], model: &str, out: &Path) -> Output {
    let model = configs().join(model);
    bin()
        .args(args)
        .arg("--model")
        .arg(model)
        .arg("--out")
        .arg(out)
        .env("LATPAT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn validator() -> jsonschema::Validator {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::draft202012::new(&schema).expect("schema compiles")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn analyze_cycle4_reports_instability_and_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--generator", "cycle:4"], "cascade.toml", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("analysis.json"));
    assert_valid(&report);
    assert_eq!(report["instability"]["verdict"], "unstable");
    assert!(report["orbit"].is_object());
    assert_eq!(report["tool"]["name"], "latpat");
    assert_eq!(report["config"]["graph"]["generator"], "cycle:4");
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("homogeneous instability: unstable"));
    assert!(summary.contains("period-two orbit"));
}

#[test]
fn analyze_cycle3_omits_checkerboard() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--generator", "cycle:3"], "cascade.toml", dir.path());
    assert!(o.status.success());
    let report = read_json(&dir.path().join("analysis.json"));
    assert_valid(&report);
    assert!(report.get("checkerboard").is_none());
    assert!(report.get("orbit").is_none());
    assert!((report["graph"]["lambda_n"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    let notes = report["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("not bipartite")));
}

#[test]
fn missing_model_type_exits_2_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model]\ngammas = [1.0]\nstages = [{ kind = \"constant\", value = 1.0 }]\n").unwrap();
    let o = bin()
        .args(["analyze", "--generator", "cycle:4", "--model"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_valid(&err);
    assert_eq!(err["pointer"], "model.type");
    assert_eq!(err["exit_code"], 2);
    assert!(err["message"].as_str().unwrap().contains("line 1"));
}

#[test]
fn unknown_tolerance_and_bad_threads_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--generator", "cycle:4", "--tol", "bogus=1"], "cascade.toml", dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_valid(&stderr_json(&o));
    let o = bin()
        .args(["certify", "--model"])
        .arg(configs().join("notch.toml"))
        .arg("--out")
        .arg(dir.path())
        .env("LATPAT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // two inhibiting stages: T is increasing, so bisection has no bracket
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--generator", "cycle:4"], "even_inhibition.toml", dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = stderr_json(&o);
    assert_valid(&err);
    assert_eq!(err["code"], "NoBracket");
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify"], "notch.toml", &dir.path().join("notch"));
    assert_eq!(o.status.code(), Some(0));
    let cert = read_json(&dir.path().join("notch/certificate.json"));
    assert_valid(&cert);
    assert_eq!(cert["assumptions"]["assumption2"]["epsilon"], serde_json::json!([1, 1, 0]));

    let o = run(&["certify"], "even_inhibition.toml", &dir.path().join("even"));
    assert_eq!(o.status.code(), Some(4));
    let cert = read_json(&dir.path().join("even/certificate.json"));
    assert_valid(&cert);
    assert_eq!(cert["assumptions"]["assumption2"]["code"], "GaugeViolation");

    let o = run(&["certify"], "constant_stage.toml", &dir.path().join("constant"));
    assert_eq!(o.status.code(), Some(4));
    let cert = read_json(&dir.path().join("constant/certificate.json"));
    assert_valid(&cert);
    assert_eq!(cert["assumptions"]["assumption3"]["chosen_channel"], Value::Null);
}

#[test]
fn perturbed_simulation_reaches_checkerboard() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--generator", "cycle:4"], "cascade.toml", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&dir.path().join("snapshot.json"));
    assert_valid(&meta);
    assert!(meta["classification"]["pattern"].as_str().unwrap().starts_with("checkerboard"));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("time,cell,x0,x1\n"));
    let snap = fs::read_to_string(dir.path().join("snapshot.csv")).unwrap();
    assert_eq!(snap.lines().count(), 5);
}

#[test]
fn ensemble_statistics_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--generator", "path:2", "--mode", "ensemble", "--trials", "100"], "cascade.toml", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats = read_json(&dir.path().join("ensemble.json"));
    assert_valid(&stats);
    assert_eq!(stats["stats"]["trials"], 100);
    let h = &stats["stats"]["histogram"];
    let total: u64 = ["homogeneous", "checkerboard_on_off", "checkerboard_off_on", "other"]
        .iter()
        .map(|k| h[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, stats["stats"]["converged"].as_u64().unwrap());
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let files = |sub: &str| -> Vec<Vec<u8>> {
        ["trajectory.csv", "snapshot.csv", "snapshot.json"]
            .iter()
            .map(|f| fs::read(dir.path().join(sub).join(f)).unwrap())
            .collect()
    };
    for sub in ["a", "b"] {
        let o = run(&["simulate", "--generator", "grid:2x3", "--mode", "random", "--seed", "17"], "cascade.toml", &dir.path().join(sub));
        assert!(o.status.success());
    }
    assert_eq!(files("a"), files("b"));
    let o = run(&["simulate", "--generator", "grid:2x3", "--mode", "random", "--seed", "18"], "cascade.toml", &dir.path().join("c"));
    assert!(o.status.success());
    assert_ne!(files("a")[0], files("c")[0]);
    for sub in ["d", "e"] {
        let o = run(&["analyze", "--generator", "cycle:4"], "cascade.toml", &dir.path().join(sub));
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("d/analysis.json")).unwrap(),
        fs::read(dir.path().join("e/analysis.json")).unwrap()
    );
}

fn sweep_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_brackets_the_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["sweep", "--generator", "cycle:4", "--sweep", "model.stages[0].a=1:9:16"],
        "cascade.toml",
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = sweep_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 16);
    let rho: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(rho.windows(2).all(|w| w[1] > w[0]));
    let crossings = rho.windows(2).filter(|w| (w[0] - 1.0) * (w[1] - 1.0) < 0.0).count();
    assert_eq!(crossings, 1);
    // an orbit exists exactly where the criterion holds
    for r in &rows {
        let unstable = r[3] == "unstable";
        assert_eq!(r[4] == "true", unstable, "{r:?}");
    }
}

#[test]
fn sweep_single_point_and_non_bipartite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--generator", "cycle:4", "--sweep", "model.stages[0].a=3:3:1"], "cascade.toml", &dir.path().join("one"));
    assert!(o.status.success());
    assert_eq!(sweep_rows(&dir.path().join("one/sweep.csv")).len(), 1);

    let o = run(&["sweep", "--generator", "cycle:5", "--sweep", "model.stages[0].a=1:9:5"], "cascade.toml", &dir.path().join("odd"));
    assert!(o.status.success());
    for r in sweep_rows(&dir.path().join("odd/sweep.csv")) {
        assert!(!r[1].is_empty() && !r[2].is_empty() && !r[3].is_empty());
        assert!(r[4].is_empty() && r[5].is_empty(), "{r:?}");
    }
}

#[test]
fn graph_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("square.txt");
    fs::write(&g, "# four cells in a ring\n4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let o = bin()
        .args(["analyze", "--graph"])
        .arg(&g)
        .arg("--model")
        .arg(configs().join("cascade.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("analysis.json"));
    assert_eq!(report["graph"]["nodes"], 4);
    assert_eq!(report["instability"]["verdict"], "unstable");
}
