use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn consim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_consim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_h": 200, "alpha1": 0.5, "threshold_t": 20}"#);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = consim(&["--config", &cfg, "--seed", "9", "--out", s(dir), "run", "--series"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("bad_majority_tick: "));
    }
    for f in ["outcome.json", "series.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(a.join("outcome.json")).unwrap()).unwrap();
    assert_eq!(json["params"]["n_h"], 200);
    assert_eq!(json["params"]["seed"], 9);
}

#[test]
fn invalid_probability_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"p_c": 1.5}"#);
    let o = consim(&["--config", &cfg, "--out", s(tmp.path()), "run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("p_c"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"alpha7": 1}"#);
    let o = consim(&["--config", &cfg, "run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("alpha7"), "{}", stderr(&o));
}

#[test]
fn sweep_output_is_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_h": 100, "max_ticks": 40}"#);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let o = consim(&[
            "-q",
            "--config",
            &cfg,
            "--out",
            s(dir),
            "--jobs",
            jobs,
            "sweep",
            "-e",
            "1",
            "-r",
            "2",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
    let runs = fs::read_to_string(a.join("runs.csv")).unwrap();
    assert_eq!(runs, fs::read_to_string(b.join("runs.csv")).unwrap());
    assert_eq!(runs.lines().count(), 1 + 10 * 2);
    assert_eq!(
        fs::read_to_string(a.join("summary.csv")).unwrap().lines().count(),
        1 + 10
    );
    let spec: serde_json::Value = serde_json::from_slice(&fs::read(a.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(spec["replications"], 2);
}

#[test]
fn threshold_sweep_has_ten_conditions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_h": 60, "max_ticks": 30}"#);
    let o = consim(&[
        "--config",
        &cfg,
        "--out",
        s(tmp.path()),
        "sweep",
        "-e",
        "threshold",
        "-r",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("experiment threshold: 10 conditions, 10 runs"),
        "{}",
        stdout(&o)
    );
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let thresholds: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(
        thresholds,
        ["10", "20", "30", "40", "50", "60", "70", "80", "90", "100"]
    );
}

#[test]
fn power_from_eta_squared() {
    let tmp = tempfile::tempdir().unwrap();
    let o = consim(&[
        "--out",
        s(tmp.path()),
        "analyze",
        "power",
        "--eta2",
        "0.85",
        "--groups",
        "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("f = 2.38048"), "{out}");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("power.json")).unwrap()).unwrap();
    let n = json["solution"]["n"].as_f64().unwrap();
    let ceil = json["solution"]["n_ceil"].as_u64().unwrap();
    assert!(n > 1.0 && n < 3.0 && ceil == n.ceil() as u64, "{json}");
    assert!(json["solution"]["achieved_power"].as_f64().unwrap() >= 0.8);
}

#[test]
fn power_needs_an_effect_size() {
    let o = consim(&["analyze", "power", "--groups", "3"]);
    assert!(!o.status.success());
}

#[test]
fn surface_recovers_sampled_quadratic() {
    let tmp = tempfile::tempdir().unwrap();
    let beta = [2.0, -1.5, 0.75, 3.0, -4.0, 1.25];
    let mut csv = String::from("b,d,t\n");
    for i in 0..=8 {
        for j in 0..=6 {
            let (b, d) = (0.1 + 0.1 * i as f64, 0.2 * j as f64);
            let t = beta[0] + beta[1] * b + beta[2] * d + beta[3] * b * d + beta[4] * b * b + beta[5] * d * d;
            csv.push_str(&format!("{b},{d},{t}\n"));
        }
    }
    let input = tmp.path().join("points.csv");
    fs::write(&input, csv).unwrap();
    let out = tmp.path().join("out");
    let o = consim(&[
        "--out",
        s(&out),
        "analyze",
        "surface",
        "-i",
        s(&input),
        "--b-column",
        "b",
        "--d-column",
        "d",
        "--t-column",
        "t",
        "--raw",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("surface.json")).unwrap()).unwrap();
    let fitted: Vec<f64> = json["surface"]["beta"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (f, b) in fitted.iter().zip(beta) {
        assert!((f - b).abs() <= 1e-9, "{fitted:?}");
    }
    assert_eq!(json["points"], 63);
    let grid = fs::read_to_string(out.join("surface_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 21 * 21);
}

#[test]
fn missing_columns_are_named() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("points.csv");
    fs::write(&input, "b,d,t\n0.1,0.2,3\n").unwrap();
    let o = consim(&[
        "analyze",
        "surface",
        "-i",
        s(&input),
        "--b-column",
        "b",
        "--d-column",
        "dd",
        "--t-column",
        "tt",
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("dd") && err.contains("tt"), "{err}");
}

#[test]
fn anova_with_one_bot_type_names_the_factor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_h": 60, "max_ticks": 30, "threshold_t": 5}"#);
    let sweep = tmp.path().join("e1");
    let o = consim(&[
        "-q",
        "--config",
        &cfg,
        "--out",
        s(&sweep),
        "sweep",
        "-e",
        "1",
        "-r",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = consim(&["analyze", "anova", "-i", s(&sweep.join("runs.csv"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("bot_type"), "{}", stderr(&o));
}

#[test]
fn graph_stats_reports_structure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_h": 100, "alpha1": 0.0}"#);
    let o = consim(&["--config", &cfg, "--out", s(tmp.path()), "graph-stats", "--edges"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("nodes              100"), "{}", stdout(&o));
    let edges = fs::read_to_string(tmp.path().join("edges.csv")).unwrap();
    let json: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("graph.json")).unwrap()).unwrap();
    assert_eq!(json["edges"], 500);
    assert!(edges.lines().count() >= 500);
}
