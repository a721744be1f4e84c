use std::path::Path;
use std::process::{Command, Output};

fn imog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imog"))
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

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn default_run_converges_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = imog(&[
        "run",
        "--problem",
        "biquadratic",
        "--u0",
        "3,2",
        "--lambda",
        "1",
        "--plot",
        "trajectory2d",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("stop: criticality"));
    for f in ["trajectory.csv", "report.json", "plot.gp"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["stop_reason"], "criticality");
    assert!(report["report"]["pareto_distance"].as_f64().unwrap() <= 1e-3);
    assert_eq!(report["config"]["initial"]["v0"]["lambda"], 1.0);
    let script = std::fs::read_to_string(out.join("plot.gp")).unwrap();
    assert!(script.contains("\"trajectory.csv\""));
    assert!(script.contains("$field"));
}

#[test]
fn max_steps_stop_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = imog(&[
        "run",
        "--problem",
        "biquadratic",
        "--u0",
        "3,2",
        "--max-steps",
        "1",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let (_, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 2);
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("stiff.json");
    std::fs::write(
        &problem,
        r#"{"dim": 1, "objectives": [{"name": "f", "expr": "5e5*x0^2", "grad": ["1e6*x0"]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = imog(&[
        "run",
        "--problem",
        path_str(&problem),
        "--u0",
        "1",
        "--h",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains("divergence"));
}

#[test]
fn malformed_config_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "biquadratic", "params": {"h": -1}, "initial": {"u0": [1, 1]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = imog(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("params.h"), "{}", stderr(&o));
    assert!(!out.exists());

    std::fs::write(&cfg, "{ not json").unwrap();
    let o = imog(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let o = imog(&[
        "run",
        "--problem",
        "biquadratic",
        "--u0",
        "1,1",
        "--lambda",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[0, 1]"));
    assert!(!out.exists());

    let o = imog(&[
        "run",
        "--problem",
        "biquadratic",
        "--u0",
        "1,1,1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let o = imog(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_stay_inside_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "biquadratic", "initial": {"u0": [1, 1]}, "outputs": {"csv": "../escape.csv"}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = imog(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outputs.csv"));
    assert!(!dir.path().join("escape.csv").exists());
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "biquadratic", "params": {"gamma": 1}, "initial": {"u0": [3, 2]}, "stop": {"max_steps": 5}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = imog(&[
        "run",
        "--config",
        path_str(&cfg),
        "--gamma",
        "2",
        "--max-steps",
        "10",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["params"]["gamma"], 2.0);
    assert_eq!(report["config"]["stop"]["max_steps"], 10);
    assert_eq!(report["report"]["steps"], 10);
}

#[test]
fn check_reports_margins() {
    let o = imog(&["check", "--problem", "biquadratic", "--gamma", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("f1: L = 1, margin = 3, satisfied"), "{text}");
    assert!(text.contains("f2: L = 1, margin = 3, satisfied"));
    assert!(text.contains("[0, 0.5]"));

    let o = imog(&["check", "--problem", "biquadratic", "--gamma", "0.1"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("margin = -0.99"));
}

#[test]
fn check_without_lipschitz_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    std::fs::write(
        &problem,
        r#"{"dim": 2, "objectives": [{"name": "g", "expr": "x0^2 + x1^4"}]}"#,
    )
    .unwrap();
    let o = imog(&["check", "--problem", path_str(&problem)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("lipschitz"));
}

#[test]
fn check_lists_gradient_failures() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    std::fs::write(
        &problem,
        r#"{"dim": 1, "objectives": [{"name": "cube", "expr": "x0^3", "grad": ["2*x0"], "lipschitz": 1}]}"#,
    )
    .unwrap();
    let o = imog(&["check", "--problem", path_str(&problem), "--gamma", "2"]);
    assert!(stdout(&o).contains("cube: FAILED"), "{}", stdout(&o));
}

#[test]
fn min_norm_examples() {
    let o = imog(&["min-norm", "(1,0)", "(-1,0)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("point: (0, 0)"));
    assert!(stdout(&o).contains("norm: 0\n"));

    let o = imog(&["min-norm", "(3,-4)"]);
    assert!(stdout(&o).contains("point: (3, -4)"));

    let o = imog(&["min-norm", "(1,0)", "(0,1)"]);
    assert!(stdout(&o).contains("point: (0.5, 0.5)"));
    assert!(stdout(&o).contains("norm: 0.7071067811865476"));

    let o = imog(&["min-norm", "(1,0)", "(0,1,2)"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("v.txt");
    std::fs::write(&file, "# gradients\n2,0\n0,2\n").unwrap();
    let o = imog(&["min-norm", "--file", path_str(&file)]);
    assert!(stdout(&o).contains("point: (1, 1)"), "{}", stdout(&o));
}

#[test]
fn list_problems_is_stable() {
    let a = imog(&["list-problems"]);
    let b = imog(&["list-problems"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let bq = text.lines().find(|l| l.starts_with("biquadratic")).unwrap();
    assert!(bq.contains("[−1,1]×{0}"));
    let ql = text
        .lines()
        .find(|l| l.starts_with("quadratic_linear"))
        .unwrap();
    assert!(ql.contains("(−∞,0]×{0}"));
    assert!(text.find("biquadratic").unwrap() < text.find("quadratic_linear").unwrap());
}

#[test]
fn single_run_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"template": {"problem": "biquadratic", "params": {"gamma": 2}},
            "n_runs": 1, "box": {"min": [3, 2], "max": [3, 2]}, "velocity": {"lambda": 0.5}}"#,
    )
    .unwrap();
    let sweep_out = dir.path().join("sweep");
    let o = imog(&[
        "sweep",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&sweep_out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run_out = dir.path().join("run");
    let o = imog(&[
        "run",
        "--problem",
        "biquadratic",
        "--gamma",
        "2",
        "--u0",
        "3,2",
        "--lambda",
        "0.5",
        "--out",
        path_str(&run_out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(sweep_out.join("runs/run_0000.csv")).unwrap(),
        std::fs::read(run_out.join("trajectory.csv")).unwrap()
    );
    let (_, rows) = csv_rows(&sweep_out.join("nondominated.csv"));
    assert_eq!(rows.len(), 1);
}

#[test]
fn sweeps_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = imog(&[
            "sweep",
            "--problem",
            "biquadratic",
            "--runs",
            "6",
            "--seed",
            seed,
            "--parallelism",
            "3",
            "--out",
            path_str(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (
            std::fs::read(out.join("summary.csv")).unwrap(),
            std::fs::read(out.join("nondominated.csv")).unwrap(),
            std::fs::read(out.join("index.json")).unwrap(),
        )
    };
    let a = go("a", "3");
    assert_eq!(a, go("b", "3"));
    assert_ne!(a.0, go("c", "4").0);
}

#[test]
fn quadratic_linear_sweep_lands_on_the_ray() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = imog(&[
        "sweep",
        "--problem",
        "quadratic_linear",
        "--h",
        "0.05",
        "--runs",
        "50",
        "--seed",
        "11",
        "--parallelism",
        "4",
        "--plot",
        "pareto_cloud",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&out.join("nondominated.csv"));
    assert!(!rows.is_empty());
    for (x, y) in column(&header, &rows, "u0")
        .into_iter()
        .zip(column(&header, &rows, "u1"))
    {
        assert!(x <= 1e-3 && y.abs() <= 1e-3, "({x}, {y})");
    }
    let script = std::fs::read_to_string(out.join("plot.gp")).unwrap();
    assert!(script.contains("\"nondominated.csv\""));
}

#[test]
fn biquadratic_sweep_of_100_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = imog(&[
        "sweep",
        "--problem",
        "biquadratic",
        "--runs",
        "100",
        "--seed",
        "2024",
        "--lambda",
        "1",
        "--parallelism",
        "4",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&out.join("summary.csv"));
    assert_eq!(rows.len(), 100);
    let worst = column(&header, &rows, "pareto_distance")
        .into_iter()
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["runs"].as_array().unwrap().len(), 100);
    assert_eq!(index["runs"][99]["csv"], "runs/run_0099.csv");
    assert!(out.join("runs/run_0099.csv").exists());
}
