use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn oscsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscsync")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn triangle(dir: &Path, weight: f64) -> String {
    let g = dir.join("g.json");
    fs::write(&g, format!(r#"{{"n":3,"edges":[[0,1,{weight}],[1,2,{weight}],[0,2,{weight}]]}}"#)).unwrap();
    path(&g).to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&oscsync(&["--help"])), 0);
    assert_eq!(code(&oscsync(&["--version"])), 0);
    assert_eq!(code(&oscsync(&["warp"])), 1);
    assert_eq!(code(&oscsync(&[])), 1);
    assert_eq!(code(&oscsync(&["check", "--gamma", "1"])), 1);
}

#[test]
fn check_prints_reports() {
    let dir = tempfile::tempdir().unwrap();
    let g = triangle(dir.path(), 2.0);
    let w = dir.path().join("w.json");
    fs::write(&w, "[-1, 0, 1]").unwrap();
    let out = oscsync(&["check", "--graph", &g, "--omega", path(&w), "--coupling", "3"]);
    assert_eq!(code(&out), 0);
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let names: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["necessary_absolute", "necessary_incremental", "theorem4_connectivity", "theorem5_connectivity", "kuramoto_explicit"]
    );
    assert!(reports.as_array().unwrap().iter().all(|r| r["verdict"] == "satisfied"));
    assert_eq!(reports[4]["threshold"], 2.0);

    let weak = oscsync(&["check", "--graph", &triangle(dir.path(), 0.1), "--omega", "-1,0,1"]);
    assert_eq!(code(&weak), 0);
    let reports: serde_json::Value = serde_json::from_str(&stdout(&weak)).unwrap();
    assert_eq!(reports[0]["verdict"], "violated");

    assert_eq!(code(&oscsync(&["check", "--omega", "1,2"])), 1);
    assert_eq!(code(&oscsync(&["check", "--graph", &g, "--omega", "1,2"])), 1);
}

#[test]
fn simulate_writes_trajectory_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = oscsync(&[
        "simulate", "--model", "kuramoto", "--K", "3", "--omega", "-1,0,1", "--horizon", "40", "--out", path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["frequency_synced"], true);
    assert!(verdict["sync_frequency"].as_f64().unwrap().abs() < 1e-6);
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 100);
    assert_eq!(fs::read_to_string(out_dir.join("verdict.json")).unwrap(), stdout(&out));

    // below the critical coupling the frequencies never lock
    let drift = oscsync(&["simulate", "--model", "kuramoto", "--K", "0.5", "--omega", "-1,0,1", "--horizon", "40"]);
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&drift)).unwrap();
    assert_eq!(verdict["frequency_synced"], false);

    assert_eq!(code(&oscsync(&["simulate", "--model", "kuramoto", "--omega", "1,2"])), 1);
    assert_eq!(code(&oscsync(&["simulate", "--model", "kuramoto", "--K", "1", "--omega", "1,2", "--step", "0"])), 1);
}

#[test]
fn simulate_model_file() {
    let dir = tempfile::tempdir().unwrap();
    triangle(dir.path(), 1.0);
    let model = dir.path().join("m.json");
    fs::write(&model, r#"{"kind":"second_order","graph":"g.json","omega":[0.2,0,-0.2],"inertia":[1,1,1],"damping":[1,1,1]}"#)
        .unwrap();
    let out = oscsync(&["simulate", "--model", path(&model), "--theta0", "0.3,0,-0.3", "--horizon", "60"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["frequency_synced"], true);
}

#[test]
fn equilibrium_solve_classify_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let g = triangle(dir.path(), 2.0);
    let out = oscsync(&["equilibrium", "--graph", &g, "--omega", "0.1,0,-0.1"]);
    assert_eq!(code(&out), 0);
    let eq: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(eq["stability"], "stable");
    assert!(eq["residual"].as_f64().unwrap() < 1e-9);

    let out = oscsync(&["equilibrium", "--graph", &g, "--omega", "0,0,0", "--theta", "0,0,0"]);
    assert!(stdout(&out).contains("\"stable\""));

    // far beyond the absolute bound no equilibrium exists
    assert_eq!(code(&oscsync(&["equilibrium", "--graph", &g, "--omega", "5,0,-5"])), 2);
}

#[test]
fn fig7_requires_seed_and_trials() {
    assert_eq!(code(&oscsync(&["fig7", "--n", "2,5", "--trials", "5"])), 1);
    assert_eq!(code(&oscsync(&["fig7", "--n", "2,5", "--seed", "1"])), 1);
    assert_eq!(code(&oscsync(&["fig7", "--n", "1,5", "--seed", "1", "--trials", "5"])), 1);
    assert_eq!(code(&oscsync(&["fig7", "--n", "2,5", "--seed", "1", "--trials", "5", "--svg"])), 1);
}

#[test]
fn fig7_stdout_is_deterministic() {
    let args = ["fig7", "--n", "2:40:log:5", "--trials", "30", "--seed", "7"];
    let a = oscsync(&args);
    let b = oscsync(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,mean_necessary,mean_exact,mean_sufficient,trials,failures"));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(f[1] <= f[2] && f[2] <= f[3], "{line}");
        assert_eq!(f[4], 30.0);
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("res");
    let cfg = dir.path().join("fig7.toml");
    fs::write(
        &cfg,
        format!(
            "experiment = \"fig7\"\nn_grid = \"3,6\"\ntrials = 12\nseed = 3\nout = {:?}\nsvg = true\n[distribution]\nkind = \"bipolar\"\nmagnitude = 0.5\n",
            path(&out_dir)
        ),
    )
    .unwrap();
    let out = oscsync(&["fig7", "--config", path(&cfg), "--trials", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("fig7.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[4] == "4"));
    // bipolar frequencies: the sufficient bound is the full width 1
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() == 1.0));
    assert!(fs::read_to_string(out_dir.join("fig7.svg")).unwrap().starts_with("<svg"));

    let wrong = dir.path().join("v.toml");
    fs::write(&wrong, "experiment = \"vehicles\"\nseed = 1\ntrials = 1\n").unwrap();
    assert_eq!(code(&oscsync(&["fig7", "--config", path(&wrong)])), 1);
    let unknown = dir.path().join("u.toml");
    fs::write(&unknown, "seed = 1\ntrials = 1\nspeed = 3\n").unwrap();
    assert_eq!(code(&oscsync(&["fig7", "--config", path(&unknown)])), 1);
    let json = dir.path().join("c.json");
    fs::write(&json, r#"{"seed": 2, "trials": 3, "n_grid": [2, 4]}"#).unwrap();
    let out = oscsync(&["fig7", "--config", path(&json)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn bifurcation_sweep_needs_no_seed() {
    let out = oscsync(&["bifurcation2", "--kappas", "0.9,1.25", "--delta0", "0.1", "--horizon", "60"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][3], "revolving");
    assert_eq!(rows[1][3], "converged");
    assert!((rows[1][2].parse::<f64>().unwrap() - 0.8f64.asin()).abs() < 1e-6);
}

#[test]
fn vehicles_and_balance_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = oscsync(&[
        "vehicles", "--gain", "-1", "--seed", "5", "--trials", "3", "--horizon", "150", "--out", path(dir.path()), "--svg",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("vehicles.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let r: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r < 0.05, "{line}");
    }
    let traj = fs::read_to_string(dir.path().join("vehicles_trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,theta_0"));
    assert!(dir.path().join("vehicles.svg").exists());

    let out = oscsync(&["balance", "--n", "5", "--seed", "2", "--trials", "10", "--horizon", "100"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("trial,final_r,splay_distance,balanced"));
    assert!(text.lines().skip(1).filter(|l| l.ends_with("true")).count() >= 9);

    let path_graph = dir.path().join("p.json");
    fs::write(&path_graph, r#"{"n":3,"edges":[[0,1,1],[1,2,1]]}"#).unwrap();
    let out = oscsync(&["balance", "--graph", path(&path_graph), "--seed", "2", "--trials", "2", "--horizon", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn powergrid_reports_sync_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("grid.json");
    fs::write(
        &model,
        r#"{"kind":"power","graph":{"n":4,"edges":[[0,2,5],[1,3,5],[2,3,5],[0,1,5]]},
            "buses":[{"kind":"inverter","power":1.0,"damping":1.0},{"kind":"inverter","power":0.5,"damping":2.0},
                     {"kind":"load","demand":0.7,"damping":1.0},{"kind":"load","demand":0.4,"damping":1.0}]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("pg");
    let out = oscsync(&["powergrid", "--model", path(&model), "--horizon", "60", "--out", path(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["frequency_synced"], true);
    assert!((report["expected_frequency"].as_f64().unwrap() - 0.4 / 5.0).abs() < 1e-12);
    assert!(report["frequency_error"].as_f64().unwrap() < 1e-6);
    assert!(out_dir.join("powergrid.csv").exists());
    assert_eq!(code(&oscsync(&["powergrid"])), 1);
}
