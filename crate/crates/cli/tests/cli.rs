use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use singstrat::examples::kernel_pair;
use singstrat::fields::Grid;
use singstrat::geometry::Ball;

fn singstrat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singstrat")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const FIVE_CENTERS: &str = r#"
[field]
example = "riesz_sum"
n = 3
p = 3
centers = [[0, 0, 0], [0.5, 0, 0], [-0.5, 0, 0], [0, 0.5, 0], [0, -0.5, 0]]

[analysis]
c = 0.8
grid_step = 0.05
"#;

#[test]
fn count_finds_five_components() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "count.toml", FIVE_CENTERS);
    let csv = dir.path().join("points.csv");
    let r = report(&singstrat(&["count", "--config", &cfg, "--csv", csv.to_str().unwrap()]));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "count");
    assert_eq!(r["result"]["components"], 5);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("x1,x2,x3,theta\n"));
    assert_eq!(text.lines().count() as u64, 1 + r["result"]["points"].as_u64().unwrap());
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "count.toml", FIVE_CENTERS);
    let r = report(&singstrat(&["count", "--config", &cfg, "--search_radius", "0.2", "--pretty", "false"]));
    assert_eq!(r["result"]["components"], 1);
    assert_eq!(r["config"]["analysis"]["search_radius"], 0.2);
}

#[test]
fn constant_field_has_zero_g_energy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let out = singstrat(&[
        "energy",
        "--example",
        "constant",
        "--value",
        "2.5",
        "--n",
        "3",
        "--p",
        "2",
        "--radii",
        "0.1,0.2,0.3",
        "--samples",
        "16",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let r = report(&out);
    let g = &r["result"]["theta_g"];
    assert!(g["values"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    assert_eq!(g["monotone"], true);
    let text = fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows, ["profile,r,value", "theta_g,0.1,0", "theta_g,0.2,0", "theta_g,0.3,0"]);
}

#[test]
fn minkowski_slope_of_a_line_kernel() {
    let r = report(&singstrat(&[
        "minkowski",
        "--example",
        "plane_kernel",
        "--n",
        "4",
        "--p",
        "3",
        "--axes",
        "[0]",
        "--eta",
        "0.9",
        "--radii",
        "0.05,0.1,0.2",
    ]));
    let rep = &r["result"]["report"];
    let slope = rep["slope"].as_f64().unwrap();
    assert!((slope - 3.0).abs() <= 0.3, "slope {slope}");
    assert_eq!(rep["bounded"], true);
}

#[test]
fn grid_input_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let u = kernel_pair(3, 3.0).unwrap();
    let grid = Grid::sample(&u, 41, &Ball::centered(3, 1.0)).unwrap();
    let mut buf = Vec::new();
    grid.write_csv(&mut buf).unwrap();
    let path = dir.path().join("grid.csv");
    fs::write(&path, buf).unwrap();
    let r = report(&singstrat(&[
        "density",
        "--example",
        "grid",
        "--grid_file",
        path.to_str().unwrap(),
        "--p",
        "3",
        "--x",
        "[0.3,0.3,0]",
        "--ladder_max",
        "0.2",
    ]));
    assert_eq!(r["result"]["mode"], "points");
    assert!(r["result"]["points"][0]["estimate"]["theta_s"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(singstrat(&["density", "--no_such_key", "1"]).status.code(), Some(2));
    assert_eq!(singstrat(&["density", "--eta"]).status.code(), Some(2));
    assert_eq!(singstrat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(singstrat(&["count", "--example", "nonsense"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[field\nn = 3");
    assert_eq!(singstrat(&["count", "--config", &bad]).status.code(), Some(2));
    let wrong = write(dir.path(), "wrong.toml", "[analysis]\neta = \"high\"");
    assert_eq!(singstrat(&["count", "--config", &wrong]).status.code(), Some(2));
}

#[test]
fn infeasible_analysis_exits_three() {
    let out = singstrat(&["density", "--x", "[2.95,0,0]"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_selected_criteria() {
    let out = singstrat(&["verify", "--criteria", "1,10", "--pretty", "false"]);
    let r = report(&out);
    assert_eq!(r["result"]["passed"], true);
    assert_eq!(r["result"]["criteria"].as_array().unwrap().len(), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    assert_eq!(singstrat(&["verify", "--criteria", "0"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "count.toml", FIVE_CENTERS);
    let a = singstrat(&["count", "--config", &cfg]);
    let b = singstrat(&["count", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let json = dir.path().join("r.json");
    let out = singstrat(&["count", "--config", &cfg, "--json", json.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(fs::read(json).unwrap(), a.stdout);
}
