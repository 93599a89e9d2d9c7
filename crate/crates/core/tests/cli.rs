use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn desk() -> Value {
    json!({
        "problem": {"name": "logistic_memory", "params": {"lambda": 1.0, "kappa": 0.5, "sigma": 0.5}},
        "grid": {"nx": 64, "nt": 64},
        "decomposition": {"i1_hi": 40, "i2_lo": 24},
        "solver": {"tol": 1e-8, "max_sweeps": 200, "c_margin": 1e-6, "n_samples": 8},
        "output": {"solution_csv": "solution.csv", "history_csv": "history.csv"}
    })
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn monodd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monodd"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_desk_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "desk.json", &desk());
    let out = monodd(&["--audit-mmatrix", "run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("converged=true"));

    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep,gap_lower_upper,max_update,chain_violation,wall_ms"
    );
    let gaps: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!gaps.is_empty());
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    assert!(*gaps.last().unwrap() <= 1e-8);

    let solution = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(solution.lines().next().unwrap(), "t,x,u,u_lower,u_upper");
    assert_eq!(solution.lines().count(), 1 + 65 * 65);
}

#[test]
fn crossed_interfaces_are_invalid_config() {
    let dir = TempDir::new().unwrap();
    let mut value = desk();
    value["decomposition"] = json!({"i1_hi": 24, "i2_lo": 40});
    let cfg = write_config(dir.path(), "bad.json", &value);
    let out = monodd(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("decomposition.i2_lo"), "{}", stderr(&out));
}

#[test]
fn unknown_field_and_usage_errors_are_invalid_config() {
    let dir = TempDir::new().unwrap();
    let mut value = desk();
    value["solver"]["relaxation"] = json!(0.5);
    let cfg = write_config(dir.path(), "extra.json", &value);
    assert_eq!(code(&monodd(&["run", cfg.to_str().unwrap()])), 3);
    assert_eq!(code(&monodd(&["frobnicate"])), 3);
    assert_eq!(code(&monodd(&["--help"])), 0);
}

#[test]
fn sweep_budget_exhausted() {
    let dir = TempDir::new().unwrap();
    let mut value = desk();
    value["solver"]["max_sweeps"] = json!(1);
    value["solver"]["tol"] = json!(1e-12);
    let cfg = write_config(dir.path(), "short.json", &value);
    let out = monodd(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "desk.json", &desk());
    let out = monodd(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("supersolution: passed=true"));

    let mut value = desk();
    value["problem"]["params"]["u_tilde"] = json!(0.1);
    let cfg = write_config(dir.path(), "low.json", &value);
    let out = monodd(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", stdout(&out));
    assert!(stdout(&out).contains("supersolution: passed=false"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&monodd(&["verify", missing.to_str().unwrap()])), 3);
}

fn order_config(grids: Value, max_sweeps: usize) -> Value {
    json!({
        "problem": {"name": "manufactured_1"},
        "grid": {"nx": 16, "nt": 16},
        "grids": grids,
        "decomposition": {"i1_hi": 10, "i2_lo": 6},
        "solver": {"tol": 1e-10, "max_sweeps": max_sweeps}
    })
}

#[test]
fn order_rows() {
    let dir = TempDir::new().unwrap();
    let grids = json!([{"nx": 16, "nt": 16}, {"nx": 32, "nt": 32}, {"nx": 64, "nt": 64}]);
    let cfg = write_config(dir.path(), "order.json", &order_config(grids, 400));
    let out = monodd(&["order", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "nx,nt,max_error,sweeps,observed_order");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].ends_with(','));
    let orders: Vec<f64> = rows[2..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(orders.len(), 2);
    assert!(orders.iter().all(|&p| p > 0.9), "{orders:?}");

    let single = json!([{"nx": 16, "nt": 16}]);
    let cfg = write_config(dir.path(), "one.json", &order_config(single, 400));
    let out = monodd(&["order", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 2);
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with(','));

    let cfg = write_config(
        dir.path(),
        "short.json",
        &order_config(json!([{"nx": 16, "nt": 16}, {"nx": 32, "nt": 32}]), 1),
    );
    assert_eq!(code(&monodd(&["order", cfg.to_str().unwrap()])), 2);
}

#[test]
fn identical_configs_give_identical_csvs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let ca = write_config(a.path(), "desk.json", &desk());
    let cb = write_config(b.path(), "desk.json", &desk());
    assert_eq!(code(&monodd(&["run", ca.to_str().unwrap()])), 0);
    assert_eq!(
        code(&monodd(&["--sequential-branches", "run", cb.to_str().unwrap()])),
        0
    );
    let read = |d: &TempDir, f: &str| fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "solution.csv"), read(&b, "solution.csv"));

    // wall_ms is a clock reading; the remaining history columns must match.
    let strip = |bytes: Vec<u8>| -> Vec<String> {
        String::from_utf8(bytes)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(read(&a, "history.csv")), strip(read(&b, "history.csv")));
}

#[test]
fn csv_numbers_round_trip() {
    let dir = TempDir::new().unwrap();
    let mut value = desk();
    value["grid"] = json!({"nx": 8, "nt": 8});
    value["decomposition"] = json!({"i1_hi": 5, "i2_lo": 3});
    let cfg = write_config(dir.path(), "small.json", &value);
    assert_eq!(code(&monodd(&["run", cfg.to_str().unwrap()])), 0);
    let solution = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for line in solution.lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(monodd::cli::fmt_num(v), field);
        }
    }
    for v in [0.1, 1.0 / 3.0, -2.5e-300, f64::MIN_POSITIVE, 1e300] {
        let s = monodd::cli::fmt_num(v);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
    }
}
