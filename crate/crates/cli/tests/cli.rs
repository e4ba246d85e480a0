use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_guided-minimax"))
}

struct Run {
    code: i32,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let Output { status, stderr, .. } = bin().args(args).output().expect("binary runs");
    Run {
        code: status.code().expect("exit code"),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn cmd(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Run {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

const SQUARE: &str = r#"{"x_star": ["1/2", "1/2"], "y_star": [0.5, 0.5], "v": 1, "z": "2/5"}"#;
const SKEWED: &str = r#"{"x_star": ["1/4", "3/4"], "y_star": ["1/2", "1/2"], "v": 1}"#;

#[test]
fn design_writes_a_certified_equal_support_game() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SQUARE);
    let out = tmp.path().join("out");
    assert_eq!(cmd("design", &cfg, &out, &[]).code, 0);
    let game = read_json(&out.join("game.json"));
    assert_eq!(game["construction"], "EqualSupport");
    assert_eq!(game["matrix"], serde_json::json!([["3/5", "7/5"], ["7/5", "3/5"]]));
    let cert = &game["certificate"];
    for flag in ["pair_ok", "lemma_ok", "kkt_unique", "oracle_agrees", "unique_minimax"] {
        assert_eq!(cert[flag], true, "{flag}");
    }
}

#[test]
fn design_error_exits_two_with_its_name() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"x_star": [0.5, 0.5], "y_star": [1, 0], "v": 1}"#);
    let r = cmd("design", &cfg, tmp.path(), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("SupportTooSmall"), "{}", r.stderr);
}

#[test]
fn input_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let malformed = write_config(tmp.path(), "m.json", "{ not json");
    assert_eq!(cmd("design", &malformed, tmp.path(), &[]).code, 1);

    let off_simplex = write_config(tmp.path(), "s.json", r#"{"x_star": [0.5, 0.6], "y_star": [0.5, 0.5], "v": 1}"#);
    assert_eq!(cmd("design", &off_simplex, tmp.path(), &[]).code, 1);

    let missing = tmp.path().join("absent.json");
    assert_eq!(cmd("design", &missing, tmp.path(), &[]).code, 1);

    let mismatch = write_config(
        tmp.path(),
        "d.json",
        r#"{"matrix": [[1, 2], [3, 4]], "x_star": [0.5, 0.25, 0.25], "y_star": [0.5, 0.5]}"#,
    );
    assert_eq!(cmd("verify", &mismatch, tmp.path(), &[]).code, 1);

    let zero = write_config(tmp.path(), "t.json", &SKEWED.replace('}', r#", "horizon": 0}"#));
    assert_eq!(cmd("simulate", &zero, &tmp.path().join("sim"), &[]).code, 1);
}

#[test]
fn verify_accepts_the_square_example() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "v.json",
        r#"{"matrix": [[0.6, 1.4], [1.4, 0.6]], "x_star": [0.5, 0.5], "y_star": [0.5, 0.5]}"#,
    );
    assert_eq!(cmd("verify", &cfg, tmp.path(), &[]).code, 0);
    let cert = read_json(&tmp.path().join("certificate.json"));
    assert_eq!(cert["value"], "1/1");
    assert_eq!(cert["witness"], Value::Null);
}

#[test]
fn verify_rejects_all_ones_and_keeps_the_witness() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "v.json",
        r#"{"matrix": [[1, 1], [1, 1]], "x_star": [0.5, 0.5], "y_star": [0.5, 0.5]}"#,
    );
    assert_eq!(cmd("verify", &cfg, tmp.path(), &[]).code, 3);
    let cert = read_json(&tmp.path().join("certificate.json"));
    assert_eq!(cert["pair_ok"], true);
    assert_eq!(cert["lemma_ok"], false);
    assert_eq!(cert["kkt_unique"], false);
    assert_eq!(cert["oracle_agrees"], true);
    assert!(cert["witness"].as_array().is_some_and(|w| !w.is_empty()));
}

#[test]
fn design_then_verify_reproduces_the_certificate() {
    let tmp = TempDir::new().unwrap();
    for (i, body) in [
        SQUARE,
        SKEWED,
        r#"{"x_star": [0.5, 0.5, 0], "y_star": ["2/5", "2/5", "1/5"], "v": "3/2"}"#,
        r#"{"x_star": [0, 1, 0], "y_star": [0.2, 0.3, 0.5], "v": 2}"#,
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("c{i}.json"), body);
        let out = tmp.path().join(format!("o{i}"));
        assert_eq!(cmd("design", &cfg, &out, &[]).code, 0);
        let game_file = out.join("game.json");
        assert_eq!(cmd("verify", &game_file, &out, &[]).code, 0);
        let designed = read_json(&game_file)["certificate"].clone();
        assert_eq!(designed, read_json(&out.join("certificate.json")));
    }
}

#[test]
fn decimal_and_fraction_inputs_are_the_same_numbers() {
    let tmp = TempDir::new().unwrap();
    let a = write_config(tmp.path(), "a.json", r#"{"x_star": [0.25, 0.75], "y_star": ["0.5", 0.5], "v": 1.0}"#);
    let b = write_config(tmp.path(), "b.json", SKEWED);
    assert_eq!(cmd("design", &a, &tmp.path().join("a"), &[]).code, 0);
    assert_eq!(cmd("design", &b, &tmp.path().join("b"), &[]).code, 0);
    assert_eq!(
        fs::read(tmp.path().join("a/game.json")).unwrap(),
        fs::read(tmp.path().join("b/game.json")).unwrap()
    );
}

#[test]
fn float_mode_writes_numbers() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SQUARE);
    assert_eq!(cmd("design", &cfg, tmp.path(), &["--mode", "float"]).code, 0);
    let game = read_json(&tmp.path().join("game.json"));
    assert_eq!(game["matrix"][0][0].as_f64(), Some(0.6));
    assert_eq!(game["value"].as_f64(), Some(1.0));
}

#[test]
fn short_simulation_has_the_fixed_schema() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &SQUARE.replace('}', r#", "horizon": 10, "learner": {"kind": "mwu"}}"#));
    let out = tmp.path().join("sim");
    assert_eq!(cmd("simulate", &cfg, &out, &[]).code, 0);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,mode,alpha,f_gap,dist_to_target,payoff,x_0,x_1,y_0,y_1");
    assert_eq!(lines.len(), 11);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "Guiding");
    assert_eq!(first[2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(&first[8..], &["0.5", "0.5"]);

    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["rounds_played"], 10);
    assert_eq!(summary["lock_round"], 1);
    assert_eq!(summary["eps_nash_round"], 1);
    assert!(summary["regret"]["row_regret"].is_number());
    assert!(summary["final_distance"].is_number());
}

#[test]
fn constant_column_leaves_the_distance_unchanged() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &SKEWED.replace('}', r#", "horizon": 500, "policy": "constant-ystar"}"#),
    );
    assert_eq!(cmd("simulate", &cfg, tmp.path(), &[]).code, 0);
    let summary = read_json(&tmp.path().join("summary.json"));
    assert_eq!(summary["rounds_played"], 500);
    assert_eq!(summary["final_distance"], summary["initial_distance"]);
    assert!((summary["final_distance"].as_f64().unwrap() - 0.125f64.sqrt()).abs() < 1e-12);
    assert_eq!(summary["lock_round"], Value::Null);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &SKEWED.replace('}', r#", "horizon": 2000, "learner": {"kind": "ftrl-euclidean", "schedule": "constant"}}"#),
    );
    for name in ["a", "b"] {
        assert_eq!(cmd("simulate", &cfg, &tmp.path().join(name), &[]).code, 0);
    }
    for file in ["trajectory.csv", "summary.json", "game.json"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(file)).unwrap(),
            fs::read(tmp.path().join("b").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn explicit_matrix_needs_a_certificate_unless_trusted() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"matrix": [[1, 1], [1, 1]], "x_star": [0.5, 0.5], "y_star": [0.5, 0.5], "horizon": 20}"#,
    );
    let checked = tmp.path().join("checked");
    assert_eq!(cmd("simulate", &cfg, &checked, &[]).code, 3);
    assert!(checked.join("certificate.json").exists());
    assert!(!checked.join("trajectory.csv").exists());

    let trusted = tmp.path().join("trusted");
    assert_eq!(cmd("simulate", &cfg, &trusted, &["--trust"]).code, 0);
    assert!(trusted.join("trajectory.csv").exists());
}

#[test]
fn sweep_writes_one_directory_per_match() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"horizon": 5000, "seed": 11, "sweep_max_dim": 3, "learner": {"kind": "mwu", "schedule": "constant"}}"#,
    );
    let out = tmp.path().join("sweep");
    assert_eq!(cmd("simulate", &cfg, &out, &["--sweep", "3"]).code, 0);
    let rows = read_json(&out.join("sweep.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["index"], i);
        assert_eq!(row["seed"], 11 + i);
        let dir = out.join(format!("match_{i:04}"));
        for file in ["game.json", "trajectory.csv", "summary.json"] {
            assert!(dir.join(file).exists(), "{}", dir.join(file).display());
        }
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
    assert_eq!(run(&["simulate", "--help"]).code, 0);
    assert_eq!(run(&["frobnicate"]).code, 1);
}
