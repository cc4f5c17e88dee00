use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ffr_core::rate::LTE_MODES;
use tempfile::TempDir;

fn ffr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffr"))
        .current_dir(dir)
        .env_remove("FFR_OUT_DIR")
        .args(args)
        .output()
        .expect("ffr runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

#[test]
fn unknown_key_is_rejected_with_its_path() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "radio": {"tx_power": 46}}"#,
    );
    let o = ffr(tmp.path(), &["analyze", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radio.tx_power"), "{}", stderr(&o));
}

#[test]
fn schema_version_is_required_and_checked() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "a.json", r#"{"loads": [8]}"#);
    let o = ffr(tmp.path(), &["analyze", "--config", "a.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema_version"));

    write_config(tmp.path(), "b.json", r#"{"schema_version": 7}"#);
    let o = ffr(tmp.path(), &["analyze", "--config", "b.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema_version"));
}

#[test]
fn inadmissible_zeta0_suggests_nearest_value() {
    let tmp = TempDir::new().unwrap();
    let o = ffr(
        tmp.path(),
        &[
            "optimize", "--design", "fxd", "--zeta0", "0.5", "--out", "o",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("0.49"), "{}", stderr(&o));
}

#[test]
fn bad_flag_values_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let o = ffr(tmp.path(), &["optimize", "--design", "best"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ffr(
        tmp.path(),
        &["optimize", "--design", "qoscd", "--q", "1.5", "--out", "o"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_grid_size_and_determinism() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "schedulers": ["msinr"], "rate_models": ["dra"],
            "loads": [8, 32, 128], "omega_points": 50, "zeta": 1.0}"#,
    );
    for out in ["a", "b"] {
        let o = ffr(tmp.path(), &["analyze", "--config", "c.json", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let rows = csv_rows(&tmp.path().join("a/analyze.csv"));
    assert_eq!(rows.len(), 150);
    let header = csv::Reader::from_path(tmp.path().join("a/analyze.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        [
            "M",
            "omega",
            "zeta",
            "scheduler",
            "rate_model",
            "tau",
            "tau_centre",
            "tau_edge"
        ]
    );
    for r in &rows {
        assert_eq!(r[2].parse::<f64>().unwrap(), 1.0);
        assert_eq!(r[7].parse::<f64>().unwrap(), 0.0);
    }
    for f in ["analyze.csv", "analyze.json", "geometry.json"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
}

#[test]
fn output_directory_precedence() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "schedulers": ["rr"], "rate_models": ["cra"],
            "loads": [8], "omegas": [0.7], "output_dir": "from_config"}"#,
    );
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ffr"));
        cmd.current_dir(tmp.path()).env_remove("FFR_OUT_DIR");
        if let Some(e) = env {
            cmd.env("FFR_OUT_DIR", e);
        }
        let o = cmd
            .args(["analyze", "--config", "c.json"])
            .args(extra)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run(None, &[]);
    assert!(tmp.path().join("from_config/analyze.csv").exists());
    run(Some("from_env"), &[]);
    assert!(tmp.path().join("from_env/analyze.csv").exists());
    run(Some("from_env2"), &["--out", "from_flag"]);
    assert!(tmp.path().join("from_flag/analyze.csv").exists());
    assert!(!tmp.path().join("from_env2").exists());
}

#[test]
fn custom_mcs_table_matches_builtin() {
    let tmp = TempDir::new().unwrap();
    let mut buf = Vec::new();
    ffr::mcs::write_mcs_csv(&mut buf, &LTE_MODES).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("mode,bits_per_symbol,kappa1,kappa2,gamma_db\n"));
    fs::write(tmp.path().join("mcs.csv"), &text).unwrap();
    let read = ffr::mcs::read_mcs_csv(&tmp.path().join("mcs.csv")).unwrap();
    assert_eq!(read, LTE_MODES.to_vec());

    let base = r#""schema_version": 1, "schedulers": ["pf"], "rate_models": ["dra"], "loads": [16], "omegas": [0.4, 0.8]"#;
    write_config(tmp.path(), "a.json", &format!("{{{base}}}"));
    write_config(
        tmp.path(),
        "b.json",
        &format!(r#"{{{base}, "dra": {{"mcs_table": "mcs.csv"}}}}"#),
    );
    for (cfg, out) in [("a.json", "a"), ("b.json", "b")] {
        let o = ffr(tmp.path(), &["analyze", "--config", cfg, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(
        fs::read(tmp.path().join("a/analyze.csv")).unwrap(),
        fs::read(tmp.path().join("b/analyze.csv")).unwrap()
    );
}

#[test]
fn optimize_appends_ledger_rows() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "schedulers": ["msinr"], "rate_models": ["cra"], "loads": [8]}"#,
    );
    let o = ffr(
        tmp.path(),
        &[
            "optimize", "--config", "c.json", "--design", "apd", "--out", "o",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for q in ["0.02", "0.2"] {
        let o = ffr(
            tmp.path(),
            &[
                "optimize", "--config", "c.json", "--design", "qoscd", "--q", q, "--out", "o",
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ledger = fs::read_to_string(tmp.path().join("o/designs.csv")).unwrap();
    assert_eq!(
        ledger.lines().next().unwrap(),
        "design,scheduler,rate_model,M,q,omega_star,zeta_star,tau_star,feasible"
    );
    let rows = csv_rows(&tmp.path().join("o/designs.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][0], "apd");
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][6].parse::<f64>().unwrap(), 1.0);
    let tau = |r: &csv::StringRecord| r[7].parse::<f64>().unwrap();
    assert_eq!((&rows[1][0], &rows[1][4]), ("qoscd", "0.02"));
    assert_eq!(&rows[2][4], "0.2");
    assert!(tau(&rows[2]) <= tau(&rows[1]));
    assert!(rows[1..].iter().all(|r| &r[8] == "true"));
}

#[test]
fn simulate_reports_side_by_side() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "schedulers": ["rr"], "rate_models": ["cra", "dra"], "loads": [8],
            "seed": 5, "simulation": {"drops": 40, "slots_per_drop": 10, "omegas": [0.7]}}"#,
    );
    for out in ["a", "b"] {
        let o = ffr(
            tmp.path(),
            &["simulate", "--config", "c.json", "--out", out],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["simulate.json", "simulate_drops.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
    assert_eq!(csv_rows(&tmp.path().join("a/simulate_drops.csv")).len(), 80);
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/simulate.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let run = &v["runs"][0];
    assert!(run["dra_gap"].is_f64());
    for m in run["models"].as_array().unwrap() {
        for region in ["cell", "centre", "edge"] {
            assert!(m["relative_error"][region].is_f64(), "{region}");
        }
        assert!(m["ci_met"].is_boolean());
        assert_eq!(m["simulated"]["seed"], 5);
        assert_eq!(m["analytical"]["provenance"], "analytical");
    }

    let o = ffr(
        tmp.path(),
        &[
            "simulate", "--config", "c.json", "--seed", "6", "--out", "c",
        ],
    );
    assert!(o.status.success());
    let w: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("c/simulate.json")).unwrap()).unwrap();
    assert_eq!(w["seed"], 6);
    assert_ne!(w["config_hash"], v["config_hash"]);
}

#[test]
fn numerical_failure_exit_code() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"schema_version": 1, "schedulers": ["pf"], "rate_models": ["cra"], "loads": [8],
            "omegas": [0.7], "analysis": {"cra_abs_tol": 1e-300}}"#,
    );
    let o = ffr(tmp.path(), &["analyze", "--config", "c.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
