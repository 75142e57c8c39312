use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_unraveling-lab");

const X00: &str = r#"{"family": {"family": "x00_two_time",
    "params": {"epsilon": 1.0, "s_plus": 0.4, "s_minus": 0.2, "beta": 0.7}},
    "params": {"alphas": {"lo": -2, "hi": 3, "n": 11}}}"#;

const KS: &str = r#"{"family": {"family": "keep_switch", "params": {"q1": 0.6, "q2": 0.3}}, "params": {"t": 14}}"#;

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str], cfg: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env("RUST_LOG", "warn").env_remove("UNRAVELING_LAB_PRECISION_BITS");
    if let Some(p) = cfg {
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The CSV body (header comments stripped) as a column-indexed table.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    (cols, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn summary(text: &str) -> Value {
    let line = text.lines().find_map(|l| l.strip_prefix("# summary: ")).unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn pressure_on_x00_matches_closed_form() {
    let cfg = config(X00);
    let text = stdout(&run(&["pressure"], Some(cfg.path())));
    let (cols, rows) = csv_rows(&text);
    assert_eq!(cols, ["alpha", "e_numeric", "e_closed_form", "abs_diff"]);
    assert_eq!(rows.len(), 11);
    let max = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(max <= 1e-10, "{max}");
}

#[test]
fn gibbs_diagnostic_on_keep_switch_clears_the_finite_horizon_bound() {
    let cfg = config(KS);
    let text = stdout(&run(&["gibbs-diag"], Some(cfg.path())));
    let (_, rows) = csv_rows(&text);
    let value: f64 = rows[0][1].parse().unwrap();
    let t = 14.0;
    assert!(value >= 0.9 * 0.5 * 2f64.ln() * (1.0 - 5.0 / t), "{value}");
}

#[test]
fn conversion_to_hm_round_trips_word_masses() {
    let cfg = config(r#"{"family": {"family": "keep_switch", "params": {"q1": 0.6, "q2": 0.3}}}"#);
    let out: Value = serde_json::from_str(&stdout(&run(&["convert", "--to", "hm"], Some(cfg.path())))).unwrap();
    assert_eq!(out["rows"].as_array().unwrap().len(), 256);
    assert!(out["summary"]["max_abs_diff"].as_f64().unwrap() <= 1e-12);
    let hm = &out["summary"]["spec"];
    assert_eq!(hm["kind"], "hm");

    // Feed the emitted HM document back in and convert it to a PMP.
    let back = config(&serde_json::json!({ "measure": hm }).to_string());
    let again: Value = serde_json::from_str(&stdout(&run(&["convert", "--to", "pmp"], Some(back.path())))).unwrap();
    assert!(again["summary"]["max_abs_diff"].as_f64().unwrap() <= 1e-12);
    for (a, b) in out["rows"].as_array().unwrap().iter().zip(again["rows"].as_array().unwrap()) {
        assert_eq!(a[0], b[0]);
        assert!((a[1].as_f64().unwrap() - b[2].as_f64().unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn same_seed_gives_identical_bytes_for_any_worker_count() {
    let cfg = config(r#"{"family": {"family": "keep_switch", "params": {"q1": 0.6, "q2": 0.3}},
        "params": {"t": 200, "n": 2000}, "seed": 11}"#);
    let a = run(&["clt", "--workers", "1"], Some(cfg.path())).stdout;
    let b = run(&["clt", "--workers", "3"], Some(cfg.path())).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let c = run(&["clt", "--seed", "12"], Some(cfg.path())).stdout;
    assert_ne!(a, c);
}

#[test]
fn header_records_config_hash_and_version() {
    let cfg = config(KS);
    let a = stdout(&run(&["info"], Some(cfg.path())));
    let b = stdout(&run(&["info", "--seed", "9"], Some(cfg.path())));
    let hash = |s: &str| s.lines().find_map(|l| l.strip_prefix("# config_sha256: ")).unwrap().to_string();
    assert_eq!(hash(&a).len(), 64);
    assert_ne!(hash(&a), hash(&b));
    assert!(a.contains(&format!("# library_version: {}\n", env!("CARGO_PKG_VERSION"))));
    assert!(!a.contains('\r'));
}

#[test]
fn csv_numbers_carry_seventeen_significant_digits() {
    let cfg = config(X00);
    let text = stdout(&run(&["pressure"], Some(cfg.path())));
    let (_, rows) = csv_rows(&text);
    for cell in rows.iter().flatten() {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
    }
}

#[test]
fn output_file_and_json_format() {
    let cfg = config(KS);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ep.json");
    let o = run(&["ep", "--format", "json", "--out", path.to_str().unwrap()], Some(cfg.path()));
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["provenance"]["task"], "ep");
    assert_eq!(v["columns"][0], "method");
}

#[test]
fn schema_errors_exit_with_two() {
    let unsorted = config(r#"{"family": {"family": "keep_switch", "params": {"q1": 0.6, "q2": 0.3}},
        "params": {"alphas": [0.5, 0.0]}}"#);
    assert_eq!(run(&["pressure"], Some(unsorted.path())).status.code(), Some(2));
    let unknown = config(r#"{"params": {"alpah": [0.5]}}"#);
    assert_eq!(run(&["pressure"], Some(unknown.path())).status.code(), Some(2));
    let bad_family = config(r#"{"family": {"family": "keep_switch", "params": {"q1": 1.6, "q2": 0.3}}}"#);
    assert_eq!(run(&["info"], Some(bad_family.path())).status.code(), Some(2));
    let wrong_task = config(r#"{"task": "ep"}"#);
    assert_eq!(run(&["pressure"], Some(wrong_task.path())).status.code(), Some(2));
    assert_eq!(run(&["info"], None).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_with_three() {
    let cfg = config(KS);
    let o = run(&["enumerate", "--budget", "50"], Some(cfg.path()));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divergent_pressure_is_reported_with_infinite_markers() {
    let o = run(&["rotational", "probe"], None);
    let text = stdout(&o);
    let s = summary(&text);
    for v in s["verdicts"].as_array().unwrap() {
        assert_eq!(v["e"], "inf");
    }
    assert!(csv_rows(&text).1.iter().all(|r| r.last().unwrap() == "inf"));
}

#[test]
fn run_takes_the_task_from_the_configuration() {
    let cfg = config(r#"{"task": "fdr", "params": {"ts": [4]}}"#);
    let text = stdout(&run(&["run"], Some(cfg.path())));
    assert!(text.contains("# task: fdr\n"));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows[0][0], "4");
    let gap: f64 = rows[0][9].parse().unwrap();
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn construct_delta_emits_a_json_certificate() {
    let o = run(&["rotational", "construct-delta", "--gamma", "T2", "--interval", "0.3,0.4"], None);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["growth"], "T2");
    assert_eq!(v["summary"]["in_interval"], true);
    let delta = v["summary"]["delta"].as_f64().unwrap();
    assert!(delta > 0.3 && delta < 0.4);
    assert!(v["summary"]["continued_fraction"]["quotients"].as_array().unwrap().len() >= 3);
}

#[test]
fn precision_override_is_validated() {
    let o = Command::new(BIN)
        .args(["rotational", "derivative"])
        .env("UNRAVELING_LAB_PRECISION_BITS", "7")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN)
        .args(["rotational", "derivative"])
        .env("UNRAVELING_LAB_PRECISION_BITS", "128")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\"precision_bits\":128"));
}
