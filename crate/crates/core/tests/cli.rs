use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qprob(args: &[&str]) -> Output {
    qprob_env(args, &[])
}

fn qprob_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qprob"));
    cmd.args(args).env_remove("QPROB_SEED").env_remove("QPROB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("qprob runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn max_entangled_preset_has_no_interference() {
    let o = qprob(&["prospect", "--preset", "max-entangled", "--m", "2", "--weights", "0.7071,0.7071"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!(close(&floats(&r["raw"]["q"]), &[0.0, 0.0], 1e-15));
    assert!(close(&floats(&r["normalized"]["q"]), &[0.0, 0.0], 1e-15));
    assert_eq!(r["checks"]["zero_interference"], Value::Bool(true));
    assert_eq!(r["entanglement_measure"].as_f64(), Some(1.0));
}

#[test]
fn bell_like_preset() {
    let o = qprob(&["prospect", "--preset", "bell-like"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["primary"], "raw");
    assert!(close(&floats(&r["raw"]["p"]), &[0.5, 0.0], 1e-12));
    assert!(close(&floats(&r["raw"]["f"]), &[0.25, 0.25], 1e-12));
    assert!(close(&floats(&r["raw"]["q"]), &[0.25, -0.25], 1e-12));
    assert!(close(&floats(&r["normalized"]["q"]), &[0.5, -0.5], 1e-12));
    assert_eq!(r["checks"]["raw_decomposition"], Value::Bool(true));
    assert_eq!(r["checks"]["normalized_axioms"], Value::Bool(true));

    let o = qprob(&["prospect", "--preset", "bell-like", "--normalized"]);
    assert_eq!(json(&o)["primary"], "normalized");
}

#[test]
fn product_preset_interferes_only_before_normalization() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "product.json",
        r#"{"preset": "product", "rho_a": {"diagonal": [0.3, 0.7]}, "rho_b": {"matrix": [[0.6, [0.1, 0.2]], [[0.1, -0.2], 0.4]]}, "weights": [0.6, [0.0, 0.8]]}"#,
    );
    let o = qprob(&["prospect", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!(floats(&r["normalized"]["q"]).iter().all(|q| q.abs() < 1e-12));
    assert!(floats(&r["raw"]["q"]).iter().any(|q| q.abs() > 1e-3));
    assert_eq!(r["checks"]["zero_interference"], Value::Bool(true));
}

#[test]
fn weight_validation() {
    let o = qprob(&["prospect", "--weights", "1,1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Σ|b|² = 1"));
    assert_eq!(code(&qprob(&["prospect", "--weights", "1,1", "--lenient"])), 0);
    assert_eq!(code(&qprob(&["prospect", "--weights", "0.6,0:0.8"])), 0);
    assert_eq!(code(&qprob(&["prospect", "--weights", "1,1,1"])), 2);
}

#[test]
fn degenerate_normalized_family_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "degenerate.json",
        r#"{"preset": "product", "rho_a": {"diagonal": [1, 0]}, "rho_b": {"matrix": [[0.5, -0.5], [-0.5, 0.5]]}}"#,
    );
    let o = qprob(&["prospect", "--config", &cfg, "--normalized"]);
    assert_eq!(code(&o), 3);
    let o = qprob(&["prospect", "--config", &cfg, "--raw"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["normalized"].is_null());
    assert!(r["normalized_error"].as_str().unwrap().contains("degenerate"));
}

#[test]
fn file_preset_and_bad_states() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "file.json",
        r#"{"preset": "file", "dim_a": 2, "dim_b": 2, "state": {"pure": [0.5, 0.5, 0.5, -0.5]}}"#,
    );
    let o = qprob(&["prospect", "--config", &cfg]);
    assert!(close(&floats(&json(&o)["raw"]["q"]), &[0.25, -0.25], 1e-12));

    let missing = write(dir.path(), "missing.json", r#"{"preset": "file"}"#);
    assert_eq!(code(&qprob(&["prospect", "--config", &missing])), 2);
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"preset": "file", "dim_a": 2, "dim_b": 2, "state": {"diagonal": [0.5, 0.6, 0, 0]}}"#,
    );
    assert_eq!(code(&qprob(&["prospect", "--config", &bad])), 2);
    let garbage = write(dir.path(), "garbage.json", "{not json");
    assert_eq!(code(&qprob(&["prospect", "--config", &garbage])), 2);
    assert_eq!(code(&qprob(&["prospect", "--config", "/nonexistent/qprob.json"])), 2);
}

#[test]
fn measure_reports_union_and_interference() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "measure.json",
        r#"{"state": {"diagonal": [0.2, 0.3, 0.5]}, "unions": [[0, 2]], "weights": [0.6, 0.8, 0]}"#,
    );
    let o = qprob(&["measure", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!((r["unions"][0]["p"].as_f64().unwrap() - 0.7).abs() < 1e-12);
    // a diagonal state carries no coherence, so q = 0
    assert!(r["uncertain"]["q"].as_f64().unwrap().abs() < 1e-12);
    assert!((r["uncertain"]["p"].as_f64().unwrap() - (0.36 * 0.2 + 0.64 * 0.3)).abs() < 1e-12);

    let o = qprob(&["measure"]);
    assert!((json(&o)["uncertain"]["q"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn quarter_law_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q.csv");
    let o = qprob(&["quarter-law", "--alphas", "0.5,1,2,5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "alpha,beta,mu,nu,lambdaPlus,qPlus,qMinus,residual");
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[5], 0.25);
        assert_eq!(r[6], -0.25);
        assert_eq!(r[7], 0.0);
    }

    let o = qprob(&["quarter-law"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&last[..5], &[2.0, 1.0, 4.0, 5.0, 0.4]);
    assert!((last[5] - 0.26667).abs() < 1e-5);
    assert!(last[7].abs() < 1e-15);

    assert_eq!(code(&qprob(&["quarter-law", "--alphas", "1,-2"])), 2);
    assert_eq!(code(&qprob(&["quarter-law", "--alphas", "0"])), 2);
}

fn bec(dir: &Path, name: &str, extra: &[&str]) -> (Output, Value) {
    let out = dir.join(format!("{name}.csv"));
    let mut args = vec![
        "bec-sim",
        "--out",
        out.to_str().unwrap(),
        "--paths",
        "16",
        "--tmax",
        "2",
        "--dt",
        "0.01",
        "--stride",
        "7",
    ];
    args.extend_from_slice(extra);
    let o = qprob(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap();
    (o, report)
}

#[test]
fn bec_sim_csv_contract() {
    let dir = TempDir::new().unwrap();
    let (_, report) = bec(dir.path(), "rabi", &["--b", "0.25"]);
    assert_eq!(report["regime"], "Rabi");
    assert!((report["critical_amplitude"].as_f64().unwrap() - 0.28206).abs() < 5e-4);
    let (header, rows) = read_csv(&dir.path().join("rabi.csv"));
    assert_eq!(header.join(","), "t,p1,p2,f1,f2,q1,q2,stderr1");
    // floor(2 / (0.01 * 7)) + 1
    assert_eq!(rows.len(), 29);
    assert_eq!(report["rows"].as_u64(), Some(29));
    for r in &rows {
        assert!((r[1] + r[2] - 1.0).abs() < 1e-12);
        assert!((r[5] + r[6]).abs() < 1e-14);
        assert_eq!(r[5], r[1] - r[3]);
    }
    let text = std::fs::read_to_string(dir.path().join("rabi.csv")).unwrap();
    let field = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert_eq!(field.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);

    let (_, report) = bec(dir.path(), "josephson", &["--b", "0.5"]);
    assert_eq!(report["regime"], "Josephson");
}

#[test]
fn bec_sim_without_noise_has_zero_interference() {
    let dir = TempDir::new().unwrap();
    bec(dir.path(), "quiet", &["--sigma", "0", "--b", "0.5"]);
    let (_, rows) = read_csv(&dir.path().join("quiet.csv"));
    assert!(rows.iter().all(|r| r[5] == 0.0 && r[6] == 0.0 && r[7] == 0.0));
}

#[test]
fn bec_sim_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["--b", "0.5", "--seed", "7", "--plot"];
    bec(dir.path(), "run", &args);
    let csv1 = std::fs::read(dir.path().join("run.csv")).unwrap();
    let json1 = std::fs::read(dir.path().join("run.json")).unwrap();
    let svg1 = std::fs::read(dir.path().join("run.svg")).unwrap();
    let out = dir.path().join("run.csv");
    let o = qprob_env(
        &[
            "bec-sim",
            "--out",
            out.to_str().unwrap(),
            "--paths",
            "16",
            "--tmax",
            "2",
            "--dt",
            "0.01",
            "--stride",
            "7",
            "--b",
            "0.5",
            "--seed",
            "7",
            "--plot",
        ],
        &[("QPROB_THREADS", "3")],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(csv1, std::fs::read(dir.path().join("run.csv")).unwrap());
    assert_eq!(json1, std::fs::read(dir.path().join("run.json")).unwrap());
    assert_eq!(svg1, std::fs::read(dir.path().join("run.svg")).unwrap());
    let svg = String::from_utf8(svg1).unwrap();
    assert!(svg.contains(r#"version="1.1""#) && svg.contains("b_c = 0.282") && svg.contains("b = 0.5"));
}

#[test]
fn bec_sim_config_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bec.json", r#"{"b": 0.5, "sigma": 0.05, "n_paths": 8, "seed": 3, "stride": 50}"#);
    let (_, report) = bec(dir.path(), "flags", &["--config", &cfg, "--b", "0.25"]);
    let c = &report["config"];
    assert_eq!(c["b"].as_f64(), Some(0.25));
    assert_eq!(c["sigma"].as_f64(), Some(0.05));
    assert_eq!(c["n_paths"].as_u64(), Some(16));
    assert_eq!(c["stride"].as_u64(), Some(7));
    assert_eq!(c["seed"].as_u64(), Some(3));
    assert_eq!(c["s0"].as_f64(), Some(-0.9));
    assert_eq!(report["regime"], "Rabi");

    let out = dir.path().join("env.csv");
    let o = qprob_env(
        &["bec-sim", "--out", out.to_str().unwrap(), "--paths", "4", "--tmax", "0.5"],
        &[("QPROB_SEED", "11")],
    );
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("env.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"].as_u64(), Some(11));
}

#[test]
fn bec_sim_failures() {
    let o = qprob(&["bec-sim", "--b", "50", "--dt", "0.05", "--tmax", "10", "--paths", "2"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("path"));
    assert_eq!(code(&qprob(&["bec-sim", "--s0", "1.5"])), 2);
    assert_eq!(code(&qprob(&["bec-sim", "--sigma", "-1"])), 2);
    assert_eq!(code(&qprob(&["bec-sim", "--stride", "0"])), 2);
    assert_eq!(code(&qprob(&["bec-sim", "--plot"])), 2);
    assert_eq!(code(&qprob_env(&["bec-sim"], &[("QPROB_THREADS", "zero")])), 2);
}

#[test]
fn verify_single_suite() {
    let o = qprob(&["verify", "--filter", "quarterlaw"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|l| l.contains("quarterlaw")));
    assert!(text.contains("quarter-law"));
    assert!(text.contains("4 passed, 0 failed"));
}

#[test]
fn verify_reports_injected_fault() {
    let o = qprob(&["verify", "--corrupt-state"]);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("first failing invariant: prospect-normalization"));
    assert!(text.contains("Σ_n p(π_n) = 1"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prospect-normalization"));
}

#[test]
fn verify_rejects_unknown_suite() {
    assert_eq!(code(&qprob(&["verify", "--filter", "astrology"])), 2);
}

#[test]
fn verify_writes_report_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("verify.txt");
    let o = qprob(&["verify", "--filter", "prospects", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let file = std::fs::read(&out).unwrap();
    assert_eq!(file, o.stdout);
    assert!(String::from_utf8(file).unwrap().starts_with("qprob verify  seed=5"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&qprob(&[])), 2);
    assert_eq!(code(&qprob(&["simulate"])), 2);
    assert_eq!(code(&qprob(&["prospect", "--preset", "ghz"])), 2);
    assert_eq!(code(&qprob(&["prospect", "--raw", "--normalized"])), 2);
    assert_eq!(code(&qprob(&["--help"])), 0);
}
