use std::path::Path;
use std::process::{Command, Output};

use d22_cli::report::VerificationReport;
use serde_json::Value;

fn d22(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d22"))
        .args(args)
        .env_remove("D22_SEED")
        .env_remove("D22_N")
        .env_remove("D22_CLASS")
        .env_remove("D22_SUITE")
        .env_remove("D22_TOLERANCE")
        .env_remove("D22_CONFIG")
        .env_remove("D22_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("started_unix_seconds");
            map.remove("wall_clock_seconds");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn load(path: &Path) -> VerificationReport {
    VerificationReport::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_suite_passes() {
    let out = d22(&["verify", "--suite", "ybe,reflection"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = VerificationReport::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(report.pass);
    assert_eq!(report.suites.len(), 2);
    for r in report.records() {
        assert!(!r.equation.is_empty());
        assert!(r.residual.0 <= r.tolerance.0);
    }
}

#[test]
fn impossible_tolerance_fails_with_exit_one() {
    let out = d22(&["verify", "--suite", "ybe", "--tolerance", "1e-30"]);
    assert_eq!(code(&out), 1);
    let report = VerificationReport::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(!report.pass);
    assert!(!report.failures().is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&d22(&["verify", "--no-such-flag"])), 2);
    assert_eq!(code(&d22(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&d22(&["solve", "--n", "3"])), 2);
    assert_eq!(code(&d22(&["verify", "--n", "0", "--suite", "ybe"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"eta": {"re": 0.37, "im": "0"}}"#).unwrap();
    assert_eq!(
        code(&d22(&["verify", "--config", bad.to_str().unwrap()])),
        2
    );
    std::fs::write(&bad, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(
        code(&d22(&["verify", "--config", bad.to_str().unwrap()])),
        2
    );
    assert_eq!(
        code(&d22(&[
            "report",
            dir.path().join("missing.json").to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"seed": "99", "suites": ["rfactor"], "eta": {"re": "0.41", "im": "0.05"}}"#,
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let run = d22(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let report = load(&out);
    assert_eq!(report.seed.0, 5);
    assert_eq!(report.config.eta.re.0, 0.41);
    assert_eq!(report.suites.len(), 1);
}

#[test]
fn same_seed_reports_match_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = d22(&["verify", "--seed", "31337", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        strip_timing(&mut v);
        v
    };
    let first = run("r.json");
    assert_eq!(first, run("r.json"));
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    assert_eq!(
        code(&d22(&[
            "verify",
            "--suite",
            "fusion",
            "--out",
            path.to_str().unwrap()
        ])),
        0
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let report = VerificationReport::parse(&text).unwrap();
    assert_eq!(report.to_json(), text);
    assert_eq!(code(&d22(&["report", path.to_str().unwrap()])), 0);

    let failing = dir.path().join("f.json");
    d22(&[
        "verify",
        "--suite",
        "fusion",
        "--tolerance",
        "1e-30",
        "--out",
        failing.to_str().unwrap(),
    ]);
    assert_eq!(code(&d22(&["report", failing.to_str().unwrap()])), 1);
}

#[test]
fn solve_single_site_covers_spectrum() {
    for class in ["I", "II"] {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let out = d22(&[
            "solve",
            "--n",
            "1",
            "--class",
            class,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "class {class}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = load(&path);
        let sol = report.solution.expect("solve attaches a solution");
        assert!(sol.root_sets.len() >= 4);
        assert_eq!(sol.matched_branches, sol.eigenvalue_branches);
        assert_eq!(sol.eigenvalue_branches, 4);
    }
}

#[test]
fn spectrum_lists_all_eigenvalues() {
    let out = d22(&["spectrum", "--n", "1", "--u", "0.3,-0.2"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["d22"].as_array().unwrap().len(), 4);
    assert_eq!(v["xxz_staggered"].as_array().unwrap().len(), 4);
}
