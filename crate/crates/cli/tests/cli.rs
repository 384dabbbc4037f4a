//! End-to-end checks of the binary: exit codes, artifact shapes, config
//! overriding, and the run examples with closed-form answers.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_expoly")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("expoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn no_command_exits_2_with_usage_hint() {
    let out = Command::new(exe()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("usage") || err.contains("--help"),
        "stderr: {err}"
    );
}

#[test]
fn theorem_range_violation_exits_2() {
    let out = Command::new(exe())
        .args(["verify", "--ineq", "1.13", "--p", "inf", "--n-grid", "4,8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("theorem range"), "stderr: {err}");
}

#[test]
fn numerical_gate_failure_exits_3_naming_the_gate() {
    // Erdős Q jet overflows past |x| ~ 26.6: an overflow-domain gate.
    let out = Command::new(exe())
        .args([
            "class-report",
            "--family",
            "erdos",
            "--alpha",
            "2",
            "--x-min",
            "28",
            "--x-max",
            "40",
            "--points",
            "4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("overflow domain"), "stderr: {err}");
}

#[test]
fn mrs_table_closed_form_rows() {
    let path = scratch("mrs.csv");
    let out = Command::new(exe())
        .args(["mrs-table", "--x", "1,4,9", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,a_x,t_a_x,q_a_x,residual");
    let expect = [1.0, 2.0, 3.0];
    for (line, want) in lines.zip(expect) {
        let a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((a - want).abs() < 1e-9, "a_x {a} vs {want}");
        // 17 significant digits
        assert!(line.split(',').next().unwrap().contains('e'));
    }
}

#[test]
fn config_file_with_flag_override() {
    let cfg_path = scratch("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"command": "mrs-table", "family": "freud", "alpha": 4.0, "x": [1.0]}"#,
    )
    .unwrap();
    let csv_path = scratch("override.csv");
    // --alpha 2 overrides the config's 4.0, so a_1 = 1 exactly
    let out = Command::new(exe())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--alpha", "2", "--out"])
        .arg(&csv_path)
        .args(["mrs-table"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let a: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((a - 1.0).abs() < 1e-9, "a_1 = {a}");
}

#[test]
fn verify_report_embeds_config_and_svg_is_selfcontained() {
    let json_path = scratch("rr.json");
    let svg_path = scratch("rr.svg");
    let out = Command::new(exe())
        .args([
            "verify",
            "--ineq",
            "2.3",
            "--p",
            "inf",
            "--n-grid",
            "4,8,16",
            "--suite-size",
            "3",
            "--seed",
            "9",
            "--out",
        ])
        .arg(&json_path)
        .arg("--svg")
        .arg(&svg_path)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["config"]["ineq"], "2.3");
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["verdict"], "pass");
    assert!(report["empirical_constant"].as_f64().unwrap() <= 2.0 * (1.0 + 1e-6));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(
        svg.contains(">n<") && svg.contains("ratio"),
        "axis labels missing"
    );
    assert!(
        !svg.contains("http://") || svg.contains("xmlns"),
        "no external assets"
    );
}

#[test]
fn exploratory_verdict_for_t12_below_p2() {
    let json_path = scratch("t12.json");
    let out = Command::new(exe())
        .args([
            "verify", "--ineq", "1.12", "--p", "1", "--j", "1", "--n-grid", "4,8", "--out",
        ])
        .arg(&json_path)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["verdict"], "exploratory");
}

#[test]
fn recurrence_csv_shape() {
    let path = scratch("rec.csv");
    let out = Command::new(exe())
        .args(["recurrence", "--n", "12", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,a_k,b_k,gamma_ratio");
    assert_eq!(lines.len(), 13);
    // diagonal column exactly zero, gamma_ratio equals a_k
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cells[1], cells[3]);
    }
}

#[test]
fn eval_and_christoffel_and_vp_apply_run() {
    for args in [
        vec!["eval", "--n", "6", "--j-max", "2", "--points", "11"],
        vec![
            "christoffel",
            "--n",
            "8",
            "--j",
            "1",
            "--points",
            "9",
            "--oracle",
        ],
        vec![
            "vp-apply", "--target", "sin5", "--n", "8", "--j", "1", "--points", "9",
        ],
    ] {
        let out = Command::new(exe()).args(&args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.lines().count() > 1);
    }
}
