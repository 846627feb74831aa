use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwf-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn cfg(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_owned()
}

#[test]
fn dims_reports_closed_forms() {
    let out = lab(&["dims", &cfg("percolation.json")]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!((v["delta"].as_f64().unwrap() - 2.8f64.log2()).abs() < 1e-10);
    assert_eq!(v["m_W"].as_f64(), Some(0.0));
    assert_eq!(v["M_W"].as_f64(), Some(2.0));
    let p = v["extinction"]["p"].as_f64().unwrap();
    let total: f64 = v["reduced_law"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["prob"].as_f64().unwrap())
        .sum();
    assert!(p > 0.99 && (total - 1.0).abs() < 1e-12);
}

#[test]
fn dims_on_deterministic_cantor() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        r#"{"ifs": {"preset": "cantor"}, "offspring": {"deterministic": [0, 1]}, "seed": 0}"#,
    );
    let v = json(&lab(&["dims", &c]));
    let s = 2f64.ln() / 3f64.ln();
    for key in ["delta", "m_W", "M_W"] {
        assert!((v[key].as_f64().unwrap() - s).abs() < 1e-10, "{key}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        lab(&["dims", &cfg("subcritical.json")]).status.code(),
        Some(2)
    );
    assert_eq!(
        lab(&["dims", "/nonexistent/config.json"]).status.code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        r#"{"ifs": {"preset": "cantor"}, "offspring": {"binomial_p": 0.9}, "seed": 1, "bogus": 3}"#,
    );
    let out = lab(&["dims", &c]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    // dims without a law
    let c = write_config(dir.path(), r#"{"ifs": {"preset": "cantor"}, "seed": 1}"#);
    assert_eq!(lab(&["dims", &c]).status.code(), Some(1));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn resource_cap_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let c = write_config(
        dir.path(),
        r#"{"ifs": {"percolation": {"base": 4, "dim": 2}}, "seed": 1, "horizon": 14}"#,
    );
    let out = lab(&["render", &c, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_writes_a_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let c = write_config(
        dir.path(),
        r#"{"ifs": {"preset": "cantor"},
            "offspring": {"atoms": [{"subset": [0], "prob": 0.25}, {"subset": [1], "prob": 0.25}, {"subset": [0, 1], "prob": 0.5}]},
            "horizon": 12, "trials": 500, "samples": 6, "reduced_law_samples": 400, "seed": 3}"#,
    );
    let out = lab(&[
        "simulate",
        &c,
        "--out",
        out_dir.to_str().unwrap(),
        "--trials",
        "800",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["kesten_stigum"]["trials"], 800);
    assert_eq!(v["section_counts"]["violations"], 0);
    assert_eq!(v["section_counts"]["trees"], 6);
    for f in [
        "summary.json",
        "section_counts.csv",
        "box_counts.csv",
        "windows.csv",
        "trees/sample_000.txt",
        "clouds/sample_001.csv",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let file: Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(file, v);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"empirical_reduced_law") && names.contains(&"section_count_bounds"));
    let cloud = gwf_core::io::read_cloud_csv(
        std::fs::File::open(out_dir.join("clouds/sample_000.csv")).unwrap(),
    )
    .unwrap();
    assert_eq!(cloud.dim(), 1);
    let rows = std::fs::read_to_string(out_dir.join("section_counts.csv")).unwrap();
    assert!(rows.starts_with("sample,scale,count,lower,upper\n"));
    assert_eq!(rows.lines().count(), 1 + 6 * 4);
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        r#"{"ifs": {"preset": "cantor"}, "offspring": {"binomial_p": 0.8}, "horizon": 8, "trials": 100, "samples": 2, "seed": 3}"#,
    );
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        assert!(lab(&[
            "simulate",
            &c,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
        std::fs::read(out.join("summary.json")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "c"), run("6", "d"));
}

#[test]
fn check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let v = json(&lab(&[
        "check",
        &cfg("cantor_mixed.json"),
        "--out",
        &out("c"),
    ]));
    assert_eq!(v["ssc"]["kind"], "certified_separated");
    assert_eq!(v["zoom"]["status"], "checked");
    assert_eq!(
        v["zoom"]["passed"],
        v["zoom"]["identities"].as_array().unwrap().len()
    );
    assert!(dir.path().join("c/check.json").exists());

    let v = json(&lab(&["check", &cfg("halves.json"), "--out", &out("h")]));
    assert_eq!(v["osc"]["passed"], true);
    assert_eq!(v["ssc"]["kind"], "undecided");
    assert_eq!(v["zoom"]["status"], "skipped");

    let v = json(&lab(&["check", &cfg("overlap.json"), "--out", &out("o")]));
    assert_eq!(v["ssc"]["kind"], "certified_overlap");
    assert!(v["wsc"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["max_count"] == 1));
}

#[test]
fn zoom_and_render_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z");
    let v = json(&lab(&[
        "zoom",
        &cfg("cantor_mixed.json"),
        "--out",
        out.to_str().unwrap(),
    ]));
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 14 / 2 + 1);
    assert!(steps[1..]
        .iter()
        .all(|s| s["ratio"].as_f64().unwrap() > 1.0));
    assert!(out.join("zoom/step_00.csv").exists() && out.join("zoom.json").exists());

    let out = dir.path().join("r");
    let v = json(&lab(&[
        "render",
        &cfg("percolation.json"),
        "--out",
        out.to_str().unwrap(),
    ]));
    let img = std::fs::read(out.join("render.pgm")).unwrap();
    assert!(img.starts_with(b"P5\n512 512\n255\n"));
    assert_eq!(img.len(), "P5\n512 512\n255\n".len() + 512 * 512);
    assert!(v["points"].as_u64().unwrap() > 0);
}

#[test]
fn bad_threads_variable_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_gwf-lab"))
        .args(["dims", &cfg("percolation.json")])
        .env("GWF_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
