use std::path::Path;
use std::process::{Command, Output};

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab")).args(args).output().expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn empty_invocation_prints_usage_and_signals_misuse() {
    let o = conelab(&[]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8_lossy(&o.stdout).to_string() + &String::from_utf8_lossy(&o.stderr);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn config_without_scenario_is_misuse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"dim": 3}"#).unwrap();
    let o = conelab(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"dimension": 3}"#).unwrap();
    let o = conelab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn example_writes_profile_and_mass_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = conelab(&["example", "--prop", "2.2", "--eps", "0.25", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("profile.csv"));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# conelab "));
    let hash_line = lines.next().unwrap();
    assert!(hash_line.starts_with("# config-sha256 "));
    assert_eq!(lines.next().unwrap(), "r,u,A,B,S");
    let report: serde_json::Value = serde_json::from_str(&read(&dir.path().join("mass.json"))).unwrap();
    assert_eq!(report["meta"]["config_hash"].as_str().unwrap(), hash_line.trim_start_matches("# config-sha256 "));
    let m = report["mass"]["extrapolated_mass"].as_f64().unwrap();
    let a = report["construction"]["a"].as_f64().unwrap();
    assert!(m > 0.0 && (m / a - 1.0).abs() < 1e-3);
    assert_eq!(report["ok"], true);
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario": "mass", "example": "2.3", "m": 0.5}"#).unwrap();
    let a = dir.path().join("a");
    let o = conelab(&["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&read(&a.join("mass.json"))).unwrap();
    assert!((rep["mass"]["extrapolated_mass"].as_f64().unwrap() + 1.0).abs() < 1e-3);
    let b = dir.path().join("b");
    let o = conelab(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "mass", "--m", "2"]);
    assert!(o.status.success());
    let rep: serde_json::Value = serde_json::from_str(&read(&b.join("mass.json"))).unwrap();
    assert!((rep["mass"]["extrapolated_mass"].as_f64().unwrap() + 4.0).abs() < 1e-2);
    assert_ne!(read(&a.join("config.json")), read(&b.join("config.json")));
}

#[test]
fn runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let o = conelab(&["yamabe", "--amp", "0.1", "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
        d
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["history.csv", "solution.csv", "solution.json", "config.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
}

#[test]
fn flow_series_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = conelab(&["flow", "--outputs", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("flow.csv"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,J,min_S,sup_grad_scaled,sup_hess_scaled,closeness,mass,sup_dq_S");
    assert_eq!(rows.len(), 1 + 4);
}

#[test]
fn every_scenario_embeds_version_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, args) in [
        ("curvature", vec!["curvature", "--alpha", "1.5"]),
        ("mollify", vec!["mollify", "--eps", "0.1"]),
        ("neck", vec!["example", "--prop", "2.5"]),
    ] {
        let d = dir.path().join(sub);
        let mut all = args.clone();
        all.extend(["--out", d.to_str().unwrap()]);
        assert!(conelab(&all).status.success(), "{sub}");
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            let text = read(&p);
            if p.extension().unwrap() == "json" {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
                assert_eq!(v["meta"]["config_hash"].as_str().unwrap().len(), 64);
            } else {
                assert!(text.starts_with(&format!("# conelab {}\n# config-sha256 ", env!("CARGO_PKG_VERSION"))));
            }
        }
    }
}
