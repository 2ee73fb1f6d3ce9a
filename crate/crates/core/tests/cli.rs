use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirac_floquet::cli::config::{parse_config, to_json};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-floquet"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    if let Some(o) = out {
        c.arg("--out").arg(o);
    }
    c.output().unwrap()
}

const Z3: &str = r#""lattice":{"basis":[[1,0,0],[0,1,0],[0,0,1]]}"#;

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"], None, None).status.code(), Some(0));
    assert_eq!(run(&["--version"], None, None).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["no-such-command"], None, None).status.code(), Some(1));
    assert_eq!(run(&["bands", "--cutoff", "abc"], None, None).status.code(), Some(1));
    // missing --config
    assert_eq!(run(&["bands"], None, None).status.code(), Some(1));
}

#[test]
fn config_errors_name_the_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", &format!(r#"{{{Z3},"gamma":[1,0,0],"condition":{{"grid":4,"colour":1}}}}"#));
    let o = run(&["check-condition"], Some(&p), None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/condition/colour") && err.contains("unknown field"), "{err}");

    let p = write(dir.path(), "d.json", &format!(r#"{{{Z3},"potential":{{"A":[{{"mode":[0,1,0],"value":[[1,0],[0,0],[0]]}}]}}}}"#));
    let o = run(&["check-condition"], Some(&p), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/potential/A/0/value/2"));

    // a command whose section is absent
    let p = write(dir.path(), "e.json", &format!("{{{Z3}}}"));
    let o = run(&["verify-weighted"], Some(&p), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/weighted"));
}

#[test]
fn failed_check_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    // a single large mode orthogonal to γ violates the smallness condition
    let p = write(dir.path(), "big.json", &format!(r#"{{{Z3},"gamma":[1,0,0],"potential":{{"A":[{{"mode":[0,1,0],"value":[[2,0],[0,0],[0,0]]}}],"symmetrize":true}}}}"#));
    let out = dir.path().join("out");
    let o = run(&["check-condition"], Some(&p), Some(&out));
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("check-condition.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["brackets"]["euclidean"]["theta_lo"].as_f64().unwrap() >= 1.0);
    assert!(out.join("check-condition_condition.csv").exists());
}

#[test]
fn zero_potential_passes_condition() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "z.json", &format!(r#"{{{Z3},"gamma":[0,0,1]}}"#));
    let o = run(&["check-condition"], Some(&p), None);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["brackets"]["euclidean"]["theta_hi"], 0.0);
}

#[test]
fn cutoff_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["bands", "--cutoff", "7.0"], Some(&configs().join("free.json")), Some(&out));
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["cutoff"], 7.0);
    let effective = parse_config(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(effective.cutoff, Some(7.0));
}

#[test]
fn emitted_configs_round_trip() {
    for name in ["example.json", "free.json"] {
        let cfg = parse_config(&std::fs::read_to_string(configs().join(name)).unwrap()).unwrap();
        let once = to_json(&cfg);
        let again = to_json(&parse_config(&once).unwrap());
        assert_eq!(once, again, "{name}");
    }
}

#[test]
fn free_band_csv_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bands"], Some(&configs().join("free.json")), Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("bands_bands.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("xi,E_1,"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // ξ = -1: k = (0.1, 0.2, 0.3) - (0.6, 0, 0.8); lowest band is -|k + 2πN| over the ball
    let k = [0.1 - 0.6, 0.2, 0.3 - 0.8];
    let r = 9.42477796076938f64;
    let mut top: f64 = 0.0;
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for c in -2i32..=2 {
                let n = [a, b, c];
                if n.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt() * 2.0 * std::f64::consts::PI <= r * (1.0 + 1e-12) {
                    let q: f64 = (0..3).map(|i| (k[i] + 2.0 * std::f64::consts::PI * n[i] as f64).powi(2)).sum::<f64>().sqrt();
                    top = top.max(q);
                }
            }
        }
    }
    assert!((first[1] + top).abs() < 1e-10, "{} vs {}", first[1], -top);
    // 17 significant digits
    let cell = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(cell.split('e').next().unwrap().trim_start_matches('-').replace('.', "").len(), 17);
}
