use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eo"))
        .args(args)
        .env_remove("EO_SEED")
        .output()
        .expect("spawn eo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn avg_bilinear_emits_one_row_per_n() {
    let o = eo(&[
        "avg", "--system", "cyclic:6", "--poly-p", "mono:[0,1]", "--poly-q", "mono:[0,2]", "--n", "600",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,x,re,im"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 600);
    assert!(rows[599].starts_with("600,0,"));
}

#[test]
fn avg_lacunary_keeps_only_admitted_lengths() {
    let o = eo(&["avg", "--system", "cyclic:5", "--index", "lacunary", "--rho", "2", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let ns: Vec<u64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ns, vec![2, 4, 8, 16, 32, 64]);
}

#[test]
fn maximal_hl_sweep_passes() {
    let o = eo(&["maximal", "--check", "hl", "--r", "2", "--trials", "10000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = eo(&["avg", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_value_is_a_usage_error() {
    let o = eo(&["--rho", "0.5", "avg", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_suite_prints_empty_array() {
    let o = eo(&["verify", "--suite", "empty"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!([]));
}

#[test]
fn missing_golden_file_fails_in_check_mode() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.golden");
    let o = eo(&["verify", "--suite", "core", "--goldens", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("none.golden"));
}

fn copy_goldens(to: &Path) {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens/core.golden");
    fs::copy(src, to).unwrap();
}

#[test]
fn injected_golden_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("core.golden");
    copy_goldens(&path);
    let text = fs::read_to_string(&path).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| {
            if l.starts_with("kernel_tail_sup.rho=2 ") {
                "kernel_tail_sup.rho=2 = 3.5".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&path, tampered).unwrap();
    let o = eo(&["verify", "--suite", "core", "--goldens", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let kernel = v.as_array().unwrap().iter().find(|r| r["criterion"] == 6).unwrap();
    assert_eq!(kernel["pass"], false);
}

#[test]
fn env_seed_overrides_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_eo"));
        c.env_remove("EO_SEED");
        if let Some(s) = env {
            c.env("EO_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.args(["avg", "--system", "cyclic:4", "--n", "8"]);
        stdout(&c.output().unwrap())
    };
    let default = run(None, None);
    let seven = run(Some("7"), None);
    assert_ne!(default, seven);
    assert_eq!(seven, run(None, Some("7")));
    assert_eq!(seven, run(Some("7"), Some("42")));
}

#[test]
fn spectral_periodogram_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = eo(&[
        "--grid-size", "4096", "spectral", "--mode", "periodogram", "--n", "256", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 4097);
    assert!(text.starts_with("theta,value\n"));
}

#[test]
fn oscillation_and_transfer_report_json() {
    let o = eo(&["oscillation", "--blocks", "auto:8^4", "--signal", "random:64"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["K"], 4);

    let o = eo(&["transfer", "--system", "random:12", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}
