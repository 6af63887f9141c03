//! The command-line front end: exit codes, CSV shape and diagnostics.

use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "drop,block,C,B,precoder,metric,value,status,iters,config_hash";

fn cellfree(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellfree")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn nmse_sweep_writes_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[experiment]\ndrops = 2\n");
    let out = cellfree(&["nmse-sweep", "--config", &cfg, "--out", "nmse.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("nmse.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    // 2 drops x 5 capacities x 9 resolutions.
    assert_eq!(lines.count(), 90);
}

#[test]
fn maxmin_honours_precoder_seed_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[experiment]\ndrops = 1\nblocks = 2\n");
    let run = |threads: &str, out: &str| {
        let o = cellfree(&["maxmin", "--config", &cfg, "--precoder", "zf", "--seed", "9", "--threads", threads, "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("2", "b.csv");
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("zf")));
}

#[test]
fn validate_aqnm_reports_each_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[experiment]\nsamples = 20000\n");
    let out = cellfree(&["validate-aqnm", "--config", &cfg, "--out", "aqnm.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("aqnm.csv")).unwrap();
    for bits in 1..=4 {
        assert!(text.lines().any(|l| l.contains(&format!(",{bits},none,aqnm_rho,"))));
    }
}

#[test]
fn bad_config_fails_with_stage_label() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[system]\nusers = 0\n");
    let out = cellfree(&["maxmin", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config"), "{err}");

    let cfg = write(dir.path(), "typo.toml", "[system]\nuserz = 3\n");
    let out = cellfree(&["maxmin", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
}

#[test]
fn unknown_precoder_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellfree(&["maxmin", "--precoder", "mmse"], dir.path());
    assert!(!out.status.success());
}
