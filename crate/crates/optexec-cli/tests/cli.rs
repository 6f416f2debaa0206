//! End-to-end checks of the compiled binary: exit codes, output files, and
//! deterministic reruns.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optexec"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("optexec-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_config(dir: &PathBuf) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
            "model": {
                "n": 1,
                "sigma_bar": [0.05],
                "eta_bar": [0.002],
                "delta": [1.0, 1.0],
                "beta": [1.0, 1.0],
                "varrho": [1.0, -0.2, -0.2, 1.0],
                "lambda": 0.001
            },
            "grid": {"T": 10.0, "M": 6},
            "x0": [100.0],
            "strategies": ["CC", "RHS", "RHMC_I", "ORACLE"],
            "outer_paths": 2,
            "inner": {"sampler": "qmc", "N": 6},
            "master_seed": 99
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn bad_config_exits_with_configuration_code() {
    let dir = temp_dir("badcfg");
    let path = dir.join("broken.json");
    fs::write(&path, r#"{"model": {"n": 1}}"#).unwrap();
    let out = bin()
        .args(["run", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn missing_file_exits_with_configuration_code() {
    let out = bin()
        .args(["run", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    // I/O errors on load are environment problems, reported on stderr with a
    // nonzero code.
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn smoke_run_writes_outputs_and_is_deterministic() {
    let dir = temp_dir("smoke");
    let cfg = tiny_config(&dir);
    let out1 = dir.join("run1");
    let out2 = dir.join("run2");
    for out_dir in [&out1, &out2] {
        let out = bin()
            .args([
                "run",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("ORACLE"), "stdout: {stdout}");
        for name in ["results.csv", "results.json", "meta.json"] {
            assert!(out_dir.join(name).is_file(), "{name} missing");
        }
    }
    assert_eq!(
        fs::read(out1.join("results.csv")).unwrap(),
        fs::read(out2.join("results.csv")).unwrap()
    );
    let csv_text = fs::read_to_string(out1.join("results.csv")).unwrap();
    assert!(csv_text.starts_with(
        "sigma_bar,eta_bar,lambda,rho,strategy,mean_cost,stderr,pct_excess_vs_oracle,diag_max"
    ));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn oracle_subcommand_reports_only_the_oracle() {
    let dir = temp_dir("oracle");
    let cfg = tiny_config(&dir);
    let out_dir = dir.join("out");
    let out = bin()
        .args([
            "oracle",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv_text = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv_text.lines().count(), 2, "expected header plus one row: {csv_text}");
    assert!(csv_text.contains("ORACLE"));
    assert!(!csv_text.contains("RHS"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn converge_subcommand_writes_study_csv() {
    let dir = temp_dir("converge");
    let cfg = tiny_config(&dir);
    let out_dir = dir.join("out");
    let out = bin()
        .args([
            "converge",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--n",
            "4,8",
            "--repeats",
            "2",
            "--states",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(text.starts_with("n,sampler,state,repeats,mean_cost,min,max,spread"));
    // Two states x two counts x two samplers.
    assert_eq!(text.lines().count(), 1 + 8, "rows: {text}");
    let _ = fs::remove_dir_all(&dir);
}
